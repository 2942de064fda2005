#include "amcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace amcast::metrics
{
    double percentile(std::vector<double> values, double p)
    {
        if (values.empty())
        {
            throw std::invalid_argument("no samples");
        }
        if (!(p > 0 && p <= 100))
        {
            throw std::invalid_argument("percentile must lie in (0, 100]");
        }
        std::sort(values.begin(), values.end());
        auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size()) - 1e-9));
        rank = std::clamp<std::size_t>(rank, 1, values.size());
        return values[rank - 1];
    }

    std::vector<double> rank_latencies(const std::vector<LatencySample> &samples, std::size_t rank)
    {
        if (rank == 0)
        {
            throw std::invalid_argument("ranks start at 1");
        }
        std::vector<double> out;
        for (const auto &s : samples)
        {
            if (s.by_rank.size() >= rank)
            {
                out.push_back(to_ms(s.by_rank[rank - 1]));
            }
        }
        return out;
    }

    Percentiles percentiles(const std::vector<LatencySample> &samples, std::size_t rank)
    {
        auto values = rank_latencies(samples, rank);
        return Percentiles{percentile(values, 90), percentile(values, 95), percentile(values, 99)};
    }

    std::vector<LatencySample> trim(std::vector<LatencySample> samples, double fraction)
    {
        if (fraction < 0 || fraction >= 0.5)
        {
            throw std::invalid_argument("trim fraction must lie in [0, 0.5)");
        }
        std::stable_sort(samples.begin(), samples.end(), [](const auto &a, const auto &b) {
            return a.issued != b.issued ? a.issued < b.issued : a.id < b.id;
        });
        const auto cut = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(samples.size())));
        return {samples.begin() + static_cast<std::ptrdiff_t>(cut), samples.end() - static_cast<std::ptrdiff_t>(cut)};
    }

    double throughput(const std::vector<LatencySample> &samples)
    {
        if (samples.empty())
        {
            return 0;
        }
        SimTime first = samples.front().issued;
        SimTime last = samples.front().completed;
        for (const auto &s : samples)
        {
            first = std::min(first, s.issued);
            last = std::max(last, s.completed);
        }
        if (last <= first)
        {
            return 0;
        }
        return static_cast<double>(samples.size()) / (to_ms(last - first) / 1000.0);
    }

    double scalability_factor(double mt_i, double cf_i, double mt_j, double cf_j)
    {
        if (mt_i <= 0 || cf_i <= 0 || mt_j <= 0 || cf_j <= 0)
        {
            throw std::invalid_argument("scalability factor needs positive throughputs and client counts");
        }
        return mt_j / (mt_i * cf_j / cf_i);
    }

    ByteAccount byte_accounting(const Trace &trace, GroupId g)
    {
        ByteAccount acc;
        if (trace.empty())
        {
            return acc;
        }
        std::size_t count = 0;
        std::size_t bytes = 0;
        SimTime first = trace.front().at;
        SimTime last = trace.front().at;
        for (const auto &e : trace)
        {
            first = std::min(first, e.at);
            last = std::max(last, e.at);
            if (e.kind == EventKind::Receive && e.node == Endpoint::group(g) && e.packet &&
                *e.packet != PacketKind::Client)
            {
                ++count;
                bytes += e.bytes;
            }
        }
        if (count == 0)
        {
            return acc;
        }
        const double seconds = std::max(to_ms(last - first), 1.0) / 1000.0;
        acc.mean_bytes = static_cast<double>(bytes) / static_cast<double>(count);
        acc.msgs_per_sec = static_cast<double>(count) / seconds;
        acc.bytes_per_sec = static_cast<double>(bytes) / seconds;
        return acc;
    }

    namespace
    {
        std::vector<double> ranks(const std::vector<double> &v)
        {
            std::vector<std::size_t> idx(v.size());
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
            std::vector<double> r(v.size());
            for (std::size_t i = 0; i < idx.size();)
            {
                std::size_t j = i;
                while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]])
                {
                    ++j;
                }
                const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
                for (std::size_t k = i; k <= j; ++k)
                {
                    r[idx[k]] = avg;
                }
                i = j + 1;
            }
            return r;
        }
    }

    double spearman(const std::vector<double> &x, const std::vector<double> &y)
    {
        if (x.size() != y.size() || x.size() < 2)
        {
            throw std::invalid_argument("spearman needs two equally sized samples of length >= 2");
        }
        const auto rx = ranks(x);
        const auto ry = ranks(y);
        const double n = static_cast<double>(x.size());
        const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
        const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < rx.size(); ++i)
        {
            sxy += (rx[i] - mx) * (ry[i] - my);
            sxx += (rx[i] - mx) * (rx[i] - mx);
            syy += (ry[i] - my) * (ry[i] - my);
        }
        if (sxx == 0 || syy == 0)
        {
            return 0;
        }
        return sxy / std::sqrt(sxx * syy);
    }

    std::string csv_header(std::size_t n_groups)
    {
        std::string h = "protocol,overlay,locality,seed,rank,samples,p90,p95,p99,throughput";
        for (std::size_t g = 0; g < n_groups; ++g)
        {
            h += ",overhead_" + std::to_string(g);
        }
        return h;
    }

    namespace
    {
        std::string num(double v, const char *fmt = "%.3f")
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, fmt, v);
            return buf;
        }
    }

    std::string csv_line(const CsvRow &row)
    {
        std::string line = row.protocol + "," + row.overlay + "," + num(row.locality, "%.4g") + "," +
                           std::to_string(row.seed) + "," + std::to_string(row.rank) + "," + std::to_string(row.samples);
        if (row.latency)
        {
            line += "," + num(row.latency->p90) + "," + num(row.latency->p95) + "," + num(row.latency->p99);
        }
        else
        {
            line += ",,,";
        }
        line += "," + num(row.throughput);
        for (double o : row.overhead)
        {
            line += "," + num(o, "%.6f");
        }
        return line;
    }
} // namespace amcast::metrics

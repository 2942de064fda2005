#pragma once

#include "amcast/simnet.hpp"
#include "amcast/trace.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace amcast::metrics
{
    using simnet::LatencySample;

    /// Nearest-rank percentile: the ceil(p/100 * N)-th smallest value.
    /// Throws std::invalid_argument("no samples") on an empty input.
    double percentile(std::vector<double> values, double p);

    /// Latencies (ms) of the rank-th reply (1-based) over samples that have one.
    std::vector<double> rank_latencies(const std::vector<LatencySample> &samples, std::size_t rank);

    struct Percentiles
    {
        double p90 = 0;
        double p95 = 0;
        double p99 = 0;
    };
    Percentiles percentiles(const std::vector<LatencySample> &samples, std::size_t rank);

    /// Drops the first and last floor(fraction * n) samples by issue time.
    std::vector<LatencySample> trim(std::vector<LatencySample> samples, double fraction = 0.10);

    /// Completed transactions per second over [first issue, last completion].
    double throughput(const std::vector<LatencySample> &samples);

    /// Throughput growth from configuration i to j relative to the growth in
    /// client count: mt_j / (mt_i * cf_j / cf_i). 1.0 is ideal scaling.
    double scalability_factor(double mt_i, double cf_i, double mt_j, double cf_j);

    struct ByteAccount
    {
        double msgs_per_sec = 0;
        double mean_bytes = 0;
        double bytes_per_sec = 0;
    };

    /// Protocol packets received by group g (client submissions excluded),
    /// over the span of the trace.
    ByteAccount byte_accounting(const Trace &trace, GroupId g);

    /// Spearman rank correlation; 0 when either side is constant.
    double spearman(const std::vector<double> &x, const std::vector<double> &y);

    struct CsvRow
    {
        std::string protocol;
        std::string overlay;
        double locality = 0;
        std::uint64_t seed = 0;
        std::size_t rank = 1;
        std::size_t samples = 0;
        std::optional<Percentiles> latency;
        double throughput = 0;
        std::vector<double> overhead;
    };

    /// `protocol,overlay,locality,seed,rank,samples,p90,p95,p99,throughput,overhead_0,...`
    std::string csv_header(std::size_t n_groups);
    std::string csv_line(const CsvRow &row);
} // namespace amcast::metrics

#include "amcast/experiment.hpp"
#include "amcast/metrics.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace amcast;
using namespace amcast::metrics;

namespace
{
    LatencySample sample(std::uint32_t seq, double issued_ms, std::vector<double> ranks_ms)
    {
        LatencySample s;
        s.id = MessageId{1, seq};
        s.issued = from_ms(issued_ms);
        SimTime last = s.issued;
        for (double r : ranks_ms)
        {
            s.by_rank.push_back(from_ms(r));
            last = std::max(last, s.issued + from_ms(r));
        }
        s.completed = last;
        return s;
    }
}

TEST_SUITE("metrics")
{
    TEST_CASE("nearest-rank percentiles")
    {
        CHECK(percentile({100}, 90) == 100);
        CHECK(percentile({100}, 99) == 100);
        std::vector<double> v;
        for (int i = 1; i <= 100; ++i)
        {
            v.push_back(i);
        }
        CHECK(percentile(v, 90) == 90);
        CHECK(percentile(v, 95) == 95);
        CHECK(percentile(v, 99) == 99);
        CHECK(percentile(v, 100) == 100);
        CHECK(percentile({3, 1, 2}, 50) == 2);
        CHECK(percentile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, 90) == 9);
        CHECK_THROWS_WITH_AS(percentile({}, 90), "no samples", std::invalid_argument);
        CHECK_THROWS_AS(percentile({1}, 0), std::invalid_argument);
    }

    TEST_CASE("percentiles are monotone and permutation invariant")
    {
        std::mt19937_64 rng(3);
        for (int round = 0; round < 50; ++round)
        {
            std::vector<double> v(1 + rng() % 200);
            for (auto &x : v)
            {
                x = static_cast<double>(rng() % 1000);
            }
            auto shuffled = v;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            double prev = 0;
            for (double p : {10.0, 50.0, 90.0, 95.0, 99.0})
            {
                const double q = percentile(v, p);
                CHECK(q == percentile(shuffled, p));
                CHECK(q >= prev);
                prev = q;
            }
        }
    }

    TEST_CASE("per-rank percentiles skip samples without that rank")
    {
        const std::vector<LatencySample> s{sample(1, 0, {5, 9}), sample(2, 1, {7}), sample(3, 2, {1, 2, 3})};
        CHECK(rank_latencies(s, 1) == std::vector<double>{5, 7, 1});
        CHECK(rank_latencies(s, 2) == std::vector<double>{9, 2});
        CHECK(rank_latencies(s, 3) == std::vector<double>{3});
        CHECK_THROWS_AS(rank_latencies(s, 0), std::invalid_argument);
        const auto p = percentiles(s, 2);
        CHECK(p.p90 == 9);
        CHECK_THROWS_WITH_AS(percentiles(s, 4), "no samples", std::invalid_argument);
    }

    TEST_CASE("trim drops whole samples from both ends by issue time")
    {
        std::vector<LatencySample> s;
        for (std::uint32_t i = 0; i < 100; ++i)
        {
            s.push_back(sample(i, 99.0 - i, {1}));
        }
        auto t = trim(s, 0.10);
        REQUIRE(t.size() == 80);
        CHECK(t.front().issued == from_ms(10));
        CHECK(t.back().issued == from_ms(89));

        s.resize(9);
        CHECK(trim(s, 0.10).size() == 9);
        CHECK(trim(s, 0.0).size() == 9);
        CHECK_THROWS_AS(trim(s, 0.5), std::invalid_argument);
    }

    TEST_CASE("throughput over the span of the samples")
    {
        CHECK(throughput({}) == 0);
        std::vector<LatencySample> s;
        for (std::uint32_t i = 0; i < 10; ++i)
        {
            s.push_back(sample(i, i * 100.0, {100}));
        }
        // 10 transactions between 0 and 1000 ms.
        CHECK(throughput(s) == doctest::Approx(10.0));
    }

    TEST_CASE("scalability factor")
    {
        CHECK(scalability_factor(100, 24, 174, 48) == doctest::Approx(0.87));
        CHECK(scalability_factor(100, 24, 200, 48) == doctest::Approx(1.0));
        CHECK(scalability_factor(100, 24, 100, 48) == doctest::Approx(0.5));
        CHECK_THROWS_AS(scalability_factor(0, 24, 100, 48), std::invalid_argument);
        CHECK_THROWS_AS(scalability_factor(100, 0, 100, 48), std::invalid_argument);
    }

    TEST_CASE("spearman against hand-computed ranks")
    {
        CHECK(spearman({1, 2, 3, 4, 5}, {5, 6, 7, 8, 9}) == doctest::Approx(1.0));
        CHECK(spearman({1, 2, 3, 4, 5}, {9, 7, 5, 3, 1}) == doctest::Approx(-1.0));
        // d = (0, 1, 1, 0): 1 - 6 * 2 / (4 * 15)
        CHECK(spearman({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(0.8));
        // Ties take the mean rank: y ranks (1.5, 1.5, 3), Pearson on ranks = sqrt(3)/2.
        CHECK(spearman({1, 2, 3}, {4, 4, 9}) == doctest::Approx(0.8660254));
        CHECK(spearman({1, 2, 3}, {2, 2, 2}) == 0);
        CHECK_THROWS_AS(spearman({1}, {1}), std::invalid_argument);
    }

    TEST_CASE("byte accounting")
    {
        CHECK(byte_accounting({}, 0).mean_bytes == 0);

        experiment::RunConfig cfg;
        cfg.clients_per_region = 2;
        cfg.duration_ms = 3000;
        cfg.locality = 0.9;
        cfg.verify = false;
        const auto flex = experiment::run_once(cfg, 1);
        std::vector<double> rank, mean;
        for (GroupId g = 0; g < flex.groups; ++g)
        {
            const auto acc = byte_accounting(flex.sim.trace, g);
            if (acc.msgs_per_sec > 0)
            {
                rank.push_back(g);
                mean.push_back(acc.mean_bytes);
            }
        }
        REQUIRE(rank.size() >= 3);
        CAPTURE(mean);
        CHECK(spearman(rank, mean) > 0);

        cfg.protocol = experiment::ProtocolKind::Skeen;
        const auto skeen = experiment::run_once(cfg, 1);
        for (GroupId g = 0; g < skeen.groups; ++g)
        {
            const auto acc = byte_accounting(skeen.sim.trace, g);
            if (acc.msgs_per_sec > 0)
            {
                CHECK(acc.mean_bytes == doctest::Approx(32.0)); // empty envelope + one timestamp
                CHECK(acc.bytes_per_sec == doctest::Approx(32.0 * acc.msgs_per_sec));
            }
        }
    }

    TEST_CASE("csv layout")
    {
        CHECK(csv_header(2) == "protocol,overlay,locality,seed,rank,samples,p90,p95,p99,throughput,overhead_0,overhead_1");
        CsvRow row;
        row.protocol = "flexcast";
        row.overlay = "o1";
        row.locality = 0.9;
        row.seed = 7;
        row.rank = 2;
        row.samples = 40;
        row.latency = Percentiles{90, 95.5, 99.25};
        row.throughput = 12.5;
        row.overhead = {0, 0.125};
        CHECK(csv_line(row) == "flexcast,o1,0.9,7,2,40,90.000,95.500,99.250,12.500,0.000000,0.125000");
        row.latency.reset();
        row.overhead.clear();
        CHECK(csv_line(row) == "flexcast,o1,0.9,7,2,40,,,,12.500");
    }
}

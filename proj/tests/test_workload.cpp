#include "amcast/presets.hpp"
#include "amcast/workload.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <doctest.h>

#include <cmath>
#include <map>

using namespace amcast;
using namespace amcast::workload;

namespace
{
    // Pearson statistic with adjacent tail bins merged until each expects >= 5.
    struct ChiSquare
    {
        double statistic = 0;
        std::size_t dof = 0;
    };

    ChiSquare chi_square(const std::vector<std::size_t> &observed, const std::vector<double> &p, std::size_t n)
    {
        std::vector<double> obs, exp;
        double o = 0, e = 0;
        for (std::size_t k = 0; k < p.size(); ++k)
        {
            o += static_cast<double>(observed[k]);
            e += p[k] * static_cast<double>(n);
            if (e >= 5.0)
            {
                obs.push_back(o);
                exp.push_back(e);
                o = e = 0;
            }
        }
        if (e > 0 || o > 0)
        {
            // Leftover tail joins the last full bin.
            obs.back() += o;
            exp.back() += e;
        }
        ChiSquare r;
        for (std::size_t k = 0; k < obs.size(); ++k)
        {
            r.statistic += (obs[k] - exp[k]) * (obs[k] - exp[k]) / exp[k];
        }
        r.dof = obs.size() - 1;
        return r;
    }

    double critical(std::size_t dof, double alpha)
    {
        return boost::math::quantile(boost::math::complement(boost::math::chi_squared(static_cast<double>(dof)), alpha));
    }

    LatencyMatrix line(std::size_t n)
    {
        // Region i sits at position i on a line; distances are |i - j| ms.
        std::vector<std::vector<double>> ms(n, std::vector<double>(n, 0.0));
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n; ++i)
        {
            names.push_back("r" + std::to_string(i));
            for (std::size_t j = 0; j < n; ++j)
            {
                ms[i][j] = std::abs(static_cast<double>(i) - static_cast<double>(j)) * 10.0;
            }
        }
        return LatencyMatrix(names, ms);
    }
}

TEST_SUITE("workload")
{
    TEST_CASE("kind mix within one point over a million draws")
    {
        const auto m = presets::aws12();
        Generator gen(WorkloadConfig{}, m, 3, 11);
        std::array<std::size_t, kTxKinds> count{};
        const std::size_t n = 1'000'000;
        for (std::size_t i = 0; i < n; ++i)
        {
            ++count[static_cast<std::size_t>(gen.next().kind)];
        }
        const std::array<double, kTxKinds> want{0.45, 0.43, 0.04, 0.04, 0.04};
        for (std::size_t k = 0; k < kTxKinds; ++k)
        {
            CAPTURE(k);
            CHECK(std::abs(static_cast<double>(count[k]) / n - want[k]) <= 0.01);
        }
    }

    TEST_CASE("cascade closed form")
    {
        // Independent of cascade_probabilities: L(1-L)^(k-1), residual on the last.
        for (double L : {0.0, 0.5, 0.9, 0.99, 1.0})
        {
            for (std::size_t n : {1u, 2u, 3u, 11u})
            {
                const auto p = cascade_probabilities(L, n);
                double total = 0;
                for (std::size_t k = 1; k <= n; ++k)
                {
                    const double want = k < n ? L * std::pow(1 - L, static_cast<double>(k - 1))
                                              : std::pow(1 - L, static_cast<double>(n - 1));
                    CHECK(p[k - 1] == doctest::Approx(want).epsilon(1e-12));
                    total += p[k - 1];
                }
                CHECK(total == doctest::Approx(1.0));
            }
        }
        const auto p = cascade_probabilities(0.9, 3);
        CHECK(p[0] == doctest::Approx(0.9));
        CHECK(p[1] == doctest::Approx(0.09));
        CHECK(p[2] == doctest::Approx(0.01));
    }

    TEST_CASE("remote picks pass a chi-square test at 0.01")
    {
        const auto m = presets::aws12();
        const std::size_t n = 1'000'000;
        for (double L : {0.5, 0.9})
        {
            CAPTURE(L);
            WorkloadConfig cfg;
            cfg.locality = L;
            const GroupId home = 5;
            Generator gen(cfg, m, home, 2024);
            const auto order = remote_order(m, home);
            std::map<GroupId, std::size_t> rank;
            for (std::size_t k = 0; k < order.size(); ++k)
            {
                rank[order[k]] = k;
            }
            std::vector<std::size_t> observed(order.size(), 0);
            for (std::size_t i = 0; i < n; ++i)
            {
                ++observed[rank.at(gen.choose_remote())];
            }
            std::vector<double> p;
            for (std::size_t k = 1; k <= order.size(); ++k)
            {
                p.push_back(k < order.size() ? L * std::pow(1 - L, static_cast<double>(k - 1))
                                             : std::pow(1 - L, static_cast<double>(order.size() - 1)));
            }
            const auto chi = chi_square(observed, p, n);
            CAPTURE(chi.statistic);
            CAPTURE(chi.dof);
            REQUIRE(chi.dof >= 1);
            CHECK(chi.statistic < critical(chi.dof, 0.01));
        }
    }

    TEST_CASE("nearest is measured on the matrix")
    {
        const auto m = line(5);
        CHECK(remote_order(m, 2) == std::vector<GroupId>{1, 3, 0, 4});
        WorkloadConfig cfg;
        cfg.locality = 1.0;
        Generator gen(cfg, m, 0, 1);
        for (int i = 0; i < 1000; ++i)
        {
            CHECK(gen.choose_remote() == 1);
        }
        Generator pair(cfg, line(2), 1, 1);
        cfg.locality = 0.0;
        Generator pair0(cfg, line(2), 1, 1);
        CHECK(pair.choose_remote() == 0);
        CHECK(pair0.choose_remote() == 0);
    }

    TEST_CASE("transactions respect their kind's shape")
    {
        const auto m = presets::aws12();
        Generator gen(WorkloadConfig{}, m, 7, 99);
        std::array<std::size_t, 4> by_size{};
        for (int i = 0; i < 200'000; ++i)
        {
            const auto tx = gen.next();
            CHECK(tx.dst.contains(7));
            CHECK(tx.dst.size() <= 3);
            ++by_size[tx.dst.size()];
            switch (tx.kind)
            {
            case TxKind::NewOrder:
                CHECK(tx.items >= 5);
                CHECK(tx.items <= 15);
                break;
            case TxKind::Payment:
                CHECK(tx.dst.size() <= 2);
                break;
            default:
                CHECK(tx.dst.size() == 1);
            }
        }
        CHECK(by_size[2] > by_size[3]);
        CHECK(by_size[1] > by_size[2]);
    }

    TEST_CASE("global-only draws only multi-warehouse new orders and payments")
    {
        WorkloadConfig cfg;
        cfg.mode = Mode::GlobalOnly;
        Generator gen(cfg, presets::aws12(), 0, 5);
        for (int i = 0; i < 20'000; ++i)
        {
            const auto tx = gen.next();
            CHECK(tx.dst.size() >= 2);
            CHECK(tx.dst.size() <= 3);
            CHECK((tx.kind == TxKind::NewOrder || tx.kind == TxKind::Payment));
        }
        CHECK(parse_mode("global-only") == Mode::GlobalOnly);
        CHECK_THROWS_AS(parse_mode("local"), std::invalid_argument);
    }

    TEST_CASE("generators are deterministic per seed")
    {
        const auto m = presets::aws12();
        Generator a(WorkloadConfig{}, m, 2, client_seed(1, 4));
        Generator b(WorkloadConfig{}, m, 2, client_seed(1, 4));
        Generator c(WorkloadConfig{}, m, 2, client_seed(1, 5));
        bool differs = false;
        for (int i = 0; i < 1000; ++i)
        {
            const auto x = a.next();
            const auto y = b.next();
            const auto z = c.next();
            CHECK(x.dst == y.dst);
            CHECK(x.kind == y.kind);
            differs = differs || x.dst != z.dst || x.kind != z.kind;
        }
        CHECK(differs);
        CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
    }

    TEST_CASE("invalid configurations are rejected")
    {
        WorkloadConfig cfg;
        cfg.locality = 1.5;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = {};
        cfg.mix = {0.5, 0.5, 0.5, 0, 0};
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = {};
        cfg.min_items = 9;
        cfg.max_items = 3;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = {};
        cfg.mode = Mode::GlobalOnly;
        CHECK_THROWS_AS(Generator(cfg, line(1), 0, 1), std::invalid_argument);
    }
}

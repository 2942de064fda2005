#include "amcast/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace amcast::workload
{
    namespace
    {
        constexpr std::array<std::string_view, kTxKinds> kKindNames{"new_order", "payment", "order_status", "delivery",
                                                                    "stock_level"};

        void require(bool ok, const std::string &what)
        {
            if (!ok)
            {
                throw std::invalid_argument(what);
            }
        }
    }

    std::string_view to_string(TxKind kind) noexcept
    {
        return kKindNames[static_cast<std::size_t>(kind)];
    }

    Mode parse_mode(std::string_view text)
    {
        if (text == "full")
        {
            return Mode::Full;
        }
        if (text == "global-only" || text == "global_only" || text == "global")
        {
            return Mode::GlobalOnly;
        }
        throw std::invalid_argument("workload: unknown mode '" + std::string(text) + "' (expected full or global-only)");
    }

    std::string_view to_string(Mode mode) noexcept
    {
        return mode == Mode::Full ? "full" : "global-only";
    }

    void WorkloadConfig::validate() const
    {
        require(locality >= 0 && locality <= 1, "locality must lie in [0,1], got " + std::to_string(locality));
        double sum = 0;
        for (double p : mix)
        {
            require(p >= 0, "mix probabilities must be non-negative");
            sum += p;
        }
        require(std::abs(sum - 1.0) < 1e-9, "mix must sum to 1, got " + std::to_string(sum));
        require(item_remote >= 0 && item_remote <= 1, "item remote probability must lie in [0,1]");
        require(payment_remote >= 0 && payment_remote <= 1, "payment remote probability must lie in [0,1]");
        require(min_items >= 1 && min_items <= max_items, "item count range is empty");
        require(max_destinations >= 1, "max destinations must be positive");
        if (mode == Mode::GlobalOnly)
        {
            require(mix[0] + mix[1] > 0, "global-only mode needs new order or payment in the mix");
            require(max_destinations >= 2, "global-only mode needs at least two destinations");
        }
    }

    std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t client_seed(std::uint64_t run_seed, std::uint64_t client) noexcept
    {
        return splitmix64(splitmix64(run_seed) ^ client);
    }

    std::vector<GroupId> remote_order(const LatencyMatrix &m, GroupId home)
    {
        std::vector<GroupId> out;
        for (GroupId g = 0; g < m.size(); ++g)
        {
            if (g != home)
            {
                out.push_back(g);
            }
        }
        std::stable_sort(out.begin(), out.end(),
                         [&](GroupId a, GroupId b) { return m.latency(home, a) < m.latency(home, b); });
        return out;
    }

    std::vector<double> cascade_probabilities(double locality, std::size_t candidates)
    {
        std::vector<double> p(candidates, 0.0);
        double rest = 1.0;
        for (std::size_t k = 0; k + 1 < candidates; ++k)
        {
            p[k] = rest * locality;
            rest -= p[k];
        }
        if (candidates)
        {
            p.back() = rest;
        }
        return p;
    }

    Generator::Generator(WorkloadConfig cfg, const LatencyMatrix &m, GroupId home, std::uint64_t seed)
        : cfg_(std::move(cfg)), home_(home), remotes_(remote_order(m, home)), rng_(seed)
    {
        cfg_.validate();
        if (cfg_.mode == Mode::GlobalOnly)
        {
            require(!remotes_.empty(), "global-only mode needs at least two warehouses");
            const double scale = cfg_.mix[0] + cfg_.mix[1];
            cfg_.mix = {cfg_.mix[0] / scale, cfg_.mix[1] / scale, 0, 0, 0};
        }
        std::partial_sum(cfg_.mix.begin(), cfg_.mix.end(), cumulative_.begin());
    }

    double Generator::uniform()
    {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    }

    TxKind Generator::draw_kind()
    {
        const double u = uniform();
        for (std::size_t k = 0; k < kTxKinds; ++k)
        {
            if (u < cumulative_[k])
            {
                return static_cast<TxKind>(k);
            }
        }
        // Rounding slack: the last kind with positive mass.
        for (std::size_t k = kTxKinds; k-- > 0;)
        {
            if (cfg_.mix[k] > 0)
            {
                return static_cast<TxKind>(k);
            }
        }
        return TxKind::NewOrder;
    }

    GroupId Generator::choose_remote()
    {
        if (remotes_.empty())
        {
            return home_;
        }
        for (std::size_t k = 0; k + 1 < remotes_.size(); ++k)
        {
            if (uniform() < cfg_.locality)
            {
                return remotes_[k];
            }
        }
        return remotes_.back();
    }

    Transaction Generator::draw()
    {
        Transaction tx;
        tx.kind = draw_kind();
        tx.home = home_;
        tx.dst.insert(home_);
        switch (tx.kind)
        {
        case TxKind::NewOrder:
            tx.items = std::uniform_int_distribution<int>(cfg_.min_items, cfg_.max_items)(rng_);
            for (int i = 0; i < tx.items; ++i)
            {
                if (!remotes_.empty() && uniform() < cfg_.item_remote)
                {
                    tx.dst.insert(choose_remote());
                }
            }
            break;
        case TxKind::Payment:
            if (!remotes_.empty() && uniform() < cfg_.payment_remote)
            {
                tx.dst.insert(choose_remote());
            }
            break;
        default:
            break;
        }
        return tx;
    }

    Transaction Generator::next()
    {
        for (;;)
        {
            Transaction tx = draw();
            if (tx.dst.size() > cfg_.max_destinations)
            {
                continue;
            }
            if (cfg_.mode == Mode::GlobalOnly && tx.dst.size() < 2)
            {
                continue;
            }
            return tx;
        }
    }
} // namespace amcast::workload

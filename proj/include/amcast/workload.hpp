#pragma once

#include "amcast/latency.hpp"
#include "amcast/types.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace amcast::workload
{
    enum class TxKind
    {
        NewOrder,
        Payment,
        OrderStatus,
        Delivery,
        StockLevel,
    };
    inline constexpr std::size_t kTxKinds = 5;

    std::string_view to_string(TxKind kind) noexcept;

    enum class Mode
    {
        Full,       // the standard five-kind mix
        GlobalOnly, // new order and payment only, multi-warehouse draws only
    };

    Mode parse_mode(std::string_view text);
    std::string_view to_string(Mode mode) noexcept;

    struct WorkloadConfig
    {
        double locality = 0.9;
        std::array<double, kTxKinds> mix{0.45, 0.43, 0.04, 0.04, 0.04};
        double item_remote = 0.02;
        double payment_remote = 0.15;
        int min_items = 5;
        int max_items = 15;
        std::size_t max_destinations = 3;
        Mode mode = Mode::Full;

        /// Throws std::invalid_argument naming the offending field.
        void validate() const;
    };

    struct Transaction
    {
        TxKind kind = TxKind::NewOrder;
        GroupId home = 0;
        GroupSet dst;
        int items = 0; // new order only
    };

    /// Deterministic 64-bit mixer; derives independent per-client seeds.
    std::uint64_t splitmix64(std::uint64_t x) noexcept;
    std::uint64_t client_seed(std::uint64_t run_seed, std::uint64_t client) noexcept;

    /// Remote warehouses of `home` ordered nearest first (ties by id).
    std::vector<GroupId> remote_order(const LatencyMatrix &m, GroupId home);

    /// Closed-form cascade probabilities for `candidates` remote warehouses.
    std::vector<double> cascade_probabilities(double locality, std::size_t candidates);

    /// One client's transaction stream.
    class Generator
    {
    public:
        Generator(WorkloadConfig cfg, const LatencyMatrix &m, GroupId home, std::uint64_t seed);

        Transaction next();
        /// k-th nearest with probability L(1-L)^(k-1), the farthest takes the rest.
        GroupId choose_remote();
        TxKind draw_kind();

        GroupId home() const noexcept { return home_; }

    private:
        double uniform();
        Transaction draw();

        WorkloadConfig cfg_;
        GroupId home_;
        std::vector<GroupId> remotes_;
        std::array<double, kTxKinds> cumulative_{};
        std::mt19937_64 rng_;
    };
} // namespace amcast::workload

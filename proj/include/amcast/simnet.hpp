#pragma once

#include "amcast/latency.hpp"
#include "amcast/protocol.hpp"
#include "amcast/trace.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace amcast::simnet
{
    /// How a delivery reaches the waiting client.
    enum class ReplyPath
    {
        Instant, // the client observes the delivery when it happens
        Network, // the reply travels back over the group -> home -> client links
    };

    struct ClientSpec
    {
        std::uint32_t id = 0;
        GroupId home = 0;
        /// Destination set of the next transaction; called once per issue.
        std::function<GroupSet()> next;
    };

    /// A multicast submitted directly at a group at a fixed time.
    struct Injection
    {
        SimTime at = 0;
        MessageId id;
        GroupSet dst;
        std::optional<GroupId> entry; // protocol's choice when unset
        GroupId home = 0;             // used only to pick the entry
    };

    struct SimConfig
    {
        /// Clients stop issuing new transactions at this time; the run then drains.
        SimTime issue_until = from_ms(10'000);
        /// Stop issuing after this many client transactions in total (0 = no cap).
        std::size_t max_transactions = 0;
        /// Inject a flush every this many client multicasts (0 = never).
        std::size_t flush_every = 0;
        /// Uniform jitter of +-fraction on each link delay, from its own stream.
        double jitter = 0.0;
        std::uint64_t jitter_seed = 0;
        ReplyPath reply = ReplyPath::Instant;
        bool record_trace = true;
    };

    struct LatencySample
    {
        MessageId id;
        std::uint32_t client = 0;
        SimTime issued = 0;
        SimTime completed = 0;
        GroupSet dst;
        std::vector<SimTime> by_rank; // ascending; k-th earliest reply minus issue
    };

    struct RunResult
    {
        Trace trace;
        std::vector<LatencySample> samples;
        std::size_t issued = 0;
        std::size_t flushes = 0;
        SimTime finished_at = 0;
        /// Largest retained history observed at any single group.
        std::size_t peak_history = 0;
        std::vector<std::size_t> final_history;
        /// Transactions still waiting for replies after the queue drained.
        std::size_t incomplete = 0;
    };

    /// Runs one closed-loop simulation to quiescence. Deterministic in its inputs.
    RunResult simulate(const Protocol &protocol, const LatencyMatrix &matrix, std::vector<ClientSpec> clients,
                       const SimConfig &cfg, const std::vector<Injection> &injections = {});
} // namespace amcast::simnet

#pragma once

#include "amcast/latency.hpp"
#include "amcast/metrics.hpp"
#include "amcast/overlay.hpp"
#include "amcast/protocol.hpp"
#include "amcast/simnet.hpp"
#include "amcast/verify.hpp"
#include "amcast/workload.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace amcast::experiment
{
    enum class ProtocolKind
    {
        FlexCast,
        Skeen,
        Hierarchical,
    };

    ProtocolKind parse_protocol(const std::string &text);
    std::string_view to_string(ProtocolKind kind) noexcept;

    /// Builds the protocol over an overlay: C-DAG rankings for FlexCast and
    /// Skeen, trees for the hierarchical protocol.
    std::unique_ptr<Protocol> make_protocol(ProtocolKind kind, const overlay::OverlaySpec &overlay);

    struct RunConfig
    {
        ProtocolKind protocol = ProtocolKind::FlexCast;
        std::string overlay = "o1";
        std::string matrix; // empty: built-in twelve-region matrix
        std::size_t clients_per_region = 10;
        double locality = 0.9;
        double duration_ms = 10'000;
        std::vector<std::uint64_t> seeds{1};
        double trim = 0.10;
        std::size_t flush_every = 1000;
        workload::Mode workload = workload::Mode::Full;
        std::string out;       // CSV path; empty: stdout
        std::string trace_out; // trace path; a ".seedN" suffix is added for several seeds
        bool verify = true;
        double jitter = 0.0;
        double client_link_ms = 1.0;
        simnet::ReplyPath reply = simnet::ReplyPath::Instant;
        std::size_t max_transactions = 0;

        /// Throws std::invalid_argument naming the offending field.
        void validate() const;
    };

    /// Sectioned key/value file; keys mirror RunConfig fields under [run].
    RunConfig parse_config(std::istream &in, RunConfig base = {});
    RunConfig load_config(const std::string &path, RunConfig base = {});

    /// Everything a single seeded run produces.
    struct RunOutcome
    {
        std::uint64_t seed = 0;
        std::string overlay_name;
        std::size_t groups = 0;
        simnet::RunResult sim;
        std::optional<verify::Verdict> verdict;
        std::vector<double> overhead;
        std::vector<metrics::CsvRow> rows; // one per destination rank 1..3

        bool ok() const { return !verdict || verdict->ok(); }
    };

    /// The resolved world: overlay, protocol and a matrix ordered like the overlay.
    struct World
    {
        overlay::OverlaySpec overlay;
        LatencyMatrix matrix;
        std::unique_ptr<Protocol> protocol;
    };
    World build_world(const RunConfig &cfg);

    /// One closed-loop gTPC-C run with `seed`.
    RunOutcome run_once(const RunConfig &cfg, std::uint64_t seed);
    RunOutcome run_once(const RunConfig &cfg, const World &world, std::uint64_t seed);

    /// Runs every seed, writes CSV (and traces), prints checker verdicts to `log`.
    /// Returns 0 iff every enabled checker passed on every seed.
    int run_experiment(const RunConfig &cfg, std::ostream &log);

    /// Hand-built executions with a known delivery order.
    struct Scenario
    {
        std::string name;
        std::string description;
        std::size_t groups = 3;
        LatencyMatrix matrix;
        std::vector<simnet::Injection> injections;
        /// group -> expected delivery order (by message label m1, m2, ...)
        std::map<GroupId, std::vector<std::string>> expected;
    };

    struct ScenarioOutcome
    {
        std::string name;
        bool passed = false;
        std::map<GroupId, std::vector<std::string>> observed;
        verify::Verdict verdict;
        Trace trace;
        std::string diff; // empty when passed
    };

    /// Label of scenario message k is "mk"; its id is (0, k).
    std::string scenario_label(const MessageId &id);
    std::vector<Scenario> flexcast_scenarios();
    ScenarioOutcome run_scenario(const Scenario &scenario);
    /// Runs every scenario; prints one line each. Returns 0 iff all pass.
    int run_scenarios(std::ostream &log);

    /// Two groups, one message to both, `link_ms` between them, 1 ms client link.
    struct LatencyStep
    {
        double first_ms = 0;
        double second_ms = 0;
    };
    LatencyStep latency_step(ProtocolKind kind, double link_ms = 100.0, double client_link_ms = 1.0);

    /// A randomised small run for property sweeps.
    struct RandomRunParams
    {
        std::size_t groups = 0;
        std::size_t messages = 0;
        std::size_t clients = 0;
        double jitter = 0;
        std::size_t flush_every = 0;
    };
    struct RandomRun
    {
        RandomRunParams params;
        simnet::RunResult sim;
        verify::Verdict verdict;
    };
    RandomRun random_run(ProtocolKind kind, std::uint64_t seed);
} // namespace amcast::experiment

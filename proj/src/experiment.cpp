#include "amcast/experiment.hpp"

#include "amcast/baselines.hpp"
#include "amcast/flexcast.hpp"
#include "amcast/presets.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <type_traits>

namespace amcast::experiment
{
    ProtocolKind parse_protocol(const std::string &text)
    {
        if (text == "flexcast")
        {
            return ProtocolKind::FlexCast;
        }
        if (text == "skeen")
        {
            return ProtocolKind::Skeen;
        }
        if (text == "hierarchical" || text == "hier")
        {
            return ProtocolKind::Hierarchical;
        }
        throw std::invalid_argument("protocol: unknown protocol '" + text + "' (expected flexcast, skeen or hierarchical)");
    }

    std::string_view to_string(ProtocolKind kind) noexcept
    {
        switch (kind)
        {
        case ProtocolKind::FlexCast:
            return "flexcast";
        case ProtocolKind::Skeen:
            return "skeen";
        default:
            return "hierarchical";
        }
    }

    std::unique_ptr<Protocol> make_protocol(ProtocolKind kind, const overlay::OverlaySpec &overlay)
    {
        if (kind == ProtocolKind::Hierarchical)
        {
            if (!overlay.is_tree())
            {
                throw std::invalid_argument("overlay: the hierarchical protocol needs a tree overlay, '" + overlay.name +
                                            "' is a C-DAG");
            }
            return std::make_unique<baselines::Hierarchical>(overlay.tree());
        }
        if (overlay.is_tree())
        {
            throw std::invalid_argument("overlay: " + std::string(to_string(kind)) + " needs a C-DAG overlay, '" +
                                        overlay.name + "' is a tree");
        }
        if (kind == ProtocolKind::FlexCast)
        {
            return std::make_unique<flexcast::FlexCast>(overlay.regions.size());
        }
        return std::make_unique<baselines::Skeen>(overlay.regions.size());
    }

    void RunConfig::validate() const
    {
        auto fail = [](const std::string &field, const std::string &why) {
            throw std::invalid_argument(field + ": " + why);
        };
        if (overlay.empty())
        {
            fail("overlay", "must name a preset or a file");
        }
        if (clients_per_region == 0)
        {
            fail("clients", "must be positive");
        }
        if (!(locality >= 0 && locality <= 1))
        {
            fail("locality", "must lie in [0,1]");
        }
        if (!(duration_ms > 0))
        {
            fail("duration", "must be positive");
        }
        if (seeds.empty())
        {
            fail("seeds", "at least one seed is required");
        }
        if (!(trim >= 0 && trim < 0.5))
        {
            fail("trim", "must lie in [0, 0.5)");
        }
        if (!(jitter >= 0 && jitter < 1))
        {
            fail("jitter", "must lie in [0, 1)");
        }
        if (!(client_link_ms >= 0))
        {
            fail("client_link", "must be non-negative");
        }
        if (!matrix.empty() && !std::ifstream(matrix))
        {
            fail("matrix", "cannot open '" + matrix + "'");
        }
    }

    namespace
    {
        std::vector<std::uint64_t> parse_seeds(const std::string &text)
        {
            std::vector<std::uint64_t> out;
            std::stringstream in(text);
            for (std::string item; std::getline(in, item, ',');)
            {
                item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
                if (item.empty())
                {
                    continue;
                }
                auto dash = item.find('-');
                try
                {
                    if (dash != std::string::npos && dash > 0)
                    {
                        const auto lo = std::stoull(item.substr(0, dash));
                        const auto hi = std::stoull(item.substr(dash + 1));
                        if (hi < lo || hi - lo > 100000)
                        {
                            throw std::invalid_argument("range");
                        }
                        for (auto s = lo; s <= hi; ++s)
                        {
                            out.push_back(s);
                        }
                    }
                    else
                    {
                        std::size_t used = 0;
                        out.push_back(std::stoull(item, &used));
                        if (used != item.size())
                        {
                            throw std::invalid_argument("trailing");
                        }
                    }
                }
                catch (const std::exception &)
                {
                    throw std::invalid_argument("seeds: malformed seed '" + item + "'");
                }
            }
            return out;
        }

        simnet::ReplyPath parse_reply(const std::string &text)
        {
            if (text == "instant")
            {
                return simnet::ReplyPath::Instant;
            }
            if (text == "network")
            {
                return simnet::ReplyPath::Network;
            }
            throw std::invalid_argument("reply: expected instant or network, got '" + text + "'");
        }

        template <typename T>
        T get_field(const boost::property_tree::ptree &run, const std::string &key, T fallback)
        {
            // get<T>(key, fallback) would also fall back on unparsable text.
            auto child = run.get_child_optional(key);
            if (!child)
            {
                return fallback;
            }
            auto value = child->get_value_optional<T>();
            const bool negative = child->data().find('-') != std::string::npos;
            if (!value || (std::is_unsigned_v<T> && negative))
            {
                throw std::invalid_argument(key + ": malformed value '" + child->data() + "'");
            }
            return *value;
        }
    }

    RunConfig parse_config(std::istream &in, RunConfig cfg)
    {
        boost::property_tree::ptree tree;
        try
        {
            boost::property_tree::ini_parser::read_ini(in, tree);
        }
        catch (const boost::property_tree::ini_parser_error &e)
        {
            throw std::invalid_argument(std::string("config: ") + e.what());
        }
        static const std::vector<std::string> known{
            "protocol", "overlay", "matrix",  "clients", "locality",    "duration",    "seed",   "seeds",
            "trim",     "flush_every", "workload", "out", "trace_out", "verify", "jitter", "client_link",
            "reply",    "max_transactions",
        };
        for (const auto &[section, body] : tree)
        {
            if (section != "run")
            {
                throw std::invalid_argument("config: unknown section [" + section + "]");
            }
            for (const auto &[key, value] : body)
            {
                if (std::find(known.begin(), known.end(), key) == known.end())
                {
                    throw std::invalid_argument(key + ": unknown configuration key");
                }
            }
        }
        const auto run = tree.get_child("run", {});
        if (auto p = run.get_optional<std::string>("protocol"))
        {
            cfg.protocol = parse_protocol(*p);
        }
        cfg.overlay = get_field(run, "overlay", cfg.overlay);
        cfg.matrix = get_field(run, "matrix", cfg.matrix);
        cfg.clients_per_region = get_field(run, "clients", cfg.clients_per_region);
        cfg.locality = get_field(run, "locality", cfg.locality);
        cfg.duration_ms = get_field(run, "duration", cfg.duration_ms);
        if (auto s = run.get_optional<std::string>("seed"))
        {
            cfg.seeds = parse_seeds(*s);
        }
        if (auto s = run.get_optional<std::string>("seeds"))
        {
            cfg.seeds = parse_seeds(*s);
        }
        cfg.trim = get_field(run, "trim", cfg.trim);
        cfg.flush_every = get_field(run, "flush_every", cfg.flush_every);
        if (auto w = run.get_optional<std::string>("workload"))
        {
            cfg.workload = workload::parse_mode(*w);
        }
        cfg.out = get_field(run, "out", cfg.out);
        cfg.trace_out = get_field(run, "trace_out", cfg.trace_out);
        cfg.verify = get_field(run, "verify", cfg.verify);
        cfg.jitter = get_field(run, "jitter", cfg.jitter);
        cfg.client_link_ms = get_field(run, "client_link", cfg.client_link_ms);
        if (auto r = run.get_optional<std::string>("reply"))
        {
            cfg.reply = parse_reply(*r);
        }
        cfg.max_transactions = get_field(run, "max_transactions", cfg.max_transactions);
        return cfg;
    }

    RunConfig load_config(const std::string &path, RunConfig base)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw std::invalid_argument("config: cannot open '" + path + "'");
        }
        return parse_config(in, std::move(base));
    }

    World build_world(const RunConfig &cfg)
    {
        cfg.validate();
        World world;
        world.overlay = presets::resolve_overlay(cfg.overlay);
        LatencyMatrix full = cfg.matrix.empty() ? presets::aws12(cfg.client_link_ms)
                                                : load_matrix(cfg.matrix, cfg.client_link_ms);
        world.matrix = full.select(world.overlay.regions);
        world.protocol = make_protocol(cfg.protocol, world.overlay);
        return world;
    }

    RunOutcome run_once(const RunConfig &cfg, std::uint64_t seed)
    {
        const World world = build_world(cfg);
        return run_once(cfg, world, seed);
    }

    RunOutcome run_once(const RunConfig &cfg, const World &world, std::uint64_t seed)
    {
        const std::size_t n = world.matrix.size();
        workload::WorkloadConfig wl;
        wl.locality = cfg.locality;
        wl.mode = cfg.workload;

        std::vector<simnet::ClientSpec> clients;
        for (GroupId home = 0; home < n; ++home)
        {
            for (std::size_t i = 0; i < cfg.clients_per_region; ++i)
            {
                const auto id = static_cast<std::uint32_t>(home * cfg.clients_per_region + i);
                auto gen = std::make_shared<workload::Generator>(wl, world.matrix, home, workload::client_seed(seed, id));
                clients.push_back(simnet::ClientSpec{id, home, [gen] { return gen->next().dst; }});
            }
        }

        simnet::SimConfig sim;
        sim.issue_until = from_ms(cfg.duration_ms);
        sim.max_transactions = cfg.max_transactions;
        sim.flush_every = cfg.flush_every;
        sim.jitter = cfg.jitter;
        sim.jitter_seed = workload::splitmix64(seed ^ 0x6A09E667F3BCC909ULL);
        sim.reply = cfg.reply;

        RunOutcome outcome;
        outcome.seed = seed;
        outcome.overlay_name = world.overlay.name;
        outcome.groups = n;
        outcome.sim = simnet::simulate(*world.protocol, world.matrix, std::move(clients), sim);
        if (cfg.verify)
        {
            outcome.verdict = verify::verify_all(outcome.sim.trace, world.protocol->genuine(),
                                                 cfg.protocol == ProtocolKind::Skeen);
        }
        outcome.overhead = verify::overheads(outcome.sim.trace, n);

        const auto trimmed = metrics::trim(outcome.sim.samples, cfg.trim);
        const double tput = metrics::throughput(trimmed);
        for (std::size_t rank = 1; rank <= 3; ++rank)
        {
            metrics::CsvRow row;
            row.protocol = std::string(world.protocol->name());
            row.overlay = world.overlay.name;
            row.locality = cfg.locality;
            row.seed = seed;
            row.rank = rank;
            const auto values = metrics::rank_latencies(trimmed, rank);
            row.samples = values.size();
            if (!values.empty())
            {
                row.latency = metrics::percentiles(trimmed, rank);
            }
            row.throughput = tput;
            row.overhead = outcome.overhead;
            outcome.rows.push_back(std::move(row));
        }
        return outcome;
    }

    int run_experiment(const RunConfig &cfg, std::ostream &log)
    {
        const World world = build_world(cfg);
        std::ofstream file;
        if (!cfg.out.empty())
        {
            file.open(cfg.out);
            if (!file)
            {
                throw std::invalid_argument("out: cannot write '" + cfg.out + "'");
            }
        }
        std::ostream &csv = cfg.out.empty() ? std::cout : file;
        csv << metrics::csv_header(world.matrix.size()) << '\n';
        int status = 0;
        for (std::uint64_t seed : cfg.seeds)
        {
            RunOutcome outcome = run_once(cfg, world, seed);
            for (const auto &row : outcome.rows)
            {
                csv << metrics::csv_line(row) << '\n';
            }
            if (!cfg.trace_out.empty())
            {
                const std::string path =
                    cfg.seeds.size() == 1 ? cfg.trace_out : cfg.trace_out + ".seed" + std::to_string(seed);
                save_trace(path, outcome.sim.trace);
            }
            log << "seed " << seed << ": " << outcome.sim.issued << " transactions, " << outcome.sim.samples.size()
                << " completed";
            if (outcome.sim.flushes)
            {
                log << ", " << outcome.sim.flushes << " flushes";
            }
            log << '\n';
            if (outcome.sim.incomplete)
            {
                log << "  " << outcome.sim.incomplete << " transaction(s) never completed\n";
                status = 1;
            }
            if (outcome.verdict)
            {
                for (const auto &line : outcome.verdict->lines())
                {
                    log << "  " << line << '\n';
                }
                if (!outcome.verdict->ok())
                {
                    status = 1;
                }
            }
        }
        return status;
    }

    std::string scenario_label(const MessageId &id)
    {
        return "m" + std::to_string(id.seq);
    }

    namespace
    {
        constexpr GroupId A = 0, B = 1, C = 2, D = 3;

        LatencyMatrix scenario_matrix(std::size_t n, std::initializer_list<std::tuple<GroupId, GroupId, double>> links)
        {
            LatencyMatrix m = LatencyMatrix::uniform(n, 10.0, 0.0);
            for (auto [from, to, ms] : links)
            {
                m.set_latency(from, to, ms);
                m.set_latency(to, from, ms);
            }
            return m;
        }

        simnet::Injection inject(double at_ms, std::uint32_t k, GroupSet dst, GroupId entry)
        {
            return simnet::Injection{from_ms(at_ms), MessageId{0, k}, dst, entry, entry};
        }
    }

    std::vector<Scenario> flexcast_scenarios()
    {
        std::vector<Scenario> out;
        out.push_back(Scenario{
            "relayed-order",
            "m1{A,C} and m2{A,B} from A, then m3{B,C} from B; A->C slow. C must deliver m1 before m3.",
            3,
            scenario_matrix(3, {{A, C, 100}, {A, B, 10}, {B, C, 10}}),
            {inject(0, 1, {A, C}, A), inject(1, 2, {A, B}, A), inject(20, 3, {B, C}, B)},
            {{C, {"m1", "m3"}}},
        });
        out.push_back(Scenario{
            "ack-after-local",
            "m1{B,C} from B with B->C slow; m2{A,B,C} from A. C must deliver m1 before m2.",
            3,
            scenario_matrix(3, {{B, C, 100}, {A, B, 10}, {A, C, 10}}),
            {inject(0, 1, {B, C}, B), inject(0, 2, {A, B, C}, A)},
            {{B, {"m1", "m2"}}, {C, {"m1", "m2"}}},
        });
        out.push_back(Scenario{
            "notif-bystander",
            "m1{B,C} from B with B->C slow; m2{A,B} then m3{A,C} from A. A notifies B; C must deliver m1 before m3.",
            3,
            scenario_matrix(3, {{B, C, 100}, {A, B, 10}, {A, C, 10}}),
            {inject(0, 1, {B, C}, B), inject(5, 2, {A, B}, A), inject(6, 3, {A, C}, A)},
            {{C, {"m1", "m3"}}},
        });
        out.push_back(Scenario{
            "ack-chain",
            "m1{C,D} from C with C->D slow; m2{A,B,C,D} from A. D must wait for C's ACK, which follows m1.",
            4,
            scenario_matrix(4, {{C, D, 100}}),
            {inject(0, 1, {C, D}, C), inject(0, 2, {A, B, C, D}, A)},
            {{C, {"m1", "m2"}}, {D, {"m1", "m2"}}},
        });
        out.push_back(Scenario{
            "notif-cascade",
            "m1{C,D} and m2{B,C}, then m3{A,B} and m4{A,D}. A notifies B, B notifies C; D must deliver m1 before m4.",
            4,
            scenario_matrix(4, {{C, D, 100}}),
            {inject(0, 1, {C, D}, C), inject(1, 2, {B, C}, B), inject(5, 3, {A, B}, A), inject(6, 4, {A, D}, A)},
            {{C, {"m1", "m2"}}, {B, {"m2", "m3"}}, {D, {"m1", "m4"}}},
        });
        return out;
    }

    ScenarioOutcome run_scenario(const Scenario &scenario)
    {
        flexcast::FlexCast protocol(scenario.groups);
        simnet::SimConfig sim;
        sim.issue_until = 0;
        auto result = simnet::simulate(protocol, scenario.matrix, {}, sim, scenario.injections);

        ScenarioOutcome outcome;
        outcome.name = scenario.name;
        for (const auto &e : result.trace)
        {
            if (e.kind == EventKind::Deliver)
            {
                outcome.observed[e.node.id].push_back(scenario_label(e.msg));
            }
        }
        outcome.verdict = verify::verify_all(result.trace, true);
        outcome.passed = outcome.verdict.ok();
        std::ostringstream diff;
        for (const auto &[g, want] : scenario.expected)
        {
            // Expected orders are stated over a subset of each group's deliveries.
            std::vector<std::string> got;
            for (const auto &label : outcome.observed[g])
            {
                if (std::find(want.begin(), want.end(), label) != want.end())
                {
                    got.push_back(label);
                }
            }
            if (got != want)
            {
                outcome.passed = false;
                diff << "group " << g << ": expected";
                for (const auto &l : want)
                {
                    diff << ' ' << l;
                }
                diff << ", observed";
                for (const auto &l : got)
                {
                    diff << ' ' << l;
                }
                diff << "; ";
            }
        }
        if (!outcome.verdict.ok())
        {
            for (const auto &line : outcome.verdict.lines())
            {
                diff << line << "; ";
            }
        }
        outcome.diff = diff.str();
        outcome.trace = std::move(result.trace);
        return outcome;
    }

    int run_scenarios(std::ostream &log)
    {
        int status = 0;
        for (const auto &scenario : flexcast_scenarios())
        {
            const auto outcome = run_scenario(scenario);
            log << (outcome.passed ? "PASS " : "FAIL ") << scenario.name << ':';
            for (const auto &[g, order] : outcome.observed)
            {
                log << " g" << g << '[';
                for (std::size_t i = 0; i < order.size(); ++i)
                {
                    log << (i ? " " : "") << order[i];
                }
                log << ']';
            }
            log << '\n';
            if (!outcome.passed)
            {
                log << "  " << outcome.diff << '\n';
                status = 1;
            }
        }
        return status;
    }

    LatencyStep latency_step(ProtocolKind kind, double link_ms, double client_link_ms)
    {
        overlay::OverlaySpec spec;
        spec.name = "pair";
        spec.regions = {"A", "B"};
        LatencyMatrix m = LatencyMatrix::uniform(2, link_ms, client_link_ms);
        std::unique_ptr<Protocol> protocol;
        if (kind == ProtocolKind::Hierarchical)
        {
            protocol = std::make_unique<baselines::Hierarchical>(overlay::TreeOverlay({std::nullopt, GroupId{0}}));
        }
        else
        {
            protocol = make_protocol(kind, spec);
        }
        simnet::SimConfig sim;
        sim.max_transactions = 1;
        std::vector<simnet::ClientSpec> clients{{0, 0, [] { return GroupSet{0, 1}; }}};
        auto result = simnet::simulate(*protocol, m, std::move(clients), sim);
        if (result.samples.size() != 1 || result.samples.front().by_rank.size() != 2)
        {
            throw std::logic_error("latency step run did not complete its single transaction");
        }
        return LatencyStep{to_ms(result.samples.front().by_rank[0]), to_ms(result.samples.front().by_rank[1])};
    }

    RandomRun random_run(ProtocolKind kind, std::uint64_t seed)
    {
        std::mt19937_64 rng(workload::splitmix64(seed * 3 + static_cast<std::uint64_t>(kind)));
        auto uniform_int = [&](std::size_t lo, std::size_t hi) {
            return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
        };
        RandomRun run;
        RandomRunParams &p = run.params;
        p.groups = uniform_int(3, 12);
        p.messages = uniform_int(50, 500);
        p.clients = uniform_int(1, 2 * p.groups);
        p.jitter = uniform_int(0, 2) == 0 ? 0.1 : 0.0;
        p.flush_every = (kind == ProtocolKind::FlexCast && uniform_int(0, 2) == 0) ? uniform_int(5, 60) : 0;

        std::vector<std::vector<double>> ms(p.groups, std::vector<double>(p.groups, 0.0));
        std::uniform_real_distribution<double> link(1.0, 300.0);
        for (auto &row : ms)
        {
            for (auto &v : row)
            {
                v = link(rng);
            }
        }
        std::vector<std::string> names;
        for (std::size_t g = 0; g < p.groups; ++g)
        {
            ms[g][g] = 0;
            names.push_back("g" + std::to_string(g));
        }
        LatencyMatrix matrix(names, ms, 1.0);

        std::unique_ptr<Protocol> protocol;
        if (kind == ProtocolKind::Hierarchical)
        {
            std::vector<GroupId> order(p.groups);
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            std::vector<std::optional<GroupId>> parent(p.groups);
            for (std::size_t i = 1; i < order.size(); ++i)
            {
                parent[order[i]] = order[uniform_int(0, i - 1)];
            }
            protocol = std::make_unique<baselines::Hierarchical>(overlay::TreeOverlay(parent));
        }
        else if (kind == ProtocolKind::FlexCast)
        {
            protocol = std::make_unique<flexcast::FlexCast>(p.groups);
        }
        else
        {
            protocol = std::make_unique<baselines::Skeen>(p.groups);
        }

        std::vector<simnet::ClientSpec> clients;
        for (std::uint32_t c = 0; c < p.clients; ++c)
        {
            const auto home = static_cast<GroupId>(uniform_int(0, p.groups - 1));
            auto crng = std::make_shared<std::mt19937_64>(workload::client_seed(seed, c));
            const std::size_t n = p.groups;
            clients.push_back(simnet::ClientSpec{c, home, [crng, n] {
                                                     const std::size_t size =
                                                         std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(3, n))(*crng);
                                                     GroupSet dst;
                                                     while (dst.size() < size)
                                                     {
                                                         dst.insert(static_cast<GroupId>(
                                                             std::uniform_int_distribution<std::size_t>(0, n - 1)(*crng)));
                                                     }
                                                     return dst;
                                                 }});
        }

        simnet::SimConfig sim;
        sim.issue_until = from_ms(1e9);
        sim.max_transactions = p.messages;
        sim.flush_every = p.flush_every;
        sim.jitter = p.jitter;
        sim.jitter_seed = workload::splitmix64(seed + 17);
        run.sim = simnet::simulate(*protocol, matrix, std::move(clients), sim);
        run.verdict = verify::verify_all(run.sim.trace, protocol->genuine(), kind == ProtocolKind::Skeen);
        return run;
    }
} // namespace amcast::experiment

// amcast_lab: run simulated atomic multicast experiments, replay hand-built
// scenarios and check recorded traces.

#include "amcast/experiment.hpp"
#include "amcast/presets.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace ex = amcast::experiment;

namespace
{
    struct RunFlags
    {
        std::string config;
        std::string protocol, overlay, matrix, workload, out, trace_out, reply;
        std::size_t clients = 0, flush_every = 0, max_transactions = 0;
        double locality = 0, duration = 0, trim = 0, jitter = 0, client_link = 0;
        std::vector<std::uint64_t> seeds;
        bool no_verify = false;
    };

    ex::RunConfig resolve(const RunFlags &f, const CLI::App &run)
    {
        ex::RunConfig cfg;
        if (const char *env = std::getenv("AMCAST_LAB_SEED"); env && *env)
        {
            try
            {
                cfg.seeds = {std::stoull(env)};
            }
            catch (const std::exception &)
            {
                throw std::invalid_argument(std::string("AMCAST_LAB_SEED: not an integer: '") + env + "'");
            }
        }
        if (!f.config.empty())
        {
            cfg = ex::load_config(f.config, cfg);
        }
        auto given = [&](const char *name) { return run.count(name) > 0; };
        if (given("--protocol"))
            cfg.protocol = ex::parse_protocol(f.protocol);
        if (given("--overlay"))
            cfg.overlay = f.overlay;
        if (given("--matrix"))
            cfg.matrix = f.matrix;
        if (given("--clients"))
            cfg.clients_per_region = f.clients;
        if (given("--locality"))
            cfg.locality = f.locality;
        if (given("--duration"))
            cfg.duration_ms = f.duration;
        if (given("--seed"))
            cfg.seeds = f.seeds;
        if (given("--trim"))
            cfg.trim = f.trim;
        if (given("--flush-every"))
            cfg.flush_every = f.flush_every;
        if (given("--workload"))
            cfg.workload = amcast::workload::parse_mode(f.workload);
        if (given("--out"))
            cfg.out = f.out;
        if (given("--trace-out"))
            cfg.trace_out = f.trace_out;
        if (given("--no-verify"))
            cfg.verify = false;
        if (given("--jitter"))
            cfg.jitter = f.jitter;
        if (given("--client-link"))
            cfg.client_link_ms = f.client_link;
        if (given("--reply"))
        {
            if (f.reply != "instant" && f.reply != "network")
                throw std::invalid_argument("reply: expected instant or network, got '" + f.reply + "'");
            cfg.reply = f.reply == "instant" ? amcast::simnet::ReplyPath::Instant : amcast::simnet::ReplyPath::Network;
        }
        if (given("--max-transactions"))
            cfg.max_transactions = f.max_transactions;
        cfg.validate();
        return cfg;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Genuine atomic multicast simulator: FlexCast, Skeen and hierarchical baselines"};
    app.require_subcommand(1);

    RunFlags f;
    auto *run = app.add_subcommand("run", "closed-loop gTPC-C experiment; CSV to --out or stdout");
    run->add_option("--config", f.config, "INI file with a [run] section; flags override it")->check(CLI::ExistingFile);
    run->add_option("--protocol", f.protocol, "flexcast | skeen | hierarchical");
    run->add_option("--overlay", f.overlay, "preset (o1 o2 t1 t2 t3) or overlay file");
    run->add_option("--matrix", f.matrix, "latency matrix CSV (default: built-in twelve regions)");
    run->add_option("--clients", f.clients, "clients per region");
    run->add_option("--locality", f.locality, "probability a transaction stays local");
    run->add_option("--duration", f.duration, "issue window in simulated ms");
    run->add_option("--seed", f.seeds, "seed(s); default $AMCAST_LAB_SEED or 1");
    run->add_option("--trim", f.trim, "fraction trimmed from each end by issue time");
    run->add_option("--flush-every", f.flush_every, "flush after this many multicasts (0 = never)");
    run->add_option("--workload", f.workload, "full | global-only");
    run->add_option("--out", f.out, "CSV output path");
    run->add_option("--trace-out", f.trace_out, "trace output path");
    run->add_flag("--no-verify", f.no_verify, "skip the trace checkers");
    run->add_option("--jitter", f.jitter, "uniform +-fraction on link delays");
    run->add_option("--client-link", f.client_link, "client to home-group delay in ms");
    run->add_option("--reply", f.reply, "instant | network");
    run->add_option("--max-transactions", f.max_transactions, "cap on issued transactions (0 = none)");

    app.add_subcommand("scenarios", "replay the hand-built FlexCast executions");

    std::string trace_path;
    bool non_genuine = false, strict_notif = false;
    auto *check = app.add_subcommand("check", "run every checker over a recorded trace");
    check->add_option("trace", trace_path, "trace file")->required()->check(CLI::ExistingFile);
    check->add_flag("--non-genuine", non_genuine, "minimality is informational");
    check->add_flag("--strict-notif", strict_notif, "NOTIFs need a multicast shared by sender and recipient");

    std::string export_dir;
    auto *overlays = app.add_subcommand("overlays", "list overlay presets");
    overlays->add_option("--write", export_dir, "write each preset and the built-in matrix into this directory")
        ->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (app.got_subcommand("run"))
        {
            return ex::run_experiment(resolve(f, *run), std::cerr);
        }
        if (app.got_subcommand("scenarios"))
        {
            return ex::run_scenarios(std::cout);
        }
        if (app.got_subcommand("overlays"))
        {
            for (const auto &name : amcast::presets::overlay_preset_names())
            {
                const auto spec = amcast::presets::overlay_preset(name);
                std::cout << name << ' ' << (spec.is_tree() ? "tree" : "cdag") << ' ' << spec.regions.size()
                          << " groups" << (spec.approximate ? " (approximate)" : "") << '\n';
                if (!export_dir.empty())
                {
                    std::ofstream out(export_dir + "/" + name + ".overlay");
                    amcast::overlay::write_overlay(out, spec);
                }
            }
            if (!export_dir.empty())
            {
                std::ofstream out(export_dir + "/aws12.csv");
                amcast::write_matrix(out, amcast::presets::aws12());
            }
            return 0;
        }
        const auto trace = amcast::load_trace(trace_path);
        auto verdict = amcast::verify::verify_all(trace, !non_genuine);
        if (strict_notif)
        {
            verdict.minimality = amcast::verify::check_minimality(trace, amcast::verify::NotifRule::Shared);
        }
        for (const auto &line : verdict.lines())
        {
            std::cout << line << '\n';
        }
        return verdict.ok() ? 0 : 1;
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "fatal: " << e.what() << '\n';
        return 3;
    }
}

// Python bindings: configure and run experiments, check traces, inspect the
// scenario suite and the statistics helpers.

#include "amcast/experiment.hpp"
#include "amcast/presets.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace amcast;
using namespace amcast::experiment;

namespace
{
    py::dict verdict_dict(const verify::Verdict &v)
    {
        py::dict d;
        d["ok"] = v.ok();
        d["safety"] = v.safety.violations;
        d["prefix_order"] = v.prefix.violations;
        d["acyclic_order"] = v.acyclic.violations;
        d["minimality"] = v.minimality.violations;
        d["notifs"] = v.minimality.notifs;
        d["notifs_without_shared_destination"] = v.minimality.notif_without_shared_dst;
        d["lines"] = v.lines();
        return d;
    }

    py::dict row_dict(const metrics::CsvRow &row)
    {
        py::dict d;
        d["rank"] = row.rank;
        d["samples"] = row.samples;
        if (row.latency)
        {
            d["p90"] = row.latency->p90;
            d["p95"] = row.latency->p95;
            d["p99"] = row.latency->p99;
        }
        else
        {
            for (const char *key : {"p90", "p95", "p99"})
            {
                d[key] = py::none();
            }
        }
        d["throughput"] = row.throughput;
        return d;
    }

    RunConfig make_config(const std::string &protocol, const std::string &overlay, std::size_t clients,
                          double locality, double duration_ms, std::size_t flush_every, const std::string &workload,
                          const std::string &matrix, double jitter, std::size_t max_transactions, bool verify)
    {
        RunConfig cfg;
        cfg.protocol = parse_protocol(protocol);
        cfg.overlay = overlay;
        cfg.clients_per_region = clients;
        cfg.locality = locality;
        cfg.duration_ms = duration_ms;
        cfg.flush_every = flush_every;
        cfg.workload = workload::parse_mode(workload);
        cfg.matrix = matrix;
        cfg.jitter = jitter;
        cfg.max_transactions = max_transactions;
        cfg.verify = verify;
        cfg.validate();
        return cfg;
    }

    py::dict run(const std::string &protocol, const std::string &overlay, std::size_t clients, double locality,
                 double duration_ms, std::uint64_t seed, std::size_t flush_every, const std::string &workload,
                 const std::string &matrix, double jitter, std::size_t max_transactions, bool verify, bool trace)
    {
        const auto cfg = make_config(protocol, overlay, clients, locality, duration_ms, flush_every, workload, matrix,
                                     jitter, max_transactions, verify);
        RunOutcome outcome;
        {
            py::gil_scoped_release release;
            outcome = run_once(cfg, seed);
        }
        py::dict d;
        d["protocol"] = std::string(to_string(cfg.protocol));
        d["overlay"] = outcome.overlay_name;
        d["groups"] = outcome.groups;
        d["seed"] = seed;
        d["issued"] = outcome.sim.issued;
        d["completed"] = outcome.sim.samples.size();
        d["incomplete"] = outcome.sim.incomplete;
        d["flushes"] = outcome.sim.flushes;
        d["peak_history_bytes"] = outcome.sim.peak_history;
        d["finished_at_ms"] = to_ms(outcome.sim.finished_at);
        d["overhead"] = outcome.overhead;
        py::list rows;
        for (const auto &row : outcome.rows)
        {
            rows.append(row_dict(row));
        }
        d["ranks"] = rows;
        d["verdict"] = outcome.verdict ? py::object(verdict_dict(*outcome.verdict)) : py::object(py::none());
        if (trace)
        {
            std::ostringstream out;
            write_trace(out, outcome.sim.trace);
            d["trace"] = out.str();
        }
        return d;
    }

    py::dict check_trace(const std::string &text, bool genuine)
    {
        std::istringstream in(text);
        const auto trace = read_trace(in);
        return verdict_dict(verify::verify_all(trace, genuine));
    }

    py::list scenarios()
    {
        py::list out;
        for (const auto &s : flexcast_scenarios())
        {
            const auto o = run_scenario(s);
            py::dict d;
            d["name"] = s.name;
            d["description"] = s.description;
            d["passed"] = o.passed;
            std::map<GroupId, std::vector<std::string>> observed(o.observed.begin(), o.observed.end());
            d["observed"] = observed;
            d["expected"] = s.expected;
            out.append(d);
        }
        return out;
    }
}

PYBIND11_MODULE(_amcast, m)
{
    m.doc() = "Genuine atomic multicast simulator: FlexCast, Skeen and a tree-ordered baseline.";

    m.def("run", &run, py::arg("protocol") = "flexcast", py::arg("overlay") = "o1", py::arg("clients") = 10,
          py::arg("locality") = 0.9, py::arg("duration_ms") = 10'000.0, py::arg("seed") = 1,
          py::arg("flush_every") = 1000, py::arg("workload") = "full", py::arg("matrix") = "", py::arg("jitter") = 0.0,
          py::arg("max_transactions") = 0, py::arg("verify") = true, py::arg("trace") = false,
          "Run one closed-loop gTPC-C simulation and return its statistics.");
    m.def("check_trace", &check_trace, py::arg("trace"), py::arg("genuine") = true,
          "Run every checker over a trace in text form.");
    m.def("scenarios", &scenarios, "Run the hand-built FlexCast executions.");
    m.def(
        "latency_step",
        [](const std::string &protocol, double link_ms, double client_link_ms) {
            const auto s = latency_step(parse_protocol(protocol), link_ms, client_link_ms);
            return std::make_pair(s.first_ms, s.second_ms);
        },
        py::arg("protocol"), py::arg("link_ms") = 100.0, py::arg("client_link_ms") = 1.0,
        "First and second reply latency for one message to two groups.");
    m.def(
        "random_run",
        [](const std::string &protocol, std::uint64_t seed) {
            const auto r = random_run(parse_protocol(protocol), seed);
            py::dict d;
            d["groups"] = r.params.groups;
            d["messages"] = r.params.messages;
            d["clients"] = r.params.clients;
            d["verdict"] = verdict_dict(r.verdict);
            return d;
        },
        py::arg("protocol"), py::arg("seed"), "One randomised run as used by the property sweep.");
    m.def("overlay_presets", &presets::overlay_preset_names);
    m.def(
        "overlay",
        [](const std::string &name) {
            const auto spec = presets::resolve_overlay(name);
            py::dict d;
            d["name"] = spec.name;
            d["regions"] = spec.regions;
            d["parent"] = spec.parent ? py::cast(*spec.parent) : py::none();
            d["approximate"] = spec.approximate;
            return d;
        },
        py::arg("name"));
    m.def("percentile", &metrics::percentile, py::arg("values"), py::arg("p"));
    m.def("scalability_factor", &metrics::scalability_factor, py::arg("mt_i"), py::arg("cf_i"), py::arg("mt_j"),
          py::arg("cf_j"));
    m.def("cascade_probabilities", &workload::cascade_probabilities, py::arg("locality"), py::arg("candidates"));

    py::register_exception<ProtocolError>(m, "ProtocolError");
}

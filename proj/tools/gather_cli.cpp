#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gather/config.hpp"
#include "gather/engine.hpp"
#include "gather/verify.hpp"

using namespace gather;

namespace {

int run_one(const ExperimentConfig& cfg, bool quiet) {
    PortLabeledGraph g = cfg.build();
    TopologyInfo topo = analyze(g);
    std::vector<NodeId> starts = cfg.explicit_starts.empty()
                                     ? random_starts(g, cfg.k, cfg.agent_seed)
                                     : cfg.explicit_starts;
    if (static_cast<int>(starts.size()) != cfg.k)
        fail(ErrorKind::ConfigError, "start list size does not match k");
    SchedulerStrategy strat(cfg.scheduler, cfg.scheduler_seed);
    strat.set_targets(cfg.target_a, cfg.target_b);
    Engine eng(g, topo, std::move(strat), starts, cfg.delta_const);
    VectorSink sink;
    long horizon = cfg.effective_horizon(topo);
    RunReport rep = eng.run_until(horizon, &sink);

    if (!cfg.trace_path.empty()) {
        std::ofstream out(cfg.trace_path);
        if (!out) fail(ErrorKind::ConfigError, "cannot write trace to " + cfg.trace_path);
        for (const TraceEvent& ev : sink.events) out << format_event(ev) << '\n';
    }

    MonitorParams mp;
    mp.k = cfg.k;
    mp.delta = cfg.delta_const;
    mp.epsilon = cfg.epsilon_const;
    mp.slack = cfg.slack;
    MonitorReport mon = monitor_run(sink.events, g, topo, mp);

    if (!quiet) {
        std::cout << "outcome " << to_string(rep.outcome) << "\n";
        std::cout << "final_round " << rep.final_round << "\n";
        std::cout << "gather_round " << rep.gather_round << "\n";
        std::cout << "max_rounds_blocked " << rep.max_rounds_blocked << "\n";
        std::cout << mon.to_text();
    }
    bool gathered = rep.outcome == RunOutcome::gathered_node ||
                    rep.outcome == RunOutcome::gathered_edge;
    return gathered && mon.all_held() ? 0 : 1;
}

int run_batch(const ExperimentConfig& cfg) {
    std::cout << "seed\toutcome\tfinal_round\tgather_round\tmax_blocked\tpebble_rounds\tmonitors\n";
    int failures = 0, gathered_count = 0;
    std::vector<long> rounds;
    for (int i = 0; i < cfg.batch; ++i) {
        ExperimentConfig item = cfg;
        item.batch = 0;
        item.trace_path.clear();
        item.gen_seed = cfg.gen_seed + static_cast<std::uint64_t>(i);
        item.agent_seed = cfg.agent_seed + static_cast<std::uint64_t>(i);
        item.scheduler_seed = cfg.scheduler_seed + static_cast<std::uint64_t>(i);
        std::ostringstream row;
        try {
            PortLabeledGraph g = item.build();
            TopologyInfo topo = analyze(g);
            std::vector<NodeId> starts = item.explicit_starts.empty()
                                             ? random_starts(g, item.k, item.agent_seed)
                                             : item.explicit_starts;
            SchedulerStrategy strat(item.scheduler, item.scheduler_seed);
            strat.set_targets(item.target_a, item.target_b);
            Engine eng(g, topo, std::move(strat), starts, item.delta_const);
            VectorSink sink;
            RunReport rep = eng.run_until(item.effective_horizon(topo), &sink);
            MonitorParams mp;
            mp.k = item.k;
            mp.delta = item.delta_const;
            mp.epsilon = item.epsilon_const;
            mp.slack = item.slack;
            MonitorReport mon = monitor_run(sink.events, g, topo, mp);
            bool gathered = rep.outcome == RunOutcome::gathered_node ||
                            rep.outcome == RunOutcome::gathered_edge;
            if (gathered) ++gathered_count;
            if (!(gathered && mon.all_held())) ++failures;
            rounds.push_back(rep.final_round);
            row << item.gen_seed << '\t' << to_string(rep.outcome) << '\t' << rep.final_round
                << '\t' << rep.gather_round << '\t' << rep.max_rounds_blocked << '\t';
            for (std::size_t p = 0; p < rep.pebble_cycle_round.size(); ++p) {
                if (p) row << ';';
                row << rep.pebble_cycle_round[p];
            }
            row << '\t' << (mon.all_held() ? "held" : "violated");
        } catch (const SimError& e) {
            ++failures;
            row << item.gen_seed << "\terror\t-\t-\t-\t-\t" << e.what();
        }
        std::cout << row.str() << "\n";
    }
    if (!rounds.empty()) {
        std::vector<long> sorted = rounds;
        std::sort(sorted.begin(), sorted.end());
        std::cout << "# gathered " << gathered_count << "/" << cfg.batch << " max_round "
                  << sorted.back() << " median_round " << sorted[sorted.size() / 2] << "\n";
    } else {
        std::cout << "# gathered 0/0\n";
    }
    return failures == 0 ? 0 : 1;
}

int run_verify(const ExperimentConfig& cfg, const std::string& trace_path) {
    PortLabeledGraph g = cfg.build();
    TopologyInfo topo = analyze(g);
    std::vector<TraceEvent> events = load_trace_file(trace_path);
    int k = 0;
    for (const TraceEvent& ev : events)
        if (ev.kind == TraceEventKind::spawn) k = std::max(k, ev.agent + 1);
    if (k == 0) fail(ErrorKind::MalformedTrace, "trace has no spawn events");
    MonitorParams mp;
    mp.k = k;
    mp.delta = cfg.delta_const;
    mp.epsilon = cfg.epsilon_const;
    mp.slack = cfg.slack;
    MonitorReport mon = monitor_run(events, g, topo, mp);
    std::cout << mon.to_text();
    return mon.all_held() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synchronous-round simulator for anonymous-agent weak gathering on "
                 "dynamic unicyclic graphs"};
    ExperimentConfig cfg;

    std::string graph_file, gen_unicyclic_arg, gen_bicyclic_arg, targets_arg, starts_arg;
    std::string verify_path, config_path, save_graph, scheduler_name = "always_full";
    bool dump_config = false, quiet = false;

    app.add_option("--graph", graph_file, "graph fixture file (n m header, u v pu pv lines)");
    app.add_option("--gen-unicyclic", gen_unicyclic_arg, "generate unicyclic graph: n,cycle_len");
    app.add_option("--gen-bicyclic", gen_bicyclic_arg,
                   "generate two-cycle graph: c1,c2,path,variant");
    app.add_option("--gen-seed", cfg.gen_seed, "generator seed");
    app.add_option("--k", cfg.k, "number of agents");
    app.add_option("--agent-seed", cfg.agent_seed, "start placement seed");
    app.add_option("--starts", starts_arg, "explicit start nodes, comma separated");
    app.add_option("--scheduler", scheduler_name, "always_full | random_single_removal | "
                   "unicyclic_separator | bicyclic_separator | greedy_blocker | "
                   "permanent_single_block");
    app.add_option("--scheduler-seed", cfg.scheduler_seed, "scheduler seed");
    app.add_option("--targets", targets_arg, "designated agents for separator strategies: a,b");
    app.add_option("--delta", cfg.delta_const, "blocked-termination constant");
    app.add_option("--epsilon", cfg.epsilon_const, "candidate-cycle length constant");
    app.add_option("--slack", cfg.slack, "bound-check slack multiplier");
    app.add_option("--horizon", cfg.horizon, "round limit (0: twice the pebble bound)");
    app.add_option("--trace", cfg.trace_path, "write the trace to this file");
    app.add_option("--batch", cfg.batch, "run this many seeded instances");
    app.add_option("--verify", verify_path, "re-check a stored trace instead of running");
    app.add_option("--config", config_path, "load a key=value config file");
    app.add_option("--save-graph", save_graph, "write the graph fixture and exit");
    app.add_flag("--dump-config", dump_config, "print the effective config and exit");
    app.add_flag("--quiet", quiet, "suppress the per-run report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) fail(ErrorKind::ConfigError, "cannot open config " + config_path);
            std::stringstream buf;
            buf << in.rdbuf();
            ExperimentConfig loaded = ExperimentConfig::parse(buf.str());
            // Flags given on the command line override the file below.
            cfg = loaded;
        }
        if (!graph_file.empty()) {
            cfg.source = ExperimentConfig::GraphSource::fixture;
            cfg.fixture_path = graph_file;
        }
        if (!gen_unicyclic_arg.empty()) {
            cfg.source = ExperimentConfig::GraphSource::gen_unicyclic;
            std::istringstream ss(gen_unicyclic_arg);
            char comma;
            if (!(ss >> cfg.gen_n >> comma >> cfg.gen_cycle))
                fail(ErrorKind::ConfigError, "--gen-unicyclic wants n,cycle_len");
        }
        if (!gen_bicyclic_arg.empty()) {
            cfg.source = ExperimentConfig::GraphSource::gen_bicyclic;
            std::istringstream ss(gen_bicyclic_arg);
            std::string tok;
            std::vector<std::string> parts;
            while (std::getline(ss, tok, ',')) parts.push_back(tok);
            if (parts.size() != 4)
                fail(ErrorKind::ConfigError, "--gen-bicyclic wants c1,c2,path,variant");
            cfg.bicyclic.cycle1 = std::stoi(parts[0]);
            cfg.bicyclic.cycle2 = std::stoi(parts[1]);
            cfg.bicyclic.path_len = std::stoi(parts[2]);
            std::string cfg_line = "bic_variant=" + parts[3] + "\n";
            cfg.bicyclic.variant = ExperimentConfig::parse(cfg_line).bicyclic.variant;
        }
        if (!targets_arg.empty()) {
            auto comma = targets_arg.find(',');
            if (comma == std::string::npos) fail(ErrorKind::ConfigError, "--targets wants a,b");
            cfg.target_a = std::stoi(targets_arg.substr(0, comma));
            cfg.target_b = std::stoi(targets_arg.substr(comma + 1));
        }
        if (!starts_arg.empty()) {
            cfg.explicit_starts.clear();
            std::istringstream ss(starts_arg);
            std::string tok;
            while (std::getline(ss, tok, ','))
                cfg.explicit_starts.push_back(std::stoi(tok));
        }
        cfg.scheduler = scheduler_kind_from(scheduler_name);

        if (dump_config) {
            std::cout << cfg.serialize();
            return 0;
        }
        if (!save_graph.empty()) {
            PortLabeledGraph g = cfg.build();
            std::ofstream out(save_graph);
            if (!out) fail(ErrorKind::ConfigError, "cannot write " + save_graph);
            gather::save_graph(g, out);
            return 0;
        }
        if (!verify_path.empty()) return run_verify(cfg, verify_path);
        if (cfg.batch > 0) return run_batch(cfg);
        return run_one(cfg, quiet);
    } catch (const SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::ConfigError:
            case ErrorKind::MalformedTrace:
            case ErrorKind::BadParameters:
            case ErrorKind::DisconnectedInput:
            case ErrorKind::DuplicateEdge:
            case ErrorKind::SelfLoop:
            case ErrorKind::BadPortAssignment:
                return 2;
            default:
                return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

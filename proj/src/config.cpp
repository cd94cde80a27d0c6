#include "gather/config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "gather/verify.hpp"

namespace gather {

namespace {

const char* variant_name(BicyclicSpec::Variant v) {
    switch (v) {
        case BicyclicSpec::Variant::disjoint: return "disjoint";
        case BicyclicSpec::Variant::shared_vertex: return "shared_vertex";
        case BicyclicSpec::Variant::shared_edge: return "shared_edge";
    }
    return "?";
}

BicyclicSpec::Variant variant_from(const std::string& s) {
    if (s == "disjoint") return BicyclicSpec::Variant::disjoint;
    if (s == "shared_vertex") return BicyclicSpec::Variant::shared_vertex;
    if (s == "shared_edge") return BicyclicSpec::Variant::shared_edge;
    fail(ErrorKind::ConfigError, "unknown bicyclic variant '" + s + "'");
}

const char* source_name(ExperimentConfig::GraphSource s) {
    switch (s) {
        case ExperimentConfig::GraphSource::gen_unicyclic: return "gen_unicyclic";
        case ExperimentConfig::GraphSource::gen_bicyclic: return "gen_bicyclic";
        case ExperimentConfig::GraphSource::fixture: return "fixture";
    }
    return "?";
}

}  // namespace

std::string ExperimentConfig::serialize() const {
    std::ostringstream os;
    os << "graph=" << source_name(source) << "\n";
    os << "gen_n=" << gen_n << "\n";
    os << "gen_cycle=" << gen_cycle << "\n";
    os << "gen_seed=" << gen_seed << "\n";
    os << "bic_cycle1=" << bicyclic.cycle1 << "\n";
    os << "bic_cycle2=" << bicyclic.cycle2 << "\n";
    os << "bic_path=" << bicyclic.path_len << "\n";
    os << "bic_variant=" << variant_name(bicyclic.variant) << "\n";
    os << "fixture_path=" << fixture_path << "\n";
    os << "k=" << k << "\n";
    os << "agent_seed=" << agent_seed << "\n";
    os << "starts=";
    for (std::size_t i = 0; i < explicit_starts.size(); ++i) {
        if (i) os << ',';
        os << explicit_starts[i];
    }
    os << "\n";
    os << "scheduler=" << to_string(scheduler) << "\n";
    os << "scheduler_seed=" << scheduler_seed << "\n";
    os << "targets=" << target_a << ',' << target_b << "\n";
    os << "delta=" << delta_const << "\n";
    os << "epsilon=" << epsilon_const << "\n";
    os << "slack=" << slack << "\n";
    os << "horizon=" << horizon << "\n";
    os << "trace=" << trace_path << "\n";
    os << "batch=" << batch << "\n";
    return os.str();
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    auto want_long = [](const std::string& v, const std::string& key) -> long {
        try {
            return std::stol(v);
        } catch (...) {
            fail(ErrorKind::ConfigError, "bad integer for " + key + ": '" + v + "'");
        }
    };
    auto want_u64 = [](const std::string& v, const std::string& key) -> std::uint64_t {
        try {
            return std::stoull(v);
        } catch (...) {
            fail(ErrorKind::ConfigError, "bad integer for " + key + ": '" + v + "'");
        }
    };
    auto want_double = [](const std::string& v, const std::string& key) -> double {
        try {
            return std::stod(v);
        } catch (...) {
            fail(ErrorKind::ConfigError, "bad number for " + key + ": '" + v + "'");
        }
    };
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::ConfigError, "expected key=value, got '" + line + "'");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        if (key == "graph") {
            if (val == "gen_unicyclic")
                cfg.source = GraphSource::gen_unicyclic;
            else if (val == "gen_bicyclic")
                cfg.source = GraphSource::gen_bicyclic;
            else if (val == "fixture")
                cfg.source = GraphSource::fixture;
            else
                fail(ErrorKind::ConfigError, "unknown graph source '" + val + "'");
        } else if (key == "gen_n") {
            cfg.gen_n = static_cast<int>(want_long(val, key));
        } else if (key == "gen_cycle") {
            cfg.gen_cycle = static_cast<int>(want_long(val, key));
        } else if (key == "gen_seed") {
            cfg.gen_seed = want_u64(val, key);
        } else if (key == "bic_cycle1") {
            cfg.bicyclic.cycle1 = static_cast<int>(want_long(val, key));
        } else if (key == "bic_cycle2") {
            cfg.bicyclic.cycle2 = static_cast<int>(want_long(val, key));
        } else if (key == "bic_path") {
            cfg.bicyclic.path_len = static_cast<int>(want_long(val, key));
        } else if (key == "bic_variant") {
            cfg.bicyclic.variant = variant_from(val);
        } else if (key == "fixture_path") {
            cfg.fixture_path = val;
        } else if (key == "k") {
            cfg.k = static_cast<int>(want_long(val, key));
        } else if (key == "agent_seed") {
            cfg.agent_seed = want_u64(val, key);
        } else if (key == "starts") {
            cfg.explicit_starts.clear();
            std::istringstream ss(val);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) cfg.explicit_starts.push_back(static_cast<NodeId>(want_long(tok, key)));
        } else if (key == "scheduler") {
            cfg.scheduler = scheduler_kind_from(val);
        } else if (key == "scheduler_seed") {
            cfg.scheduler_seed = want_u64(val, key);
        } else if (key == "targets") {
            auto comma = val.find(',');
            if (comma == std::string::npos) fail(ErrorKind::ConfigError, "targets wants a,b");
            cfg.target_a = static_cast<int>(want_long(val.substr(0, comma), key));
            cfg.target_b = static_cast<int>(want_long(val.substr(comma + 1), key));
        } else if (key == "delta") {
            cfg.delta_const = want_double(val, key);
        } else if (key == "epsilon") {
            cfg.epsilon_const = want_double(val, key);
        } else if (key == "slack") {
            cfg.slack = want_double(val, key);
        } else if (key == "horizon") {
            cfg.horizon = want_long(val, key);
        } else if (key == "trace") {
            cfg.trace_path = val;
        } else if (key == "batch") {
            cfg.batch = static_cast<int>(want_long(val, key));
        } else {
            fail(ErrorKind::ConfigError, "unknown config key '" + key + "'");
        }
    }
    return cfg;
}

PortLabeledGraph ExperimentConfig::build() const {
    switch (source) {
        case GraphSource::gen_unicyclic:
            return generate_unicyclic(gen_n, gen_cycle, gen_seed);
        case GraphSource::gen_bicyclic:
            return generate_multicyclic(gen_n, bicyclic, gen_seed);
        case GraphSource::fixture:
            return load_graph_file(fixture_path);
    }
    fail(ErrorKind::ConfigError, "bad graph source");
}

long ExperimentConfig::effective_horizon(const TopologyInfo& topo) const {
    if (horizon > 0) return horizon;
    int cycle_len = 3;
    if (!topo.cycles.empty()) {
        cycle_len = topo.cycle_size(0);
        for (std::size_t i = 1; i < topo.cycles.size(); ++i)
            cycle_len = std::min(cycle_len, topo.cycle_size(i));
    }
    int n = static_cast<int>(topo.on_cycle.size());
    double bound = eq2_pebble_bound(n, cycle_len, n, delta_const, epsilon_const);
    return static_cast<long>(std::ceil(2.0 * bound));
}

}  // namespace gather

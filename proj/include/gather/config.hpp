#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gather/graph.hpp"
#include "gather/scheduler.hpp"

namespace gather {

// Everything a run needs, serializable as key=value text with a stable key
// order so identical configs produce identical bytes.
struct ExperimentConfig {
    enum class GraphSource { gen_unicyclic, gen_bicyclic, fixture } source =
        GraphSource::gen_unicyclic;
    int gen_n = 8;
    int gen_cycle = 4;
    std::uint64_t gen_seed = 1;
    BicyclicSpec bicyclic;
    std::string fixture_path;

    int k = 2;
    std::uint64_t agent_seed = 1;
    std::vector<NodeId> explicit_starts;  // overrides agent_seed when nonempty

    SchedulerKind scheduler = SchedulerKind::always_full;
    std::uint64_t scheduler_seed = 1;
    int target_a = 0, target_b = 1;

    double delta_const = 4.0;
    double epsilon_const = 2.0;
    double slack = 1.0;
    long horizon = 0;  // 0: derive from the pebble bound

    std::string trace_path;
    int batch = 0;

    std::string serialize() const;
    static ExperimentConfig parse(const std::string& text);  // throws ConfigError

    PortLabeledGraph build() const;
    long effective_horizon(const TopologyInfo& topo) const;
};

}  // namespace gather

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gather/engine.hpp"
#include "gather/graph.hpp"
#include "gather/trace.hpp"

namespace gather {

// Closed-form round bounds.  eq1 bounds the number of complete cycle tours
// until the deepest epoch; eq2 bounds the rounds until a pebble reaches the
// cycle under worst-case blocking.
double eq1_tour_bound(int tree_size, int cycle_len);
double eq2_pebble_bound(int n, int cycle_len, int tree_size, double delta, double epsilon);
double traversal_bound(int n, double delta);

enum class BoundFormula { pebble_bound, traversal_bound };

struct BoundParams {
    int cycle_len = 3;
    int tree_size = 0;  // 0 means "use n"
    double delta = 4.0;
    double epsilon = 2.0;
};

bool check_round_bound(int n, long measured, BoundFormula formula, double slack,
                       const BoundParams& params);

// ---------------------------------------------------------------------------

struct MonitorResult {
    std::string name;
    bool held = true;
    long first_violation_round = -1;
    std::string detail;
};

struct MonitorReport {
    std::vector<MonitorResult> results;
    long all_pebbles_cycle_round = -1;
    std::vector<long> pebble_cycle_round;
    std::vector<long> phase2_round;
    std::vector<long> election_rounds;
    std::vector<NodeId> elected_nodes;
    long final_round = 0;
    bool all_terminated = false;
    bool weak_gathered = false;

    bool all_held() const;
    std::string to_text() const;
};

struct MonitorParams {
    int k = 2;
    double delta = 4.0;
    double epsilon = 2.0;
    double slack = 1.0;
};

// Replays a trace against ground truth and evaluates every invariant the
// analysis promises.  Throws MalformedTrace on inconsistent input.
MonitorReport monitor_run(const std::vector<TraceEvent>& trace, const PortLabeledGraph& g,
                          const TopologyInfo& topo, const MonitorParams& params);

// ---------------------------------------------------------------------------

enum class ImpossibilityFamily { unicyclic_gathering, multicyclic_weak };

struct ImpossibilityOutcome {
    bool predicate_ever_held = false;   // strict (family 1) or weak (family 2)
    bool targets_ever_met = false;      // same or adjacent nodes, family 2
    long rounds = 0;
    RunOutcome outcome = RunOutcome::horizon_exhausted;
};

ImpossibilityOutcome impossibility_experiment(ImpossibilityFamily family, int n,
                                              std::uint64_t seed, long horizon,
                                              double delta_const = 4.0);

}  // namespace gather

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gather/agent.hpp"
#include "gather/graph.hpp"
#include "gather/scheduler.hpp"
#include "gather/trace.hpp"
#include "gather/world.hpp"

namespace gather {

enum class RunOutcome : std::uint8_t {
    gathered_node,
    gathered_edge,
    terminated_ungathered,
    horizon_exhausted,
};

const char* to_string(RunOutcome o);

struct RunReport {
    RunOutcome outcome = RunOutcome::horizon_exhausted;
    long final_round = 0;
    bool weak_gathered = false;
    std::vector<long> pebble_cycle_round;  // per agent, -1 if never reached
    std::vector<long> phase2_round;        // per agent, -1 if never entered
    std::vector<long> election_rounds;
    std::vector<NodeId> elected_nodes;     // ground-truth node per election
    long max_rounds_blocked = 0;
    long gather_round = -1;  // first round the weak predicate held
};

// One simulation instance: graph, scheduler, k agents.  Strictly
// single-threaded and deterministic.
class Engine {
public:
    Engine(const PortLabeledGraph& g, const TopologyInfo& topo, SchedulerStrategy strategy,
           const std::vector<NodeId>& starts, double delta_const);

    // Runs one synchronous round; emits events to sink if non-null.
    void run_round(TraceSink* sink);

    struct Hooks {
        std::function<bool(const Engine&)> stop;  // checked after each round
    };
    RunReport run_until(long horizon, TraceSink* sink = nullptr, const Hooks* hooks = nullptr);

    const WorldState& world() const { return world_; }
    const AgentMemory& memory(int agent) const { return mems_[agent]; }
    SchedulerStrategy& strategy() { return strategy_; }
    NodeId pebble_node(int agent) const { return pebble1_node_[agent]; }
    const RunReport& report() const { return report_; }

    Observation build_observation(int agent) const;

private:
    void emit_round(TraceSink* sink, const std::vector<TraceEvent>& events);

    const PortLabeledGraph& graph_;
    const TopologyInfo& topo_;
    SchedulerStrategy strategy_;
    WorldState world_;
    std::vector<AgentMemory> mems_;
    std::vector<NodeId> pebble1_node_;     // ground-truth spot of each first pebble
    std::vector<bool> pebble1_carried_;
    std::vector<bool> pebble1_placed_;
    std::vector<long> pick_round_;         // round of the last tentative pick
    std::vector<long> blocked_streak_;
    RunReport report_;
    bool initialized_ = false;
    std::vector<Action> pending_;  // actions chosen at round start
};

// All agents on one node, or on the two endpoints of one edge.
bool weak_gathering_achieved(const WorldState& world, const PortLabeledGraph& g);
bool strict_gathering_achieved(const WorldState& world);

// Seeded distinct start nodes.
std::vector<NodeId> random_starts(const PortLabeledGraph& g, int k, std::uint64_t seed);

}  // namespace gather

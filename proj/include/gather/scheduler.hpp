#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gather/graph.hpp"
#include "gather/rng.hpp"
#include "gather/world.hpp"

namespace gather {

enum class SchedulerKind : std::uint8_t {
    always_full,
    random_single_removal,
    unicyclic_separator,
    bicyclic_separator,
    greedy_blocker,
    permanent_single_block,
};

const char* to_string(SchedulerKind k);
SchedulerKind scheduler_kind_from(const std::string& name);

// Owns the adversary's private state.  The adversary is adaptive and sees the
// full world plus every agent's intended edge for the round; agents are
// deterministic, so this is the strongest online scheduler.
class SchedulerStrategy {
public:
    SchedulerStrategy(SchedulerKind kind, std::uint64_t seed)
        : kind_(kind), rng_(seed) {}

    SchedulerKind kind() const { return kind_; }
    void set_targets(int a, int b) { target_a_ = a; target_b_ = b; }

    // permanent_single_block: waits until every placed pebble sits on the
    // cycle (plus warmup rounds), then disables one cycle edge forever.
    void set_block_delay(long warmup) { warmup_ = warmup; }
    void set_block_edge(EdgeId e) { forced_edge_ = e; }
    long trigger_round() const { return trigger_round_; }
    EdgeId blocked_edge() const { return block_edge_; }

    // intents[i] is the edge agent i would traverse this round (kNoEdge when
    // it stays, places or is terminated).
    EdgeMask next_mask(const PortLabeledGraph& g, const TopologyInfo& topo,
                       const WorldState& world, const std::vector<EdgeId>& intents);

private:
    SchedulerKind kind_;
    Rng rng_;
    int target_a_ = 0, target_b_ = 1;
    long warmup_ = 0;
    EdgeId forced_edge_ = kNoEdge;
    long trigger_round_ = -1;
    EdgeId block_edge_ = kNoEdge;
};

// True iff every mask in the sequence keeps the graph connected.
bool validate_mask_stream(const PortLabeledGraph& g, const std::vector<EdgeMask>& masks);

}  // namespace gather

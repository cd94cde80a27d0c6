#include "gather/scheduler.hpp"

#include <algorithm>

namespace gather {

const char* to_string(SchedulerKind k) {
    switch (k) {
        case SchedulerKind::always_full: return "always_full";
        case SchedulerKind::random_single_removal: return "random_single_removal";
        case SchedulerKind::unicyclic_separator: return "unicyclic_separator";
        case SchedulerKind::bicyclic_separator: return "bicyclic_separator";
        case SchedulerKind::greedy_blocker: return "greedy_blocker";
        case SchedulerKind::permanent_single_block: return "permanent_single_block";
    }
    return "?";
}

SchedulerKind scheduler_kind_from(const std::string& name) {
    for (int i = 0; i <= static_cast<int>(SchedulerKind::permanent_single_block); ++i) {
        auto k = static_cast<SchedulerKind>(i);
        if (name == to_string(k)) return k;
    }
    fail(ErrorKind::ConfigError, "unknown scheduler '" + name + "'");
}

namespace {

std::vector<bool> cycle_edge_set(const PortLabeledGraph& g, const TopologyInfo& topo) {
    std::vector<bool> cyc(g.edge_count(), false);
    for (const auto& ce : topo.cycle_edges)
        for (EdgeId e : ce) cyc[e] = true;
    return cyc;
}

}  // namespace

EdgeMask SchedulerStrategy::next_mask(const PortLabeledGraph& g, const TopologyInfo& topo,
                                      const WorldState& world,
                                      const std::vector<EdgeId>& intents) {
    EdgeMask mask = EdgeMask::full(g);
    switch (kind_) {
        case SchedulerKind::always_full:
            return mask;

        case SchedulerKind::random_single_removal: {
            auto cyc = cycle_edge_set(g, topo);
            std::vector<EdgeId> removable;
            for (EdgeId e = 0; e < g.edge_count(); ++e)
                if (cyc[e]) removable.push_back(e);
            if (!removable.empty() && rng_.chance(1, 2)) {
                EdgeId pick = removable[rng_.next_below(removable.size())];
                mask.set(pick, false);
            }
            return mask;
        }

        case SchedulerKind::greedy_blocker: {
            auto cyc = cycle_edge_set(g, topo);
            std::vector<int> want(g.edge_count(), 0);
            for (EdgeId e : intents)
                if (e != kNoEdge) ++want[e];
            EdgeId best = kNoEdge;
            for (EdgeId e = 0; e < g.edge_count(); ++e) {
                if (!cyc[e] || want[e] == 0) continue;
                if (best == kNoEdge || want[e] > want[best]) best = e;  // ties: lowest id
            }
            if (best != kNoEdge) mask.set(best, false);
            return mask;
        }

        case SchedulerKind::unicyclic_separator: {
            if (topo.kind != GraphKind::unicyclic)
                fail(ErrorKind::InvalidStrategyForTopology,
                     "unicyclic_separator needs a unicyclic graph");
            auto cyc = cycle_edge_set(g, topo);
            const int a = target_a_, b = target_b_;
            auto next_of = [&](int t) -> NodeId {
                EdgeId e = intents[t];
                if (e == kNoEdge) return world.agent_pos[t];
                return g.other_end(e, world.agent_pos[t]);
            };
            const NodeId pa = world.agent_pos[a], pb = world.agent_pos[b];
            const NodeId na = next_of(a), nb = next_of(b);
            auto bad = [&](NodeId x, NodeId y) {
                return x == y || topo.anchor[x] == topo.anchor[y];
            };
            if (!bad(na, nb)) return mask;
            auto can_block = [&](int t) {
                return intents[t] != kNoEdge && cyc[intents[t]];
            };
            // Blocking one cycle edge restores separation; prefer the one
            // that provably fixes the round.
            if (can_block(a) && !bad(pa, nb)) {
                mask.set(intents[a], false);
            } else if (can_block(b) && !bad(na, pb)) {
                mask.set(intents[b], false);
            } else if (can_block(a) && intents[a] == intents[b]) {
                mask.set(intents[a], false);
            } else if (can_block(a)) {
                mask.set(intents[a], false);
            } else if (can_block(b)) {
                mask.set(intents[b], false);
            }
            return mask;
        }

        case SchedulerKind::bicyclic_separator: {
            if (topo.kind != GraphKind::multicyclic || topo.cycles.size() != 2 ||
                topo.partition.empty())
                fail(ErrorKind::InvalidStrategyForTopology,
                     "bicyclic_separator needs a two-cycle graph with an L/M/R partition");
            std::vector<std::vector<bool>> per_cycle(2);
            for (int c = 0; c < 2; ++c) {
                per_cycle[c].assign(g.edge_count(), false);
                for (EdgeId e : topo.cycle_edges[c]) per_cycle[c][e] = true;
            }
            bool removed_in[2] = {false, false};
            for (int t : {target_a_, target_b_}) {
                EdgeId e = intents[t];
                if (e == kNoEdge) continue;
                NodeId from = world.agent_pos[t];
                NodeId to = g.other_end(e, from);
                if (topo.partition[to] == topo.partition[from]) continue;
                // Keep the agent inside its partition: its exits are cycle
                // edges of its own side, one removal per cycle per round.
                for (int c = 0; c < 2; ++c) {
                    if (per_cycle[c][e] && !per_cycle[1 - c][e] && !removed_in[c]) {
                        mask.set(e, false);
                        removed_in[c] = true;
                        break;
                    }
                }
            }
            return mask;
        }

        case SchedulerKind::permanent_single_block: {
            if (trigger_round_ < 0) {
                int placed_total = 0, placed_on_cycle = 0;
                for (NodeId v = 0; v < g.node_count(); ++v) {
                    placed_total += world.pebbles_at[v];
                    if (topo.on_cycle[v]) placed_on_cycle += world.pebbles_at[v];
                }
                if (placed_total == world.k() && placed_on_cycle == world.k())
                    trigger_round_ = world.round + warmup_;
            }
            if (trigger_round_ >= 0 && world.round >= trigger_round_) {
                if (block_edge_ == kNoEdge) {
                    block_edge_ = forced_edge_ != kNoEdge
                                      ? forced_edge_
                                      : *std::min_element(topo.cycle_edges[0].begin(),
                                                          topo.cycle_edges[0].end());
                }
                mask.set(block_edge_, false);
            }
            return mask;
        }
    }
    return mask;
}

bool validate_mask_stream(const PortLabeledGraph& g, const std::vector<EdgeMask>& masks) {
    for (const EdgeMask& m : masks)
        if (!is_connected(g, m)) return false;
    return true;
}

}  // namespace gather

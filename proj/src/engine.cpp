#include "gather/engine.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace gather {

const char* to_string(RunOutcome o) {
    switch (o) {
        case RunOutcome::gathered_node: return "gathered_node";
        case RunOutcome::gathered_edge: return "gathered_edge";
        case RunOutcome::terminated_ungathered: return "terminated_ungathered";
        case RunOutcome::horizon_exhausted: return "horizon_exhausted";
    }
    return "?";
}

bool weak_gathering_achieved(const WorldState& world, const PortLabeledGraph& g) {
    std::set<NodeId> nodes(world.agent_pos.begin(), world.agent_pos.end());
    if (nodes.size() == 1) return true;
    if (nodes.size() != 2) return false;
    NodeId u = *nodes.begin(), v = *std::next(nodes.begin());
    for (Port p = 0; p < g.degree(u); ++p)
        if (g.link(u, p).to == v) return true;
    return false;
}

bool strict_gathering_achieved(const WorldState& world) {
    std::set<NodeId> nodes(world.agent_pos.begin(), world.agent_pos.end());
    return nodes.size() == 1;
}

std::vector<NodeId> random_starts(const PortLabeledGraph& g, int k, std::uint64_t seed) {
    if (k > g.node_count()) fail(ErrorKind::BadParameters, "more agents than nodes");
    std::vector<NodeId> all(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v) all[v] = v;
    Rng rng(seed);
    rng.shuffle(all);
    return std::vector<NodeId>(all.begin(), all.begin() + k);
}

Engine::Engine(const PortLabeledGraph& g, const TopologyInfo& topo, SchedulerStrategy strategy,
               const std::vector<NodeId>& starts, double delta_const)
    : graph_(g), topo_(topo), strategy_(std::move(strategy)),
      world_(WorldState::create(g, starts)) {
    const int k = world_.k();
    if (k < 2) fail(ErrorKind::BadParameters, "need at least two agents");
    mems_.reserve(k);
    pending_.assign(k, Action{});
    pebble1_node_.assign(k, kNoNode);
    pebble1_carried_.assign(k, false);
    pebble1_placed_.assign(k, false);
    pick_round_.assign(k, -1);
    blocked_streak_.assign(k, 0);
    report_.pebble_cycle_round.assign(k, -1);
    report_.phase2_round.assign(k, -1);
    for (int i = 0; i < k; ++i) {
        Observation obs = build_observation(i);
        auto [mem, act] = initialize(k, g.node_count(), delta_const, obs);
        mems_.push_back(std::move(mem));
        pending_[i] = act;
    }
}

Observation Engine::build_observation(int agent) const {
    Observation obs;
    NodeId pos = world_.agent_pos[agent];
    obs.degree = graph_.degree(pos);
    obs.arrival_port = world_.arrival_port[agent];
    obs.agent_count = world_.agents_at(pos);
    obs.pebble_count = world_.pebbles_at[pos];
    obs.blocked_last_round = world_.blocked_flag[agent];
    obs.crossed_last_round = world_.crossed_flag[agent];
    obs.prev_agent_count =
        world_.last_node[agent] == pos ? world_.last_count[agent] : -1;
    return obs;
}

namespace {

int action_code(const Action& a) { return static_cast<int>(a.kind); }

// Walks `offset` steps around the ground-truth cycle from `start`, leaving
// through `first_port`.  Returns -2 when the walk leaves the cycle.
NodeId resolve_cycle_walk(const PortLabeledGraph& g, const TopologyInfo& topo, NodeId start,
                          int offset, Port first_port) {
    if (offset == 0) return start;
    if (!topo.on_cycle[start] || first_port < 0 || first_port >= g.degree(start)) return -2;
    std::vector<bool> cyc_edge(g.edge_count(), false);
    for (const auto& ce : topo.cycle_edges)
        for (EdgeId e : ce) cyc_edge[e] = true;
    NodeId prev = start;
    NodeId cur = g.link(start, first_port).to;
    for (int i = 1; i < offset; ++i) {
        if (!topo.on_cycle[cur]) return -2;
        NodeId next = kNoNode;
        for (Port p = 0; p < g.degree(cur); ++p) {
            const PortLink& l = g.link(cur, p);
            if (l.to != prev && cyc_edge[l.edge]) {
                next = l.to;
                break;
            }
        }
        if (next == kNoNode) return -2;
        prev = cur;
        cur = next;
    }
    return topo.on_cycle[cur] ? cur : -2;
}

}  // namespace

void Engine::run_round(TraceSink* sink) {
    const int k = world_.k();
    std::vector<TraceEvent> events;
    auto push = [&](TraceEvent ev) {
        ev.round = world_.round;
        events.push_back(std::move(ev));
    };

    if (!initialized_) {
        initialized_ = true;
        for (int i = 0; i < k; ++i) {
            TraceEvent ev;
            ev.agent = i;
            ev.kind = TraceEventKind::spawn;
            ev.a = world_.agent_pos[i];
            push(ev);
        }
    } else {
        // Observations snapshot the pre-move world; actions are the agents'
        // deterministic responses, which the scheduler may inspect.
        std::vector<Observation> obs(k);
        std::vector<std::vector<Milestone>> notes(k);
        for (int i = 0; i < k; ++i) {
            if (world_.agent_terminated[i]) {
                pending_[i] = Action{ActionKind::stay, kNoPort};
                continue;
            }
            obs[i] = build_observation(i);
            StepResult r = step_inplace(mems_[i], obs[i]);
            pending_[i] = r.action;
            notes[i] = std::move(r.notes);
        }
        for (int i = 0; i < k; ++i) {
            if (world_.agent_terminated[i]) continue;
            TraceEvent ev;
            ev.agent = i;
            ev.kind = TraceEventKind::observe;
            ev.a = obs[i].degree;
            ev.b = obs[i].arrival_port;
            ev.c = obs[i].agent_count;
            ev.d = obs[i].pebble_count;
            ev.e = (obs[i].blocked_last_round ? 1 : 0) | (obs[i].crossed_last_round ? 2 : 0);
            ev.f = obs[i].prev_agent_count;
            push(ev);
        }
        for (int i = 0; i < k; ++i) {
            if (world_.agent_terminated[i]) continue;
            TraceEvent ev;
            ev.agent = i;
            ev.kind = TraceEventKind::act;
            ev.a = action_code(pending_[i]);
            ev.b = pending_[i].port;
            push(ev);
        }
        // Stash milestone events; they are resolved after movement below.
        for (int i = 0; i < k; ++i) {
            for (const Milestone& m : notes[i]) {
                TraceEvent ev;
                ev.agent = i;
                ev.kind = TraceEventKind::milestone;
                ev.a = static_cast<int>(m.kind);
                ev.b = m.offset;
                ev.c = m.first_port;
                ev.d = -1;
                if (m.kind == MilestoneKind::election) {
                    ev.d = resolve_cycle_walk(graph_, topo_, world_.agent_pos[i], m.offset,
                                              m.first_port);
                    report_.election_rounds.push_back(world_.round);
                    report_.elected_nodes.push_back(ev.d);
                }
                if (m.kind == MilestoneKind::phase2_entered &&
                    report_.phase2_round[i] < 0)
                    report_.phase2_round[i] = world_.round;
                if (m.kind == MilestoneKind::terminated)
                    ev.f = static_cast<int>(m.cause);
                push(ev);
            }
        }
    }

    // Scheduler: sees world and intents, must keep the snapshot connected.
    std::vector<EdgeId> intents(k, kNoEdge);
    for (int i = 0; i < k; ++i) {
        const Action& a = pending_[i];
        if (world_.agent_terminated[i]) continue;
        if (a.kind == ActionKind::move || a.kind == ActionKind::move_carrying) {
            NodeId pos = world_.agent_pos[i];
            if (a.port < 0 || a.port >= graph_.degree(pos))
                fail(ErrorKind::IllegalPort, "agent " + std::to_string(i) + " chose port " +
                                                 std::to_string(a.port));
            intents[i] = graph_.link(pos, a.port).edge;
        }
    }
    EdgeMask mask = strategy_.next_mask(graph_, topo_, world_, intents);
    if (!is_connected(graph_, mask))
        fail(ErrorKind::ProtocolInvariantViolation, "scheduler emitted a disconnected mask");
    {
        TraceEvent ev;
        ev.agent = -1;
        ev.kind = TraceEventKind::mask;
        ev.edges = mask.removed();
        push(ev);
    }

    // A pick last round that is not being placed now was a marker retrieval,
    // not a pebble migration: the first pebble never left its node.
    for (int i = 0; i < k; ++i) {
        if (pebble1_carried_[i] && pick_round_[i] == world_.round - 1 &&
            !world_.agent_terminated[i] && pending_[i].kind != ActionKind::place_pebble)
            pebble1_carried_[i] = false;
    }

    // Resolution: simultaneous movement, then cross detection, then pebbles.
    std::vector<NodeId> old_pos = world_.agent_pos;
    std::vector<int> pre_count(k);
    for (int i = 0; i < k; ++i) pre_count[i] = world_.agents_at(old_pos[i]);
    std::vector<bool> moved(k, false);

    for (int i = 0; i < k; ++i) {
        world_.blocked_flag[i] = false;
        world_.crossed_flag[i] = false;
        if (world_.agent_terminated[i]) continue;
        const Action& a = pending_[i];
        if (a.kind != ActionKind::move && a.kind != ActionKind::move_carrying) continue;
        EdgeId e = intents[i];
        if (!mask.enabled(e)) {
            world_.blocked_flag[i] = true;
            blocked_streak_[i] += 1;
            report_.max_rounds_blocked = std::max(report_.max_rounds_blocked, blocked_streak_[i]);
            TraceEvent ev;
            ev.agent = i;
            ev.kind = TraceEventKind::blocked;
            ev.a = old_pos[i];
            ev.b = a.port;
            ev.c = e;
            push(ev);
            continue;
        }
        blocked_streak_[i] = 0;
        moved[i] = true;
        if (a.kind == ActionKind::move_carrying) {
            if (world_.pebbles_at[old_pos[i]] < 1)
                fail(ErrorKind::PebbleMissing,
                     "agent " + std::to_string(i) + " picked a pebble from an empty node");
            world_.pebbles_at[old_pos[i]] -= 1;
            world_.carried[i] += 1;
            // Tentatively the agent lifted its own first pebble; a pick that
            // is not followed by a placement was a marker retrieval instead.
            if (pebble1_node_[i] == old_pos[i] && pebble1_placed_[i] && !pebble1_carried_[i]) {
                pebble1_carried_[i] = true;
                pick_round_[i] = world_.round;
            }
            TraceEvent ev;
            ev.agent = i;
            ev.kind = TraceEventKind::pebble_picked;
            ev.a = old_pos[i];
            ev.b = world_.pebbles_at[old_pos[i]];
            push(ev);
        }
        const PortLink& l = graph_.link(old_pos[i], a.port);
        world_.agent_pos[i] = l.to;
        world_.arrival_port[i] = l.reverse;
        TraceEvent ev;
        ev.agent = i;
        ev.kind = TraceEventKind::moved;
        ev.a = old_pos[i];
        ev.b = l.to;
        ev.c = a.port;
        ev.d = l.reverse;
        push(ev);
    }

    // Cross detection: opposite directions over one enabled edge.
    std::map<EdgeId, std::pair<std::vector<int>, std::vector<int>>> by_edge;
    for (int i = 0; i < k; ++i) {
        if (!moved[i]) continue;
        EdgeId e = intents[i];
        const Edge& ed = graph_.edge(e);
        if (old_pos[i] == ed.u)
            by_edge[e].first.push_back(i);
        else
            by_edge[e].second.push_back(i);
    }
    for (auto& [e, dirs] : by_edge) {
        if (dirs.first.empty() || dirs.second.empty()) continue;
        std::vector<int> all;
        all.insert(all.end(), dirs.first.begin(), dirs.first.end());
        all.insert(all.end(), dirs.second.begin(), dirs.second.end());
        std::sort(all.begin(), all.end());
        for (int i : all) {
            world_.crossed_flag[i] = true;
            TraceEvent ev;
            ev.agent = i;
            ev.kind = TraceEventKind::crossed;
            ev.a = e;
            push(ev);
        }
    }

    // Pebble placement happens after movement resolution.
    for (int i = 0; i < k; ++i) {
        if (world_.agent_terminated[i]) continue;
        const Action& a = pending_[i];
        NodeId pos = world_.agent_pos[i];
        if (a.kind == ActionKind::place_pebble ||
            a.kind == ActionKind::place_second_and_terminate) {
            if (world_.carried[i] < 1)
                fail(ErrorKind::PebbleBudgetExceeded,
                     "agent " + std::to_string(i) + " placed more pebbles than it owns");
            world_.carried[i] -= 1;
            world_.pebbles_at[pos] += 1;
            int index;
            if (a.kind == ActionKind::place_second_and_terminate) {
                index = 2;
            } else if (pebble1_carried_[i] || !pebble1_placed_[i]) {
                index = 1;
                pebble1_node_[i] = pos;
                pebble1_carried_[i] = false;
                pebble1_placed_[i] = true;
            } else {
                index = 3;  // verification marker, the parked second pebble
            }
            TraceEvent ev;
            ev.agent = i;
            ev.kind = TraceEventKind::pebble_placed;
            ev.a = pos;
            ev.b = index;
            ev.c = world_.pebbles_at[pos];
            push(ev);
        }
        if (a.kind == ActionKind::terminate ||
            a.kind == ActionKind::place_second_and_terminate) {
            world_.agent_terminated[i] = true;
            TraceEvent ev;
            ev.agent = i;
            ev.kind = TraceEventKind::terminated;
            ev.a = pos;
            push(ev);
        }
    }

    // Pebble budget conservation.
    long total = 0;
    for (int c : world_.carried) total += c;
    for (int p : world_.pebbles_at) total += p;
    if (total != 2L * k)
        fail(ErrorKind::ProtocolInvariantViolation, "pebble budget violated");

    // Ground-truth milestones.
    for (int i = 0; i < k; ++i) {
        if (report_.pebble_cycle_round[i] >= 0) continue;
        if (pebble1_placed_[i] && !pebble1_carried_[i] &&
            topo_.dist_to_cycle[pebble1_node_[i]] == 0)
            report_.pebble_cycle_round[i] = world_.round;
    }
    if (report_.gather_round < 0 && weak_gathering_achieved(world_, graph_))
        report_.gather_round = world_.round;

    // prev_agent_count bookkeeping for the next observation.
    for (int i = 0; i < k; ++i) {
        if (moved[i]) {
            world_.last_node[i] = kNoNode;
            world_.last_count[i] = -1;
        } else {
            world_.last_node[i] = old_pos[i];
            world_.last_count[i] = pre_count[i];
        }
    }

    emit_round(sink, events);
    world_.round += 1;
}

void Engine::emit_round(TraceSink* sink, const std::vector<TraceEvent>& events) {
    if (!sink) return;
    // Canonical order: spawn, mask, observe*, act*, resolution*, milestones.
    auto rank = [](const TraceEvent& ev) {
        switch (ev.kind) {
            case TraceEventKind::spawn: return 0;
            case TraceEventKind::mask: return 1;
            case TraceEventKind::observe: return 2;
            case TraceEventKind::act: return 3;
            case TraceEventKind::moved:
            case TraceEventKind::blocked: return 4;
            case TraceEventKind::crossed: return 5;
            case TraceEventKind::pebble_picked: return 6;
            case TraceEventKind::pebble_placed: return 7;
            case TraceEventKind::terminated: return 8;
            case TraceEventKind::milestone: return 9;
        }
        return 10;
    };
    std::vector<const TraceEvent*> sorted;
    sorted.reserve(events.size());
    for (const auto& ev : events) sorted.push_back(&ev);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [&](const TraceEvent* x, const TraceEvent* y) {
                         if (rank(*x) != rank(*y)) return rank(*x) < rank(*y);
                         return x->agent < y->agent;
                     });
    for (const TraceEvent* ev : sorted) sink->emit(*ev);
}

RunReport Engine::run_until(long horizon, TraceSink* sink, const Hooks* hooks) {
    if (horizon < 1) fail(ErrorKind::BadParameters, "horizon must be at least 1");
    while (true) {
        if (world_.all_terminated()) {
            bool weak = weak_gathering_achieved(world_, graph_);
            report_.weak_gathered = weak;
            if (!weak)
                report_.outcome = RunOutcome::terminated_ungathered;
            else
                report_.outcome = strict_gathering_achieved(world_)
                                      ? RunOutcome::gathered_node
                                      : RunOutcome::gathered_edge;
            break;
        }
        if (world_.round >= horizon) {
            report_.outcome = RunOutcome::horizon_exhausted;
            report_.weak_gathered = weak_gathering_achieved(world_, graph_);
            break;
        }
        run_round(sink);
        if (hooks && hooks->stop && hooks->stop(*this)) {
            report_.outcome = RunOutcome::horizon_exhausted;
            report_.weak_gathered = weak_gathering_achieved(world_, graph_);
            break;
        }
    }
    report_.final_round = world_.round;
    return report_;
}

}  // namespace gather

#include "gather/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace gather {

namespace {

int ceil_log2(long x) {
    int e = 0;
    long v = 1;
    while (v < x) {
        v <<= 1;
        ++e;
    }
    return e;
}

}  // namespace

double eq1_tour_bound(int tree_size, int cycle_len) {
    if (tree_size < 2) return 1.0 / cycle_len;
    int e = ceil_log2(tree_size - 1);
    double num = std::pow(2.0, e + 1) - 1.0;
    return num / cycle_len;
}

double eq2_pebble_bound(int n, int cycle_len, int tree_size, double delta, double epsilon) {
    double tours = eq1_tour_bound(tree_size, cycle_len);
    double per_tour = (2.0 * cycle_len + 2.0 * epsilon * n) *
                          (delta * n * std::log2(static_cast<double>(n)) - 1.0) +
                      2.0 * (n - cycle_len);
    return tours * per_tour;
}

double traversal_bound(int n, double delta) {
    return delta * n * std::log2(static_cast<double>(n)) + 3.0 * n;
}

bool check_round_bound(int n, long measured, BoundFormula formula, double slack,
                       const BoundParams& params) {
    if (n < 3) fail(ErrorKind::BadParameters, "n must be at least 3");
    if (measured <= 0) return true;
    int gu = params.tree_size > 0 ? params.tree_size : n;
    double bound = formula == BoundFormula::pebble_bound
                       ? eq2_pebble_bound(n, params.cycle_len, gu, params.delta, params.epsilon)
                       : traversal_bound(n, params.delta);
    return static_cast<double>(measured) <= slack * bound;
}

// ---------------------------------------------------------------------------

bool MonitorReport::all_held() const {
    for (const auto& r : results)
        if (!r.held) return false;
    return true;
}

std::string MonitorReport::to_text() const {
    std::ostringstream os;
    os << "monitor report\n";
    os << "  final_round " << final_round << "\n";
    os << "  all_terminated " << (all_terminated ? 1 : 0) << "\n";
    os << "  weak_gathered " << (weak_gathered ? 1 : 0) << "\n";
    os << "  all_pebbles_on_cycle_round " << all_pebbles_cycle_round << "\n";
    for (const auto& r : results) {
        os << "  " << r.name << ' ' << (r.held ? "held" : "VIOLATED");
        if (!r.held) os << " round " << r.first_violation_round << " (" << r.detail << ")";
        os << "\n";
    }
    return os.str();
}

namespace {

struct Violation {
    bool hit = false;
    long round = -1;
    std::string detail;
    void record(long r, const std::string& d) {
        if (hit) return;
        hit = true;
        round = r;
        detail = d;
    }
};

struct AgentTimeline {
    std::vector<std::pair<long, NodeId>> pos_changes;  // (round, node)
    NodeId at(long round) const {
        NodeId out = kNoNode;
        for (const auto& [r, v] : pos_changes) {
            if (r > round) break;
            out = v;
        }
        return out;
    }
};

}  // namespace

MonitorReport monitor_run(const std::vector<TraceEvent>& trace, const PortLabeledGraph& g,
                          const TopologyInfo& topo, const MonitorParams& params) {
    MonitorReport report;
    const int k = params.k;
    const int n = g.node_count();

    std::vector<NodeId> pos(k, kNoNode);
    std::vector<bool> terminated(k, false);
    std::vector<int> carried(k, 2);
    std::vector<int> pebbles(g.node_count(), 0);
    std::vector<NodeId> pebble1(k, kNoNode);
    std::vector<int> last_pebble1_dist(k, -1);
    std::vector<long> phase2_round(k, -1);
    std::vector<long> pebble_cycle(k, -1);
    std::vector<bool> verify_active(k, false);
    std::vector<std::vector<NodeId>> verify_buf(k);
    std::vector<AgentTimeline> timelines(k);
    struct ElectionRec {
        long round;
        int agent;
        NodeId node;
    };
    std::vector<ElectionRec> elections;
    struct GatherRec {
        long round;
        int agent;
        NodeId u;
    };
    std::vector<GatherRec> gatherings;

    Violation v_mask, v_move, v_budget, v_lemma1, v_confine, v_verify;
    EdgeMask mask = EdgeMask::full(g);
    long cur_round = -1;

    auto check_agent = [&](int a) {
        if (a < 0 || a >= k) fail(ErrorKind::MalformedTrace, "agent id out of range");
    };

    for (const TraceEvent& ev : trace) {
        if (ev.round < cur_round) fail(ErrorKind::MalformedTrace, "rounds out of order");
        cur_round = ev.round;
        switch (ev.kind) {
            case TraceEventKind::spawn: {
                check_agent(ev.agent);
                pos[ev.agent] = ev.a;
                timelines[ev.agent].pos_changes.push_back({ev.round, ev.a});
                break;
            }
            case TraceEventKind::mask: {
                mask = EdgeMask::full(g);
                for (EdgeId e : ev.edges) {
                    if (e < 0 || e >= g.edge_count())
                        fail(ErrorKind::MalformedTrace, "mask removes unknown edge");
                    mask.set(e, false);
                }
                if (!is_connected(g, mask))
                    v_mask.record(ev.round, "snapshot disconnected");
                break;
            }
            case TraceEventKind::moved: {
                check_agent(ev.agent);
                if (terminated[ev.agent])
                    v_move.record(ev.round, "terminated agent moved");
                if (pos[ev.agent] != ev.a)
                    v_move.record(ev.round, "move origin mismatch");
                if (ev.c < 0 || ev.c >= g.degree(ev.a)) {
                    v_move.record(ev.round, "illegal departure port");
                } else {
                    const PortLink& l = g.link(ev.a, ev.c);
                    if (l.to != ev.b) v_move.record(ev.round, "move does not follow port");
                    if (!mask.enabled(l.edge))
                        v_move.record(ev.round, "moved over a disabled edge");
                }
                pos[ev.agent] = ev.b;
                timelines[ev.agent].pos_changes.push_back({ev.round, ev.b});
                if (phase2_round[ev.agent] >= 0 && !topo.on_cycle[ev.b])
                    v_confine.record(ev.round, "phase-2 agent left the cycle");
                if (verify_active[ev.agent]) verify_buf[ev.agent].push_back(ev.b);
                break;
            }
            case TraceEventKind::pebble_picked: {
                check_agent(ev.agent);
                if (ev.a < 0 || ev.a >= g.node_count() || pebbles[ev.a] < 1)
                    fail(ErrorKind::MalformedTrace, "pick from empty node");
                pebbles[ev.a] -= 1;
                carried[ev.agent] += 1;
                break;
            }
            case TraceEventKind::pebble_placed: {
                check_agent(ev.agent);
                if (carried[ev.agent] < 1)
                    fail(ErrorKind::MalformedTrace, "placed a pebble it does not carry");
                carried[ev.agent] -= 1;
                pebbles[ev.a] += 1;
                if (ev.b == 1) {
                    int d = topo.dist_to_cycle[ev.a];
                    if (last_pebble1_dist[ev.agent] >= 0 && d > last_pebble1_dist[ev.agent])
                        v_lemma1.record(ev.round, "pebble distance to the cycle increased");
                    last_pebble1_dist[ev.agent] = d;
                    pebble1[ev.agent] = ev.a;
                    if (pebble_cycle[ev.agent] < 0 && d == 0) pebble_cycle[ev.agent] = ev.round;
                }
                break;
            }
            case TraceEventKind::terminated: {
                check_agent(ev.agent);
                terminated[ev.agent] = true;
                break;
            }
            case TraceEventKind::milestone: {
                check_agent(ev.agent);
                auto kind = static_cast<MilestoneKind>(ev.a);
                switch (kind) {
                    case MilestoneKind::verify_started:
                        verify_active[ev.agent] = true;
                        verify_buf[ev.agent].clear();
                        break;
                    case MilestoneKind::verify_failed:
                        verify_active[ev.agent] = false;
                        verify_buf[ev.agent].clear();
                        break;
                    case MilestoneKind::phase2_entered: {
                        if (phase2_round[ev.agent] < 0) phase2_round[ev.agent] = ev.round;
                        // Criterion: a confirmed walk visited only cycle nodes.
                        for (NodeId nvis : verify_buf[ev.agent])
                            if (!topo.on_cycle[nvis])
                                v_verify.record(ev.round, "confirmed walk left the cycle");
                        if (!topo.on_cycle[pos[ev.agent]])
                            v_confine.record(ev.round, "entered phase 2 off the cycle");
                        if (pebble1[ev.agent] != kNoNode &&
                            topo.dist_to_cycle[pebble1[ev.agent]] != 0)
                            v_verify.record(ev.round, "confirmed with own pebble off the cycle");
                        verify_active[ev.agent] = false;
                        verify_buf[ev.agent].clear();
                        break;
                    }
                    case MilestoneKind::election:
                        elections.push_back({ev.round, ev.agent, ev.d});
                        break;
                    case MilestoneKind::gathering_started: {
                        NodeId u = -2;
                        for (auto it = elections.rbegin(); it != elections.rend(); ++it)
                            if (it->agent == ev.agent) {
                                u = it->node;
                                break;
                            }
                        gatherings.push_back({ev.round, ev.agent, u});
                        break;
                    }
                    default:
                        break;
                }
                break;
            }
            default:
                break;
        }
        // Budget check after each event batch is cheap enough per event.
        long total = 0;
        for (int c : carried) total += c;
        for (int p : pebbles) total += p;
        if (total != 2L * k) v_budget.record(ev.round, "pebble budget violated");
    }

    report.final_round = cur_round;
    report.pebble_cycle_round = pebble_cycle;
    report.phase2_round = phase2_round;
    for (const auto& e : elections) {
        report.election_rounds.push_back(e.round);
        report.elected_nodes.push_back(e.node);
    }

    long all_peb = -1;
    for (int i = 0; i < k; ++i) {
        if (pebble_cycle[i] < 0) {
            all_peb = -1;
            break;
        }
        all_peb = std::max(all_peb, pebble_cycle[i]);
    }
    report.all_pebbles_cycle_round = all_peb;

    report.all_terminated = true;
    for (bool t : terminated)
        if (!t) report.all_terminated = false;

    // Final configuration.
    {
        std::set<NodeId> where(pos.begin(), pos.end());
        bool weak = where.size() == 1;
        if (where.size() == 2) {
            NodeId a = *where.begin(), b = *std::next(where.begin());
            for (Port p = 0; p < g.degree(a); ++p)
                if (g.link(a, p).to == b) weak = true;
        }
        report.weak_gathered = weak;
    }

    Violation v_final;
    if (report.all_terminated) {
        if (!report.weak_gathered) v_final.record(cur_round, "terminated without weak gathering");
        bool any_phase2 = false;
        for (long r : phase2_round)
            if (r >= 0) any_phase2 = true;
        if (any_phase2)
            for (int i = 0; i < k; ++i)
                if (!topo.on_cycle[pos[i]])
                    v_final.record(cur_round, "final node off the cycle");
    }

    // Election agreement after all pebbles settled on the cycle.
    Violation v_elect;
    if (all_peb >= 0) {
        NodeId agreed = kNoNode;
        for (const auto& e : elections) {
            if (e.round < all_peb) continue;
            if (e.node < 0) {
                v_elect.record(e.round, "election did not resolve to a cycle node");
                continue;
            }
            if (agreed == kNoNode)
                agreed = e.node;
            else if (agreed != e.node)
                v_elect.record(e.round, "agents elected different nodes");
        }
    }

    // Two-group structure per gathering cohort, checked at start + 2n.
    Violation v_group;
    {
        std::vector<GatherRec> sorted = gatherings;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const GatherRec& a, const GatherRec& b) { return a.round < b.round; });
        std::size_t i = 0;
        while (i < sorted.size()) {
            long start = sorted[i].round;
            std::vector<GatherRec> cohort;
            while (i < sorted.size() && sorted[i].round < start + n) cohort.push_back(sorted[i++]);
            long check_round = start + 2L * n;
            if (check_round > cur_round) continue;  // run ended first
            std::set<NodeId> spots;
            bool off_cycle = false;
            for (const auto& m : cohort) {
                NodeId where = timelines[m.agent].at(check_round);
                spots.insert(where);
                if (where >= 0 && !topo.on_cycle[where]) off_cycle = true;
            }
            if (spots.size() > 2) {
                v_group.record(check_round, "cohort spread over more than two nodes");
            } else if (off_cycle) {
                v_group.record(check_round, "cohort occupies a non-cycle node");
            } else if (spots.size() == 2) {
                NodeId u = cohort.front().u;
                bool same_u = true;
                for (const auto& m : cohort)
                    if (m.u != u) same_u = false;
                if (same_u && u >= 0 && !spots.count(u))
                    v_group.record(check_round, "neither cohort group sits at the elected node");
            }
        }
    }

    // Pebble arrival bound, instantiated with |G_u| = n.
    Violation v_bound;
    if (topo.kind == GraphKind::unicyclic) {
        BoundParams bp;
        bp.cycle_len = topo.cycle_size(0);
        bp.delta = params.delta;
        bp.epsilon = params.epsilon;
        for (int i = 0; i < k; ++i)
            if (pebble_cycle[i] >= 0 &&
                !check_round_bound(n, pebble_cycle[i], BoundFormula::pebble_bound, params.slack, bp))
                v_bound.record(pebble_cycle[i], "pebble reached the cycle after the bound");
    }

    auto add = [&](const std::string& name, const Violation& v) {
        report.results.push_back(MonitorResult{name, !v.hit, v.round, v.detail});
    };
    add("mask_connectivity", v_mask);
    add("movement_legality", v_move);
    add("pebble_conservation", v_budget);
    add("pebble_distance_monotone", v_lemma1);
    add("phase2_on_cycle", v_confine);
    add("verification_soundness", v_verify);
    add("election_agreement", v_elect);
    add("two_group_structure", v_group);
    add("pebble_arrival_bound", v_bound);
    add("final_configuration", v_final);
    return report;
}

// ---------------------------------------------------------------------------

ImpossibilityOutcome impossibility_experiment(ImpossibilityFamily family, int n,
                                              std::uint64_t seed, long horizon,
                                              double delta_const) {
    ImpossibilityOutcome out;
    if (family == ImpossibilityFamily::unicyclic_gathering) {
        // Cycle longer than 3, agents starting in different trees.
        std::uint64_t s = seed;
        for (;;) {
            int max_cycle = n - 2;
            if (max_cycle < 4) fail(ErrorKind::BadParameters, "need n >= 6");
            int cycle_len = 4 + static_cast<int>(s % (max_cycle - 3));
            PortLabeledGraph g = generate_unicyclic(n, cycle_len, s);
            TopologyInfo topo = analyze(g);
            NodeId a = kNoNode, b = kNoNode;
            for (NodeId v = 0; v < n && b == kNoNode; ++v) {
                if (topo.dist_to_cycle[v] == 0) continue;
                if (a == kNoNode)
                    a = v;
                else if (topo.anchor[v] != topo.anchor[a])
                    b = v;
            }
            if (b == kNoNode) {
                s += 1000003;  // graph lacked two separate trees; try the next seed
                continue;
            }
            SchedulerStrategy strat(SchedulerKind::unicyclic_separator, s);
            strat.set_targets(0, 1);
            Engine eng(g, topo, std::move(strat), {a, b}, delta_const);
            Engine::Hooks hooks;
            bool met = false;
            hooks.stop = [&](const Engine& e) {
                if (e.world().agent_pos[0] == e.world().agent_pos[1]) met = true;
                return false;
            };
            RunReport rep = eng.run_until(horizon, nullptr, &hooks);
            out.predicate_ever_held = met;
            out.rounds = rep.final_round;
            out.outcome = rep.outcome;
            return out;
        }
    }

    // multicyclic_weak
    BicyclicSpec spec;
    int variant = static_cast<int>(seed % 3);
    spec.variant = variant == 0   ? BicyclicSpec::Variant::disjoint
                   : variant == 1 ? BicyclicSpec::Variant::shared_vertex
                                  : BicyclicSpec::Variant::shared_edge;
    spec.cycle1 = 3 + static_cast<int>(seed % 3);
    spec.cycle2 = 3 + static_cast<int>((seed / 3) % 3);
    spec.path_len = spec.variant == BicyclicSpec::Variant::shared_vertex
                        ? 0
                        : 1 + static_cast<int>((seed / 9) % 2);
    if (spec.variant == BicyclicSpec::Variant::shared_edge) {
        spec.cycle1 = std::max(spec.cycle1, spec.path_len + 2);
        spec.cycle2 = std::max(spec.cycle2, spec.path_len + 2);
    }
    PortLabeledGraph g = generate_multicyclic(n, spec, seed);
    TopologyInfo topo = analyze(g);
    NodeId a = kNoNode, b = kNoNode;
    for (NodeId v = 0; v < n; ++v) {
        if (topo.partition[v] == 2 && a == kNoNode) a = v;
        if (topo.partition[v] == 0 && b == kNoNode) b = v;
    }
    if (a == kNoNode || b == kNoNode)
        fail(ErrorKind::BadParameters, "bicyclic instance lacks L or R nodes");
    SchedulerStrategy strat(SchedulerKind::bicyclic_separator, seed);
    strat.set_targets(0, 1);
    Engine eng(g, topo, std::move(strat), {a, b}, delta_const);
    Engine::Hooks hooks;
    bool weak_ever = false, met_ever = false;
    hooks.stop = [&](const Engine& e) {
        const WorldState& w = e.world();
        if (weak_gathering_achieved(w, g)) weak_ever = true;
        NodeId pa = w.agent_pos[0], pb = w.agent_pos[1];
        if (pa == pb) met_ever = true;
        for (Port p = 0; p < g.degree(pa); ++p)
            if (g.link(pa, p).to == pb) met_ever = true;
        return false;
    };
    RunReport rep = eng.run_until(horizon, nullptr, &hooks);
    out.predicate_ever_held = weak_ever;
    out.targets_ever_met = met_ever;
    out.rounds = rep.final_round;
    out.outcome = rep.outcome;
    return out;
}

}  // namespace gather

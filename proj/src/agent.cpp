#include "gather/agent.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace gather {

namespace {
long depth_limit(int epoch) { return epoch >= 60 ? (1L << 60) : (1L << epoch); }
}  // namespace

long blocked_threshold_for(int n, double delta_const) {
    return static_cast<long>(std::ceil(delta_const * n * std::log2(static_cast<double>(n))));
}

// ---------------------------------------------------------------------------
// LocalMap

RecId LocalMap::add_record(int degree) {
    MapRecord r;
    r.degree = degree;
    r.first_slot = static_cast<int>(slots.size());
    slots.resize(slots.size() + degree);
    recs.push_back(r);
    return static_cast<RecId>(recs.size() - 1);
}

void LocalMap::link(RecId a, Port pa, RecId b, Port pb) {
    slot(a, pa) = MapSlot{b, pb};
    slot(b, pb) = MapSlot{a, pa};
}

int CandidateCycle::pebble_total() const {
    int t = 0;
    for (const auto& s : steps) t += s.pebbles;
    return t;
}

// ---------------------------------------------------------------------------
// Election: lexicographically minimal rotation over both orientations of the
// ((arrival, departure), pebbles) word.  Forward tuples read the cycle as
// built; backward tuples swap the port roles.

namespace {

struct Tuple4 {
    int a, b, c, d;
    bool operator<(const Tuple4& o) const {
        if (a != o.a) return a < o.a;
        if (b != o.b) return b < o.b;
        if (c != o.c) return c < o.c;
        return d < o.d;
    }
    bool operator==(const Tuple4& o) const {
        return a == o.a && b == o.b && c == o.c && d == o.d;
    }
};

// Ports first, then the node degree (observable, and it breaks mirror ties
// between nodes with different tree loads), pebbles last.
Tuple4 word_at(const CandidateCycle& cyc, int pos, int orient) {
    const CandidateStep& s = cyc.steps[pos];
    if (orient > 0) return Tuple4{s.arr, s.dep, s.degree, s.pebbles};
    return Tuple4{s.dep, s.arr, s.degree, s.pebbles};
}

// Compare full rotations lazily: -1 if (s1,o1) < (s2,o2).
int compare_rotation(const CandidateCycle& cyc, int s1, int o1, int s2, int o2) {
    const int L = cyc.length();
    for (int j = 0; j < L; ++j) {
        int p1 = ((s1 + o1 * j) % L + L) % L;
        int p2 = ((s2 + o2 * j) % L + L) % L;
        Tuple4 t1 = word_at(cyc, p1, o1);
        Tuple4 t2 = word_at(cyc, p2, o2);
        if (t1 < t2) return -1;
        if (t2 < t1) return 1;
    }
    return 0;
}

}  // namespace

std::optional<int> elect_meeting_node(const CandidateCycle& cyc, int k) {
    if (cyc.pebble_total() != k)
        fail(ErrorKind::BadCandidate, "candidate cycle carries " +
                                          std::to_string(cyc.pebble_total()) + " pebbles, expected " +
                                          std::to_string(k));
    const int L = cyc.length();
    int best_s = 0, best_o = 1;
    std::vector<std::pair<int, int>> winners{{0, 1}};
    for (int o : {1, -1}) {
        for (int s = 0; s < L; ++s) {
            if (o == 1 && s == 0) continue;
            int c = compare_rotation(cyc, s, o, best_s, best_o);
            if (c < 0) {
                best_s = s;
                best_o = o;
                winners.assign(1, {s, o});
            } else if (c == 0) {
                winners.push_back({s, o});
            }
        }
    }
    for (const auto& [s, o] : winners)
        if (s != winners.front().first) return std::nullopt;
    return winners.front().first;
}

int candidate_clockwise(const CandidateCycle& cyc, int u_pos) {
    const CandidateStep& s = cyc.steps[u_pos];
    Port p1 = std::min(s.arr, s.dep);
    return s.dep == p1 ? +1 : -1;
}

// ---------------------------------------------------------------------------
// Phase 1 helpers

namespace {

bool port_allowed(const AgentMemory& mem, RecId rec, Port p, Port parent_port) {
    if (p == parent_port) return true;
    const MapSlot& s = mem.map.slot(rec, p);
    if (s.to == kNoRec) return true;
    return !mem.map.recs[s.to].not_cycle;
}

Port parent_port_of(const AgentMemory& mem) {
    return mem.stack.empty() ? kNoPort : mem.stack.back().to_parent;
}

void strike_all(AgentMemory& mem) {
    for (auto& r : mem.map.recs)
        if (r.pmark == PebbleMark::seen) {
            r.pmark = PebbleMark::struck;
            r.counted = 0;
        }
    mem.pebbles_found = 0;
}

}  // namespace

Port dfs_next_port(const AgentMemory& mem) {
    const MapRecord& r = mem.map.recs[mem.cur];
    if (mem.cur == mem.home) {
        // No wrap at the anchor: running past the last port ends the epoch.
        for (Port p = mem.arrival + 1; p < r.degree; ++p)
            if (port_allowed(mem, mem.cur, p, kNoPort)) return p;
        return kNoPort;
    }
    Port parent = parent_port_of(mem);
    for (int i = 1; i <= r.degree; ++i) {
        Port p = static_cast<Port>((mem.arrival + i) % r.degree);
        if (port_allowed(mem, mem.cur, p, parent)) return p;
    }
    return kNoPort;  // unreachable while the parent port exists
}

Port dfs_depth_turnaround(const AgentMemory& mem) { return mem.arrival; }

void advance_epoch(AgentMemory& mem) {
    mem.epoch += 1;
    for (auto& r : mem.map.recs) {
        r.pmark = PebbleMark::none;
        r.counted = 0;
        r.sighted_epoch = false;
    }
    mem.pebbles_found = 0;
}

RecId extend_map(AgentMemory& mem, Port departed, const Observation& obs) {
    MapSlot s = mem.map.slot(mem.cur, departed);
    if (s.to == kNoRec) {
        RecId nr = mem.map.add_record(obs.degree);
        mem.map.link(mem.cur, departed, nr, obs.arrival_port);
        mem.map_dirty = true;
        return nr;
    }
    if (s.reverse != obs.arrival_port)
        fail(ErrorKind::ProtocolInvariantViolation, "arrival port does not match mapped link");
    if (mem.map.recs[s.to].degree != obs.degree)
        fail(ErrorKind::DegreeMismatch, "revisited record reports a different degree");
    return s.to;
}

int mark_non_cycle(AgentMemory& mem) {
    int marked = 0;
    bool changed = true;
    auto& m = mem.map;
    while (changed) {
        changed = false;
        for (RecId r = 0; r < static_cast<RecId>(m.recs.size()); ++r) {
            MapRecord& rec = m.recs[r];
            if (rec.not_cycle) continue;
            int marked_neighbors = 0;
            Port open = kNoPort;
            for (Port p = 0; p < rec.degree; ++p) {
                const MapSlot& s = m.slot(r, p);
                if (s.to != kNoRec && m.recs[s.to].not_cycle)
                    ++marked_neighbors;
                else
                    open = p;
            }
            if (marked_neighbors >= rec.degree - 1) {
                rec.not_cycle = true;
                rec.escape = open;  // unique non-marked direction right now
                ++marked;
                changed = true;
            }
        }
    }
    return marked;
}

Action migrate_pebble(AgentMemory& mem, const Observation& obs) {
    const MapRecord& home = mem.map.recs[mem.home];
    if (obs.pebble_count < 1)
        fail(ErrorKind::PebbleMissing, "own pebble absent from its record");
    if (home.escape == kNoPort)
        fail(ErrorKind::ProtocolInvariantViolation, "marked pebble node has no open neighbor");
    mem.mode = AgentMode::migrate_move;
    return Action{ActionKind::move_carrying, home.escape};
}

void record_pebble_sighting(AgentMemory& mem, const Observation& obs) {
    MapRecord& r = mem.map.recs[mem.cur];
    if (r.pmark == PebbleMark::struck) return;
    if (r.pmark == PebbleMark::seen) {
        if (obs.pebble_count == 0) {
            r.pmark = PebbleMark::none;
            mem.pebbles_found -= r.counted;
            r.counted = 0;
        } else if (obs.pebble_count != r.counted) {
            mem.pebbles_found += obs.pebble_count - r.counted;
            r.counted = obs.pebble_count;
        }
        return;
    }
    if (obs.pebble_count >= 1 && !r.sighted_epoch) {
        r.pmark = PebbleMark::seen;
        r.sighted_epoch = true;
        r.counted = obs.pebble_count;
        mem.pebbles_found += obs.pebble_count;
    }
}

namespace {

// Tree path between the two farthest pebble records; all pebble records must
// lie on it and it must avoid NOT_CYCLE records.
struct LinePlan {
    std::vector<RecId> path;  // v_0 .. v_s
    bool ok = false;
};

std::vector<int> map_bfs(const LocalMap& m, RecId src, std::vector<RecId>* parent) {
    std::vector<int> dist(m.recs.size(), -1);
    if (parent) parent->assign(m.recs.size(), kNoRec);
    std::deque<RecId> q{src};
    dist[src] = 0;
    while (!q.empty()) {
        RecId u = q.front();
        q.pop_front();
        const MapRecord& r = m.recs[u];
        for (Port p = 0; p < r.degree; ++p) {
            const MapSlot& s = m.slot(u, p);
            if (s.to == kNoRec || dist[s.to] != -1) continue;
            dist[s.to] = dist[u] + 1;
            if (parent) (*parent)[s.to] = u;
            q.push_back(s.to);
        }
    }
    return dist;
}

Port port_toward(const LocalMap& m, RecId from, RecId to) {
    const MapRecord& r = m.recs[from];
    for (Port p = 0; p < r.degree; ++p)
        if (m.slot(from, p).to == to) return p;
    fail(ErrorKind::ProtocolInvariantViolation, "records not adjacent in map");
}

LinePlan compute_line(const AgentMemory& mem) {
    LinePlan plan;
    const LocalMap& m = mem.map;
    std::vector<RecId> trecs;
    for (RecId r = 0; r < static_cast<RecId>(m.recs.size()); ++r)
        if (m.recs[r].pmark == PebbleMark::seen) trecs.push_back(r);
    if (trecs.size() < 2) return plan;

    auto d0 = map_bfs(m, trecs[0], nullptr);
    RecId e1 = trecs[0];
    for (RecId t : trecs)
        if (d0[t] > d0[e1]) e1 = t;
    std::vector<RecId> parent;
    auto d1 = map_bfs(m, e1, &parent);
    RecId e2 = trecs[0];
    for (RecId t : trecs)
        if (d1[t] > d1[e2]) e2 = t;

    std::vector<RecId> path;
    for (RecId v = e2; v != kNoRec; v = parent[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());  // e1 .. e2

    // Line test: every T record on the path, no NOT_CYCLE record on it.
    std::vector<bool> on_path(m.recs.size(), false);
    for (RecId v : path) on_path[v] = true;
    for (RecId t : trecs)
        if (!on_path[t]) return plan;
    for (RecId v : path)
        if (m.recs[v].not_cycle) return plan;

    plan.path = std::move(path);
    plan.ok = true;
    return plan;
}

bool build_candidate_from_path(AgentMemory& mem, const std::vector<RecId>& path) {
    const LocalMap& m = mem.map;
    const int s = static_cast<int>(path.size()) - 1;
    if (s < 3) return false;
    const MapRecord& head = m.recs[path.front()];
    const MapRecord& tail = m.recs[path.back()];
    if (head.degree != tail.degree) return false;
    if (head.counted != tail.counted) return false;

    // Per line position: entry port (j >= 1), exit port (j <= s-1), degree.
    std::vector<Port> arr(s + 1, kNoPort), dep(s + 1, kNoPort);
    std::vector<int> deg(s + 1);
    for (int j = 0; j <= s; ++j) deg[j] = m.recs[path[j]].degree;
    for (int j = 0; j < s; ++j) {
        dep[j] = port_toward(m, path[j], path[j + 1]);
        arr[j + 1] = m.slot(path[j], dep[j]).reverse;
    }

    // A line whose word repeats with a dividing period would make C' an
    // exact multi-cover of a shorter cycle; such an identification is
    // degenerate and can never elect, so drop it here.
    for (int p = 3; p < s; ++p) {
        if (s % p != 0) continue;
        bool periodic = true;
        for (int j = 0; j + p <= s && periodic; ++j) {
            if (deg[j] != deg[j + p]) periodic = false;
            if (j + 1 + p <= s && arr[j + 1] != arr[j + 1 + p]) periodic = false;
            if (j + p <= s - 1 && dep[j] != dep[j + p]) periodic = false;
        }
        if (periodic) return false;
    }

    CandidateCycle cand;
    cand.steps.resize(s);
    for (int j = 0; j < s; ++j) {
        const MapRecord& rec = m.recs[path[j]];
        cand.steps[j].degree = rec.degree;
        cand.steps[j].pebbles = rec.counted;
        cand.steps[j].dep = dep[j];
        if (j > 0) cand.steps[j].arr = arr[j];
    }
    // Position 0 inherits its arrival from the identified far end v_s.
    cand.steps[0].arr = arr[s];
    if (cand.steps[0].arr == cand.steps[0].dep) return false;  // wrap would backtrack
    if (cand.pebble_total() != mem.k) return false;
    mem.cand = std::move(cand);
    return true;
}

}  // namespace

bool try_cycle_detection(AgentMemory& mem) {
    LinePlan plan = compute_line(mem);
    if (!plan.ok) {
        strike_all(mem);
        return false;
    }
    // Orient the path so the agent's end is v_0: the physical walk starts at
    // the seam, and both extremes claim to be the same node.
    int c = -1;
    for (std::size_t i = 0; i < plan.path.size(); ++i)
        if (plan.path[i] == mem.cur) c = static_cast<int>(i);
    if (c < 0) {
        strike_all(mem);
        return false;
    }
    int s = static_cast<int>(plan.path.size()) - 1;
    if (c > s - c) {
        std::reverse(plan.path.begin(), plan.path.end());
        c = s - c;
    }
    if (!build_candidate_from_path(mem, plan.path)) {
        strike_all(mem);
        return false;
    }
    // Approach: walk from index c down to the seam at index 0.
    mem.approach_ports.clear();
    for (int i = c; i >= 1; --i)
        mem.approach_ports.push_back(port_toward(mem.map, plan.path[i], plan.path[i - 1]));
    mem.approach_idx = 0;
    mem.walk_step = 0;
    mem.retrace_ports.clear();
    mem.saved_arrival = mem.arrival;
    // The walk only closes the loop if the far end really is this node, and
    // anonymity alone cannot certify that; the agent's second pebble is the
    // seal: dropped at the seam before the walk, it must reappear on return.
    mem.mode = mem.approach_ports.empty() ? AgentMode::verify_mark : AgentMode::verify_approach;
    return true;
}

// ---------------------------------------------------------------------------
// Phase 2 helpers

namespace {

int mod(int a, int m) { return ((a % m) + m) % m; }

Port move_port(const CandidateCycle& cand, int pos, int dir) {
    return dir > 0 ? cand.steps[pos].dep : cand.steps[pos].arr;
}

int cw_distance(const AgentMemory& mem, int from) {
    int L = mem.cand.length();
    if (mem.chirality_cw >= 0) return mod(mem.u_pos - from, L);
    return mod(from - mem.u_pos, L);
}

void note(StepResult& out, MilestoneKind kind, int offset = -1, Port port = kNoPort,
          TerminateCause cause = TerminateCause::count) {
    out.notes.push_back(Milestone{kind, offset, port, cause});
}

void reset_collection(AgentMemory& mem, const Observation& obs) {
    mem.window.clear();
    mem.win_base = 0;
    mem.first_t = mem.last_t = -1;
    mem.pebbles_found = 0;
    WalkStep w;
    w.arr = mem.arrival;
    w.degree = obs.degree;
    if (obs.pebble_count > 0) {
        w.count = obs.pebble_count;
        w.is_t = true;
        mem.first_t = mem.last_t = 0;
        mem.pebbles_found = obs.pebble_count;
    }
    mem.window.push_back(w);
}

void start_walking(AgentMemory& mem, StepResult& out, const Observation& obs) {
    mem.mode = AgentMode::walking;
    mem.dir = mem.chirality_cw != 0 ? -mem.chirality_cw : 1;
    mem.u_pos = -1;
    mem.expect_merge = false;
    reset_collection(mem, obs);
    note(out, MilestoneKind::walking_started);
}

Action phase2_move(AgentMemory& mem, int dir) {
    mem.pending_dir = dir;
    return Action{ActionKind::move, move_port(mem.cand, mem.pos, dir)};
}

// Shared by phase-2 entry and the walking rebuild: elect on the current
// candidate and either head for u or fall back to walking.
Action decide_after_candidate(AgentMemory& mem, StepResult& out, const Observation& obs) {
    std::optional<int> u;
    if (mem.cand.pebble_total() == mem.k) u = elect_meeting_node(mem.cand, mem.k);
    if (!u.has_value()) {
        note(out, MilestoneKind::election_failed);
        start_walking(mem, out, obs);
        if (mem.cand.length() == 0) return Action{ActionKind::stay, kNoPort};
        return phase2_move(mem, mem.dir);
    }
    mem.u_pos = *u;
    mem.chirality_cw = candidate_clockwise(mem.cand, mem.u_pos);
    int L = mem.cand.length();
    int offset = mod(mem.u_pos - mem.pos, L);
    note(out, MilestoneKind::election, offset,
         offset > 0 ? mem.cand.steps[mem.pos].dep : kNoPort);
    note(out, MilestoneKind::gathering_started);
    mem.mode = AgentMode::to_u;
    mem.timer = 2L * mem.n;
    int fwd = mod(mem.u_pos - mem.pos, L);
    int bwd = L - fwd;
    if (fwd == 0)
        mem.dir = mem.chirality_cw;
    else if (fwd < bwd)
        mem.dir = 1;
    else if (bwd < fwd)
        mem.dir = -1;
    else
        mem.dir = mem.chirality_cw;
    if (mem.pos == mem.u_pos) {
        note(out, MilestoneKind::reached_u);
        return Action{ActionKind::stay, kNoPort};
    }
    return phase2_move(mem, mem.dir);
}

// The candidate in phase 2 is always a verified picture of the real cycle,
// so a correct rebuild must agree with it as a rotation (either orientation)
// in ports and degrees; only the pebble flags may differ.
bool is_rotation_of(const CandidateCycle& fresh, const CandidateCycle& trusted) {
    const int L = trusted.length();
    if (fresh.length() != L) return false;
    for (int orient : {1, -1}) {
        for (int shift = 0; shift < L; ++shift) {
            bool ok = true;
            for (int j = 0; j < L && ok; ++j) {
                int p = ((shift + orient * j) % L + L) % L;
                const CandidateStep& a = fresh.steps[j];
                const CandidateStep& b = trusted.steps[p];
                Port arr = orient > 0 ? b.arr : b.dep;
                Port dep = orient > 0 ? b.dep : b.arr;
                ok = a.arr == arr && a.dep == dep && a.degree == b.degree;
            }
            if (ok) return true;
        }
    }
    return false;
}

// Try to rebuild C' from the walk window once enough pebbles were counted.
bool rebuild_candidate_from_walk(AgentMemory& mem) {
    if (mem.first_t < 0 || mem.last_t <= mem.first_t) return false;
    long s = mem.last_t - mem.first_t;
    if (s < 3) return false;
    if (mem.first_t < mem.win_base) return false;
    auto at = [&](long idx) -> const WalkStep& {
        return mem.window[static_cast<std::size_t>(idx - mem.win_base)];
    };
    const WalkStep& head = at(mem.first_t);
    const WalkStep& tail = at(mem.last_t);
    if (head.degree != tail.degree) return false;
    if (head.count != tail.count) return false;
    int total = 0;
    for (long i = mem.first_t; i < mem.last_t; ++i) total += at(i).count;
    if (total != mem.k) return false;
    CandidateCycle cand;
    cand.steps.resize(static_cast<std::size_t>(s));
    for (long j = 0; j < s; ++j) {
        const WalkStep& w = at(mem.first_t + j);
        cand.steps[j].arr = j == 0 ? tail.arr : w.arr;
        cand.steps[j].dep = w.dep;
        cand.steps[j].degree = w.degree;
        cand.steps[j].pebbles = w.count;
    }
    if (cand.steps[0].arr == cand.steps[0].dep) return false;
    if (cand.steps[0].arr == kNoPort) return false;
    if (!is_rotation_of(cand, mem.cand)) return false;  // false seam identification
    mem.cand = std::move(cand);
    mem.pos = 0;  // current node is the seam
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// initialize

std::pair<AgentMemory, Action> initialize(int k, int n, double delta_const,
                                          const Observation& obs) {
    if (k < 2 || n < 3) fail(ErrorKind::BadParameters, "need k >= 2 and n >= 3");
    AgentMemory mem;
    mem.k = k;
    mem.n = n;
    mem.delta_const = delta_const;
    mem.blocked_threshold = blocked_threshold_for(n, delta_const);
    RecId root = mem.map.add_record(obs.degree);
    mem.home = mem.cur = root;
    mem.stack.push_back({root, kNoPort});
    mem.arrival = kNoPort;
    mem.map_dirty = true;
    mem.last_agents = obs.agent_count;
    mem.last2_agents = -1;
    mem.base_pebbles = obs.pebble_count + 1;  // account for the pebble we place now
    mem.pending = Action{ActionKind::place_pebble, kNoPort};
    Action act = mem.pending;
    return {std::move(mem), act};
}

// ---------------------------------------------------------------------------
// step

namespace {

void on_arrival_explore(AgentMemory& mem, const Observation& obs) {
    Port departed = mem.pending.port;
    RecId from = mem.cur;
    RecId to = extend_map(mem, departed, obs);
    mem.cur = to;
    Port parent = parent_port_of(mem);
    if (departed == parent && mem.stack.size() >= 2) {
        mem.stack.pop_back();
        if (mem.stack.back().rec != to)
            fail(ErrorKind::ProtocolInvariantViolation, "stack does not match up-move");
    } else {
        mem.stack.push_back({to, obs.arrival_port});
    }
    mem.steps_away = static_cast<long>(mem.stack.size()) - 1;
    mem.arrival = obs.arrival_port;
    (void)from;
}

// Returns the action when the walk advanced the protocol, nullopt otherwise.
std::optional<Action> on_arrival_verify(AgentMemory& mem, const Observation& obs,
                                        StepResult& out) {
    if (mem.mode == AgentMode::verify_approach) {
        mem.retrace_ports.push_back(obs.arrival_port);
        mem.approach_idx += 1;
        if (mem.approach_idx == mem.approach_ports.size()) {
            mem.mode = AgentMode::verify_mark;
            mem.walk_step = 0;
        }
        return std::nullopt;
    }
    if (mem.mode == AgentMode::verify_walk) {
        mem.retrace_ports.push_back(obs.arrival_port);
        const int L = mem.cand.length();
        int pidx = (mem.walk_step + 1) % L;
        const CandidateStep& exp = mem.cand.steps[pidx];
        // The parked second pebble must show up exactly at the seam.
        int want_pebbles = exp.pebbles + (pidx == 0 && mem.marker_down ? 1 : 0);
        bool good = obs.arrival_port == exp.arr && obs.degree == exp.degree &&
                    obs.pebble_count == want_pebbles;
        if (!good) {
            strike_all(mem);
            note(out, MilestoneKind::verify_failed);
            mem.mode = AgentMode::verify_retrace;
            mem.retrace_idx = mem.retrace_ports.size();
            return std::nullopt;
        }
        mem.walk_step += 1;
        // Two full laps: a wrong seam would have to survive the entire port,
        // degree and pebble script again from a shifted start.
        if (mem.walk_step == 2 * L) {
            note(out, MilestoneKind::phase2_entered);
            mem.pos = 0;
            mem.arrival = obs.arrival_port;
            return decide_after_candidate(mem, out, obs);
        }
        return std::nullopt;
    }
    // verify_retrace
    mem.retrace_idx -= 1;
    if (mem.retrace_idx == 0) {
        mem.mode = AgentMode::explore;
        mem.arrival = mem.saved_arrival;
    }
    return std::nullopt;
}

void on_arrival_phase2(AgentMemory& mem, const Observation& obs) {
    const int L = mem.cand.length();
    if (L > 0) mem.pos = mod(mem.pos + mem.pending_dir, L);
    mem.arrival = obs.arrival_port;
    if (mem.mode == AgentMode::walking) {
        // Fill the departure of the step we just left, then append.
        if (!mem.window.empty()) mem.window.back().dep = mem.pending.port;
        WalkStep w;
        w.arr = obs.arrival_port;
        w.degree = obs.degree;
        long idx = mem.win_base + static_cast<long>(mem.window.size());
        if (obs.pebble_count > 0) {
            w.count = obs.pebble_count;
            w.is_t = true;
            if (mem.first_t < 0) mem.first_t = idx;
            mem.last_t = idx;
            mem.pebbles_found += obs.pebble_count;
        }
        mem.window.push_back(w);
    }
}

Action explore_decision(AgentMemory& mem, StepResult& out, const Observation& obs) {
    record_pebble_sighting(mem, obs);
    if (mem.map_dirty) {
        mark_non_cycle(mem);
        mem.map_dirty = false;
    }
    // Pebble migration has priority once the pebble node is marked.
    if (mem.cur == mem.home && mem.map.recs[mem.home].not_cycle && obs.pebble_count >= 1)
        return migrate_pebble(mem, obs);
    // Cycle detection when enough pebbles were counted.
    if (mem.pebbles_found >= mem.k + 1) {
        if (try_cycle_detection(mem)) {
            note(out, MilestoneKind::verify_started);
            if (mem.mode == AgentMode::verify_approach)
                return Action{ActionKind::move, mem.approach_ports[0]};
            // Already at the seam: seal it with the second pebble first.
            mem.marker_down = true;
            mem.has_second_pebble = false;
            return Action{ActionKind::place_pebble, kNoPort};
        }
        // Not a line: marks were struck, exploration continues below.
    }
    if (mem.cur != mem.home && mem.steps_away == depth_limit(mem.epoch))
        return Action{ActionKind::move, dfs_depth_turnaround(mem)};
    Port p = dfs_next_port(mem);
    if (p == kNoPort && mem.cur == mem.home) {
        advance_epoch(mem);
        mem.arrival = kNoPort;
        record_pebble_sighting(mem, obs);  // re-sight own pebble in the new epoch
        p = dfs_next_port(mem);
    }
    if (p == kNoPort) return Action{ActionKind::stay, kNoPort};  // fully marked corner
    return Action{ActionKind::move, p};
}

Action walking_decision(AgentMemory& mem, StepResult& out, const Observation& obs, bool moved,
                        bool suppressed) {
    const int L = mem.cand.length();
    if (L == 0) return Action{ActionKind::stay, kNoPort};
    if (moved && !suppressed && obs.crossed_last_round) {
        // Walker-walker cross: break the tie with the edge's two port
        // numbers, which both parties know.
        Port mine = obs.arrival_port;
        Port theirs = mem.pending.port;
        if (mine < theirs) {
            mem.dir = -mem.dir;
            mem.expect_merge = true;
            reset_collection(mem, obs);
            return phase2_move(mem, mem.dir);
        }
        if (mine > theirs) {
            mem.mode = AgentMode::regroup_wait;
            mem.timer = mem.n;
            reset_collection(mem, obs);
            return Action{ActionKind::stay, kNoPort};
        }
    }
    if (moved && mem.expect_merge) {
        mem.expect_merge = false;
        mem.cooldown = 1;
        if (obs.agent_count <= 1) {
            // Other party is gone; fall back to the original direction.
            mem.dir = -mem.dir;
            reset_collection(mem, obs);
            return phase2_move(mem, mem.dir);
        }
    }
    if (moved && !suppressed && obs.agent_count >= 2 && mem.last_agents >= 0 &&
        obs.agent_count > mem.last_agents) {
        // Grouping predicate 2: somebody stationary here, treat it as u.
        mem.mode = AgentMode::wait2;
        mem.timer = 2L * mem.n;
        return Action{ActionKind::stay, kNoPort};
    }
    if (mem.pebbles_found >= mem.k + 1) {
        if (rebuild_candidate_from_walk(mem)) return decide_after_candidate(mem, out, obs);
        reset_collection(mem, obs);
    }
    if (static_cast<long>(mem.window.size()) > 3L * mem.n + 2) reset_collection(mem, obs);
    return phase2_move(mem, mem.dir);
}

Action phase2_decision(AgentMemory& mem, StepResult& out, const Observation& obs, bool moved,
                       bool suppressed) {
    const int L = mem.cand.length();
    switch (mem.mode) {
        case AgentMode::walking:
            return walking_decision(mem, out, obs, moved, suppressed);

        case AgentMode::wait2: {
            mem.timer -= 1;
            if (mem.last_agents >= 0 && obs.agent_count < mem.last_agents) {
                // Somebody left: assume the gathering group began its second
                // step clockwise and tag along.
                mem.dir = mem.chirality_cw != 0 ? mem.chirality_cw : 1;
                mem.mode = AgentMode::second_step;
                mem.timer = mem.n;
                return phase2_move(mem, mem.dir);
            }
            if (mem.timer <= 0) {
                start_walking(mem, out, obs);
                return phase2_move(mem, mem.dir);
            }
            return Action{ActionKind::stay, kNoPort};
        }

        case AgentMode::to_u: {
            mem.timer -= 1;
            if (moved && mem.pos == mem.u_pos) note(out, MilestoneKind::reached_u);
            if (mem.timer <= 0) {
                bool at_u = mem.pos == mem.u_pos;
                mem.dir = at_u ? mem.chirality_cw : -mem.chirality_cw;
                mem.departure_count = std::max(mem.max_count_here, obs.agent_count);
                mem.mode = AgentMode::sync_out;
                return phase2_move(mem, mem.dir);
            }
            if (mem.pos == mem.u_pos) return Action{ActionKind::stay, kNoPort};
            return phase2_move(mem, mem.dir);
        }

        case AgentMode::sync_out: {
            if (!moved) return mem.pending;  // blocked, retry
            if (obs.crossed_last_round) {
                mem.mode = AgentMode::sync_back;
                return phase2_move(mem, -mem.dir);
            }
            mem.mode = AgentMode::sync_wait;
            mem.timer = mem.n;
            return Action{ActionKind::stay, kNoPort};
        }

        case AgentMode::sync_back: {
            if (!moved) return mem.pending;
            mem.mode = AgentMode::sync_out;
            mem.departure_count = std::max(mem.max_count_here, obs.agent_count);
            return phase2_move(mem, mem.dir);
        }

        case AgentMode::sync_wait: {
            mem.timer -= 1;
            if (obs.agent_count >= mem.departure_count || mem.timer <= 0) {
                mem.mode = AgentMode::second_step;
                mem.timer = mem.n;
                return phase2_move(mem, mem.dir);
            }
            return Action{ActionKind::stay, kNoPort};
        }

        case AgentMode::second_step: {
            mem.timer -= 1;
            if (moved && !suppressed && obs.crossed_last_round && L > 0) {
                int other_pos = mod(mem.pos - mem.pending_dir, L);
                int mine = mem.u_pos >= 0 ? cw_distance(mem, mem.pos) : 0;
                int theirs = mem.u_pos >= 0 ? cw_distance(mem, other_pos) : 0;
                bool reverse;
                if (mem.u_pos >= 0 && mine != theirs)
                    reverse = mine < theirs;
                else if (obs.arrival_port != mem.pending.port)
                    reverse = obs.arrival_port < mem.pending.port;
                else
                    reverse = false;
                if (reverse) {
                    mem.dir = -mem.dir;
                    mem.expect_merge = true;
                    return phase2_move(mem, mem.dir);
                }
                mem.mode = AgentMode::regroup_wait;
                return Action{ActionKind::stay, kNoPort};
            }
            if (moved && mem.expect_merge) {
                mem.expect_merge = false;
                mem.cooldown = 1;
                if (obs.agent_count <= 1) {
                    mem.dir = -mem.dir;
                    return phase2_move(mem, mem.dir);
                }
            }
            if (moved && !suppressed && mem.last_agents >= 0 &&
                obs.agent_count > mem.last_agents && mem.u_pos >= 0) {
                // Met another group: continue toward u together.
                int fwd = mod(mem.u_pos - mem.pos, L);
                int bwd = L - fwd;
                mem.dir = fwd == 0 ? mem.chirality_cw : (fwd <= bwd ? 1 : -1);
                mem.cooldown = 1;
            }
            if (mem.timer <= 0) {
                start_walking(mem, out, obs);
                return phase2_move(mem, mem.dir);
            }
            return phase2_move(mem, mem.dir);
        }

        case AgentMode::regroup_wait: {
            mem.timer -= 1;
            if (mem.last_agents >= 0 && obs.agent_count > mem.last_agents) {
                mem.cooldown = 1;
                mem.mode = AgentMode::second_step;
                if (mem.timer <= 0) mem.timer = 1;
                return phase2_move(mem, mem.dir);
            }
            if (mem.timer <= 0) {
                start_walking(mem, out, obs);
                return phase2_move(mem, mem.dir);
            }
            return Action{ActionKind::stay, kNoPort};
        }

        default:
            return Action{ActionKind::stay, kNoPort};
    }
}

}  // namespace

StepResult step_inplace(AgentMemory& mem, const Observation& obs) {
    StepResult out;
    if (mem.terminated) {
        out.action = Action{ActionKind::stay, kNoPort};
        return out;
    }
    mem.round += 1;

    const bool attempted = mem.pending.kind == ActionKind::move ||
                           mem.pending.kind == ActionKind::move_carrying;
    bool moved = false;
    if (attempted) {
        if (obs.blocked_last_round) {
            mem.rounds_blocked += 1;
        } else {
            mem.rounds_blocked = 0;
            moved = true;
        }
    }

    bool suppressed = mem.cooldown > 0;
    if (moved && mem.cooldown > 0) mem.cooldown -= 1;

    std::optional<Action> forced;
    if (moved) {
        switch (mem.mode) {
            case AgentMode::explore:
                on_arrival_explore(mem, obs);
                break;
            case AgentMode::migrate_move:
                on_arrival_explore(mem, obs);
                mem.mode = AgentMode::migrate_place;
                forced = Action{ActionKind::place_pebble, kNoPort};
                break;
            case AgentMode::verify_approach:
            case AgentMode::verify_walk:
            case AgentMode::verify_retrace:
                forced = on_arrival_verify(mem, obs, out);
                break;
            default:
                on_arrival_phase2(mem, obs);
                break;
        }
    } else if (mem.pending.kind == ActionKind::place_pebble &&
               mem.mode == AgentMode::migrate_place) {
        // Pebble is down at the new node: it is the new anchor.
        mem.home = mem.cur;
        mem.stack.assign(1, {mem.home, kNoPort});
        mem.steps_away = 0;
        mem.arrival = kNoPort;
        mem.mode = AgentMode::explore;
    } else if (mem.pending.kind == ActionKind::place_pebble &&
               mem.mode == AgentMode::verify_mark) {
        mem.mode = AgentMode::verify_walk;  // seam sealed, start the loop
    }
    if (moved && mem.marker_down && mem.pending.kind == ActionKind::move_carrying &&
        mem.mode != AgentMode::migrate_move && mem.mode != AgentMode::migrate_place) {
        mem.marker_down = false;
        mem.has_second_pebble = true;
    }

    // Quietness over the last two transitions: no agent arrived here.
    bool quiet = !moved && mem.last_agents >= 0 && obs.agent_count <= mem.last_agents &&
                 mem.last2_agents >= 0 && mem.last_agents <= mem.last2_agents;

    // Termination checks come before any movement logic.
    Action action;
    bool decided = false;
    if (obs.agent_count == mem.k) {
        action = Action{ActionKind::terminate, kNoPort};
        note(out, MilestoneKind::terminated, -1, kNoPort, TerminateCause::count);
        mem.terminated = true;
        mem.mode = AgentMode::done;
        decided = true;
    } else if (!moved && mem.base_pebbles >= 0 && obs.pebble_count > mem.base_pebbles && quiet) {
        action = Action{ActionKind::terminate, kNoPort};
        note(out, MilestoneKind::terminated, -1, kNoPort, TerminateCause::pebble_increment);
        mem.terminated = true;
        mem.mode = AgentMode::done;
        decided = true;
    } else if (obs.blocked_last_round && mem.rounds_blocked >= mem.blocked_threshold && quiet &&
               mem.has_second_pebble) {
        action = Action{ActionKind::place_second_and_terminate, kNoPort};
        note(out, MilestoneKind::terminated, -1, kNoPort, TerminateCause::threshold);
        mem.terminated = true;
        mem.has_second_pebble = false;
        mem.mode = AgentMode::done;
        decided = true;
    }

    if (!decided) {
        // Blocked phase-1 agents retry the same edge; phase-2 timers keep
        // counting through blocked rounds, so those modes always decide.
        if (forced.has_value()) {
            action = *forced;
        } else if (attempted && !moved && !mem.in_phase2()) {
            action = mem.pending;
        } else {
            switch (mem.mode) {
                case AgentMode::explore:
                    action = explore_decision(mem, out, obs);
                    break;
                case AgentMode::migrate_place:
                    // handled at reconciliation; falls through to explore
                    action = explore_decision(mem, out, obs);
                    break;
                case AgentMode::verify_approach:
                    action = Action{ActionKind::move, mem.approach_ports[mem.approach_idx]};
                    break;
                case AgentMode::verify_mark:
                    action = Action{ActionKind::place_pebble, kNoPort};
                    mem.marker_down = true;
                    mem.has_second_pebble = false;
                    break;
                case AgentMode::verify_walk:
                    action = Action{ActionKind::move,
                                    mem.cand.steps[mem.walk_step % mem.cand.length()].dep};
                    break;
                case AgentMode::verify_retrace:
                    action = Action{ActionKind::move, mem.retrace_ports[mem.retrace_idx - 1]};
                    // Departing the seam on the way back: take the seal along.
                    if (mem.marker_down && mem.retrace_idx == mem.approach_ports.size())
                        action.kind = ActionKind::move_carrying;
                    break;
                default:
                    action = phase2_decision(mem, out, obs, moved, suppressed);
                    break;
            }
        }
        // A parked verification seal travels with the next departure; this
        // covers confirmation actions delivered through reconciliation too.
        if (mem.marker_down && action.kind == ActionKind::move &&
            (mem.mode == AgentMode::explore || mem.in_phase2()))
            action.kind = ActionKind::move_carrying;
    }

    // History updates for the next round's stationarity checks.
    if (moved) {
        mem.last2_agents = -1;
        mem.last_agents = obs.agent_count;
        mem.base_pebbles = obs.pebble_count;
        mem.max_count_here = obs.agent_count;
    } else {
        mem.last2_agents = mem.last_agents;
        mem.last_agents = obs.agent_count;
        if (obs.pebble_count < mem.base_pebbles) {
            mem.base_pebbles = obs.pebble_count;
        } else if (obs.pebble_count > mem.base_pebbles && !quiet) {
            // A pebble appeared while agents were arriving: that is a
            // migration landing here, not a termination handshake.
            mem.base_pebbles = obs.pebble_count;
        }
        mem.max_count_here = std::max(mem.max_count_here, obs.agent_count);
    }
    if (action.kind == ActionKind::place_pebble ||
        action.kind == ActionKind::place_second_and_terminate)
        mem.base_pebbles += 1;
    mem.stayed_last = !moved;

    mem.pending = action;
    out.action = action;
    return out;
}

}  // namespace gather

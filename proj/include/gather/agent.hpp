#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "gather/graph.hpp"

namespace gather {

// What an agent is allowed to see each round.  Built by the engine from the
// pre-move world snapshot; never contains node ids or ground truth.
struct Observation {
    int degree = 0;
    Port arrival_port = kNoPort;  // port of the current node we last arrived by
    int agent_count = 0;          // includes self and terminated agents
    int pebble_count = 0;         // placed pebbles only, carried ones invisible
    bool blocked_last_round = false;
    bool crossed_last_round = false;
    int prev_agent_count = -1;  // count at this node last round, -1 if we moved
};

enum class ActionKind : std::uint8_t {
    stay,
    move,
    move_carrying,  // pick up one pebble here and move with it
    place_pebble,
    place_second_and_terminate,
    terminate,
};

struct Action {
    ActionKind kind = ActionKind::stay;
    Port port = kNoPort;
};

enum class TerminateCause : std::uint8_t { count, pebble_increment, threshold };

enum class MilestoneKind : std::uint8_t {
    phase2_entered,
    election,         // offset/first_port identify the elected node
    election_failed,  // symmetric configuration
    gathering_started,
    walking_started,
    reached_u,
    verify_started,
    verify_failed,
    terminated,
};

struct Milestone {
    MilestoneKind kind;
    int offset = -1;     // election: steps forward along the walk direction
    Port first_port = kNoPort;
    TerminateCause cause = TerminateCause::count;
};

// ---------------------------------------------------------------------------
// Local map: the agent's partial picture of the graph.  Anonymous revisits
// spawn fresh records, so the link structure is always a tree.

using RecId = std::int32_t;
constexpr RecId kNoRec = -1;

enum class PebbleMark : std::uint8_t { none, seen, struck };

struct MapSlot {
    RecId to = kNoRec;
    Port reverse = kNoPort;
};

struct MapRecord {
    int degree = 0;
    int first_slot = 0;  // index into LocalMap::slots
    bool not_cycle = false;
    PebbleMark pmark = PebbleMark::none;
    bool sighted_epoch = false;  // a pebble sighting already consumed here
    int counted = 0;             // pebbles credited to pebbles_found at this record
    Port escape = kNoPort;       // unique non-marked direction at marking time
};

struct LocalMap {
    std::vector<MapRecord> recs;
    std::vector<MapSlot> slots;

    RecId add_record(int degree);
    MapSlot& slot(RecId r, Port p) { return slots[recs[r].first_slot + p]; }
    const MapSlot& slot(RecId r, Port p) const { return slots[recs[r].first_slot + p]; }
    void link(RecId a, Port pa, RecId b, Port pb);
    std::size_t size() const { return recs.size(); }
};

// ---------------------------------------------------------------------------
// Candidate cycle C': the port script plus pebble multiplicities the agent
// committed to when it identified the first and last pebble as one node.

struct CandidateStep {
    Port arr = kNoPort;  // port we arrive by at this position
    Port dep = kNoPort;  // port we leave by toward the next position
    int degree = 0;
    int pebbles = 0;
};

struct CandidateCycle {
    std::vector<CandidateStep> steps;
    int length() const { return static_cast<int>(steps.size()); }
    int pebble_total() const;
};

// Canonical-string election.  Returns the unique winning position, or
// nullopt when the configuration is symmetric.  Throws BadCandidate when the
// pebble multiplicities do not sum to k.
std::optional<int> elect_meeting_node(const CandidateCycle& cycle, int k);

// Clockwise direction at the elected node: +1 if traversing the smaller of
// the two cycle ports at u means moving toward increasing positions.
int candidate_clockwise(const CandidateCycle& cycle, int u_pos);

// ---------------------------------------------------------------------------

enum class AgentMode : std::uint8_t {
    explore,          // phase 1 DFS
    migrate_move,     // carrying own pebble one hop toward the cycle
    migrate_place,    // placing it after the hop
    verify_approach,  // moving to one end of the T-line
    verify_mark,      // dropping the second pebble at the seam
    verify_walk,      // traversing C'
    verify_retrace,   // undoing a failed verification walk
    walking,          // phase 2, collecting pebbles around the cycle
    wait2,            // phase 2, waiting at an assumed meeting node
    to_u,             // phase 2, first step of gathering
    sync_out,         // phase 2, one step past the first-step end node
    sync_back,        // phase 2, returning after a crossed sync step
    sync_wait,        // phase 2, waiting for node-mates to catch up
    second_step,      // phase 2, second step of gathering
    regroup_wait,     // phase 2, holding for a reversing group
    done,
};

struct WalkStep {
    Port arr = kNoPort;
    Port dep = kNoPort;
    int degree = 0;
    int count = 0;  // pebbles sighted on arrival
    bool is_t = false;
};

struct AgentMemory {
    // Static knowledge.
    int k = 0;
    int n = 0;
    double delta_const = 4.0;
    long blocked_threshold = 0;  // ceil(delta * n * log2 n)

    // Counters from the protocol description.
    long round = 0;
    int epoch = 0;
    long steps_away = 0;
    long rounds_blocked = 0;
    int pebbles_found = 0;

    bool terminated = false;
    bool has_second_pebble = true;
    bool marker_down = false;  // second pebble parked at the verification seam
    AgentMode mode = AgentMode::explore;

    // Phase 1 state.
    LocalMap map;
    RecId home = kNoRec;  // record holding the agent's own pebble
    RecId cur = kNoRec;
    Port arrival = kNoPort;  // arrival port at cur; -1 means "scan from 0"
    struct StackEntry {
        RecId rec;
        Port to_parent;  // port of rec leading one step toward home
    };
    std::vector<StackEntry> stack;

    // Pending action submitted last round (for reconciliation).
    Action pending{ActionKind::stay, kNoPort};

    // Verification state.
    CandidateCycle cand;
    std::vector<Port> approach_ports;  // ports to walk to the line end
    std::size_t approach_idx = 0;
    int walk_step = 0;                  // completed steps of the C' walk
    std::vector<Port> retrace_ports;    // arrival ports of completed hops
    std::size_t retrace_idx = 0;
    Port saved_arrival = kNoPort;       // arrival at cur before detection began

    // Phase 2 state.
    int pos = 0;            // position on cand
    int chirality_cw = 0;   // +1/-1 in cand direction, 0 unknown
    int u_pos = -1;         // elected position
    int dir = 1;            // current movement direction on cand
    long timer = 0;         // rounds left in the current phase-2 mode
    long win_base = 0;      // walk step index of window.front()
    std::deque<WalkStep> window;
    long first_t = -1, last_t = -1;  // walk step indices of extremal sightings
    int departure_count = 0;         // agents seen at u' when leaving it
    int max_count_here = 0;          // peak count while standing at one node
    int cooldown = 0;                // successful traversals to ignore grouping
    int pending_dir = 0;             // cand direction of the submitted move
    bool expect_merge = false;       // reversed after a cross, other group due
    bool map_dirty = false;          // records or links changed since last marking pass

    // Stationarity tracking for termination rules.
    int last_agents = -1;   // agent count observed last round (same node only)
    int last2_agents = -1;  // and the round before
    int base_pebbles = -1;  // expected pebble count at this node
    bool stayed_last = false;

    bool in_phase2() const {
        return mode >= AgentMode::walking && mode != AgentMode::done;
    }
};

struct StepResult {
    Action action;
    std::vector<Milestone> notes;
};

// Algorithm entry points. step_inplace is the engine-facing variant; step is
// the pure one used for prediction and tests.
std::pair<AgentMemory, Action> initialize(int k, int n, double delta_const,
                                          const Observation& obs);
StepResult step_inplace(AgentMemory& mem, const Observation& obs);
inline std::pair<AgentMemory, StepResult> step(const AgentMemory& mem, const Observation& obs) {
    AgentMemory copy = mem;
    StepResult r = step_inplace(copy, obs);
    return {std::move(copy), std::move(r)};
}

// Individual protocol operations, exposed for targeted tests.
Port dfs_next_port(const AgentMemory& mem);              // next exploration port
Port dfs_depth_turnaround(const AgentMemory& mem);       // at stepsAway = 2^e
void advance_epoch(AgentMemory& mem);                    // clears pebble marks
RecId extend_map(AgentMemory& mem, Port departed, const Observation& obs);
int mark_non_cycle(AgentMemory& mem);                    // fixpoint, returns #new marks
Action migrate_pebble(AgentMemory& mem, const Observation& obs);
void record_pebble_sighting(AgentMemory& mem, const Observation& obs);
bool try_cycle_detection(AgentMemory& mem);              // true if a walk was planned

long blocked_threshold_for(int n, double delta_const);

}  // namespace gather

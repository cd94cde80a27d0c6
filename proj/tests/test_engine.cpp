#include <sstream>

#include "doctest.h"
#include "gather/engine.hpp"
#include "gather/verify.hpp"

using namespace gather;

namespace {

std::string trace_text(const std::vector<TraceEvent>& events) {
    std::ostringstream os;
    for (const TraceEvent& ev : events) os << format_event(ev) << '\n';
    return os.str();
}

}  // namespace

TEST_CASE("weak gathering predicate") {
    PortLabeledGraph g = generate_unicyclic(6, 3, 1);
    WorldState w = WorldState::create(g, {3, 4});
    SUBCASE("one shared node") {
        w.agent_pos = {3, 3};
        CHECK(weak_gathering_achieved(w, g));
        CHECK(strict_gathering_achieved(w));
    }
    SUBCASE("two endpoints of one edge") {
        NodeId a = 0, b = g.link(0, 0).to;
        w.agent_pos = {a, b};
        CHECK(weak_gathering_achieved(w, g));
        CHECK_FALSE(strict_gathering_achieved(w));
    }
    SUBCASE("two distant nodes") {
        // 0 and 1 are cycle nodes; find a non-neighbor pair
        NodeId a = 0;
        NodeId far = kNoNode;
        for (NodeId v = 1; v < g.node_count(); ++v) {
            bool adj = false;
            for (Port p = 0; p < g.degree(a); ++p)
                if (g.link(a, p).to == v) adj = true;
            if (!adj) far = v;
        }
        REQUIRE(far != kNoNode);
        w.agent_pos = {a, far};
        CHECK_FALSE(weak_gathering_achieved(w, g));
    }
}

TEST_CASE("swap across one edge sets both crossed flags") {
    // Path 0-1-2 with explicit ports; agents at 0 and 1 both leave port 0 on
    // round 1 and swap over the same edge.
    ExplicitPorts ports{{{0, 0}, {1, 0}}};
    PortLabeledGraph g = build_graph(3, {{0, 1}, {1, 2}}, ports);
    TopologyInfo topo = analyze(g);
    SchedulerStrategy strat(SchedulerKind::always_full, 1);
    Engine eng(g, topo, std::move(strat), {0, 1}, 4.0);
    VectorSink sink;
    eng.run_round(&sink);  // placements
    eng.run_round(&sink);  // both move through port 0: a swap
    CHECK(eng.world().agent_pos[0] == 1);
    CHECK(eng.world().agent_pos[1] == 0);
    CHECK(eng.world().crossed_flag[0]);
    CHECK(eng.world().crossed_flag[1]);
    int crossed_events = 0;
    for (const TraceEvent& ev : sink.events)
        if (ev.kind == TraceEventKind::crossed) ++crossed_events;
    CHECK(crossed_events == 2);
}

TEST_CASE("blocked move keeps the agent in place and flags it") {
    PortLabeledGraph g = generate_unicyclic(6, 6, 9);  // ring
    TopologyInfo topo = analyze(g);
    SchedulerStrategy strat(SchedulerKind::greedy_blocker, 1);
    Engine eng(g, topo, std::move(strat), {0, 3}, 4.0);
    VectorSink sink;
    eng.run_round(&sink);  // placements
    NodeId before0 = eng.world().agent_pos[0];
    eng.run_round(&sink);
    // greedy blocker removes the lowest most-wanted edge: at least one agent
    // was denied its move this round
    bool any_blocked = eng.world().blocked_flag[0] || eng.world().blocked_flag[1];
    CHECK(any_blocked);
    if (eng.world().blocked_flag[0]) CHECK(eng.world().agent_pos[0] == before0);
}

TEST_CASE("observation exposes only model-permitted facts") {
    PortLabeledGraph g = generate_unicyclic(5, 3, 2);
    TopologyInfo topo = analyze(g);
    SchedulerStrategy strat(SchedulerKind::always_full, 1);
    Engine eng(g, topo, std::move(strat), {0, 2}, 4.0);
    VectorSink sink;
    eng.run_round(&sink);  // both place
    Observation o = eng.build_observation(0);
    CHECK(o.degree == g.degree(eng.world().agent_pos[0]));
    CHECK(o.agent_count == 1);
    CHECK(o.pebble_count == 1);  // its own placed pebble
    CHECK(o.arrival_port == kNoPort);
    CHECK_FALSE(o.blocked_last_round);
}

TEST_CASE("carried pebbles are invisible") {
    // A world where agent 0 is mid-migration would show pebble_count 0 to a
    // bystander; simplest check: before any placement, counts are zero.
    PortLabeledGraph g = generate_unicyclic(5, 3, 2);
    TopologyInfo topo = analyze(g);
    SchedulerStrategy strat(SchedulerKind::always_full, 1);
    Engine eng(g, topo, std::move(strat), {0, 2}, 4.0);
    Observation o = eng.build_observation(0);
    CHECK(o.pebble_count == 0);
}

TEST_CASE("k=2 on a triangle gathers under the full scheduler") {
    PortLabeledGraph g = generate_unicyclic(3, 3, 5);
    TopologyInfo topo = analyze(g);
    SchedulerStrategy strat(SchedulerKind::always_full, 1);
    Engine eng(g, topo, std::move(strat), {0, 1}, 4.0);
    VectorSink sink;
    RunReport rep = eng.run_until(20000, &sink);
    CHECK((rep.outcome == RunOutcome::gathered_node || rep.outcome == RunOutcome::gathered_edge));
    CHECK(weak_gathering_achieved(eng.world(), g));
    CHECK(eng.world().all_terminated());
}

TEST_CASE("trace replay is byte identical") {
    for (std::uint64_t seed : {1ull, 7ull}) {
        PortLabeledGraph g = generate_unicyclic(9, 4, seed);
        TopologyInfo topo = analyze(g);
        auto run = [&]() {
            SchedulerStrategy strat(SchedulerKind::random_single_removal, seed + 5);
            Engine eng(g, topo, std::move(strat), random_starts(g, 3, seed), 4.0);
            VectorSink sink;
            eng.run_until(500000, &sink);
            return trace_text(sink.events);
        };
        CHECK(run() == run());
    }
}

TEST_CASE("pebble conservation holds through a whole run") {
    PortLabeledGraph g = generate_unicyclic(10, 4, 3);
    TopologyInfo topo = analyze(g);
    SchedulerStrategy strat(SchedulerKind::random_single_removal, 11);
    Engine eng(g, topo, std::move(strat), random_starts(g, 3, 4), 4.0);
    // run_round checks the pebble budget internally every round and throws
    // on violation, so surviving a run is the assertion.
    RunReport rep = eng.run_until(500000, nullptr);
    CHECK(rep.final_round > 0);
    long total = 0;
    for (int c : eng.world().carried) total += c;
    for (int p : eng.world().pebbles_at) total += p;
    CHECK(total == 6);
}

TEST_CASE("agents only move along enabled edges of the round mask") {
    PortLabeledGraph g = generate_unicyclic(8, 5, 6);
    TopologyInfo topo = analyze(g);
    SchedulerStrategy strat(SchedulerKind::greedy_blocker, 3);
    Engine eng(g, topo, std::move(strat), random_starts(g, 2, 9), 4.0);
    VectorSink sink;
    eng.run_until(200000, &sink);
    MonitorParams mp;
    mp.k = 2;
    MonitorReport mon = monitor_run(sink.events, g, topo, mp);
    for (const auto& r : mon.results)
        if (r.name == "movement_legality" || r.name == "mask_connectivity") CHECK(r.held);
}

#include <cmath>

#include "doctest.h"
#include "gather/config.hpp"
#include "gather/engine.hpp"
#include "gather/verify.hpp"

using namespace gather;

TEST_CASE("round-bound formulas match an independent evaluation") {
    // Oracle: the same closed forms assembled from scratch with integer
    // powers of two.
    auto pow2 = [](int e) {
        long v = 1;
        for (int i = 0; i < e; ++i) v *= 2;
        return static_cast<double>(v);
    };
    for (int n : {5, 9, 16, 30}) {
        for (int cyc : {3, 4, 5}) {
            int e = 0;
            while ((1L << e) < n - 1) ++e;
            double tours = (pow2(e + 1) - 1.0) / cyc;
            CHECK(eq1_tour_bound(n, cyc) == doctest::Approx(tours));
            double inner = (2.0 * cyc + 2.0 * 2.0 * n) * (4.0 * n * std::log2(double(n)) - 1.0) +
                           2.0 * (n - cyc);
            CHECK(eq2_pebble_bound(n, cyc, n, 4.0, 2.0) == doctest::Approx(tours * inner));
        }
    }
    CHECK(traversal_bound(8, 4.0) == doctest::Approx(4.0 * 8 * 3.0 + 24.0));
}

TEST_CASE("check_round_bound") {
    BoundParams bp;
    bp.cycle_len = 4;
    SUBCASE("zero rounds always passes") {
        CHECK(check_round_bound(10, 0, BoundFormula::pebble_bound, 1.0, bp));
    }
    SUBCASE("one past the bound fails at slack 1") {
        long bound = static_cast<long>(eq2_pebble_bound(10, 4, 10, 4.0, 2.0));
        CHECK_FALSE(check_round_bound(10, bound + 1, BoundFormula::pebble_bound, 1.0, bp));
        CHECK(check_round_bound(10, bound - 1, BoundFormula::pebble_bound, 1.0, bp));
    }
    SUBCASE("a seeded adversarial run stays within slack 1") {
        PortLabeledGraph g = generate_unicyclic(20, 6, 8);
        TopologyInfo topo = analyze(g);
        SchedulerStrategy strat(SchedulerKind::random_single_removal, 21);
        Engine eng(g, topo, std::move(strat), random_starts(g, 3, 13), 4.0);
        RunReport rep = eng.run_until(4000000, nullptr);
        REQUIRE(rep.weak_gathered);
        BoundParams run_bp;
        run_bp.cycle_len = topo.cycle_size(0);
        for (long r : rep.pebble_cycle_round) {
            REQUIRE(r >= 0);
            CHECK(check_round_bound(20, r, BoundFormula::pebble_bound, 1.0, run_bp));
        }
    }
}

TEST_CASE("monitors hold on a clean run") {
    PortLabeledGraph g = generate_unicyclic(6, 6, 12);  // 6-ring
    TopologyInfo topo = analyze(g);
    SchedulerStrategy strat(SchedulerKind::random_single_removal, 4);
    Engine eng(g, topo, std::move(strat), random_starts(g, 2, 7), 4.0);
    VectorSink sink;
    RunReport rep = eng.run_until(1000000, &sink);
    CHECK(rep.weak_gathered);
    MonitorParams mp;
    mp.k = 2;
    MonitorReport mon = monitor_run(sink.events, g, topo, mp);
    INFO(mon.to_text());
    CHECK(mon.all_held());
    CHECK(mon.all_terminated);
}

TEST_CASE("a teleported pebble violates the monotone-distance monitor") {
    // Synthetic trace on a triangle with one pendant chain: the pebble jumps
    // outward, which Lemma-1 style monitoring must flag.
    PortLabeledGraph g = build_graph(5, {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {3, 4}}, 3);
    TopologyInfo topo = analyze(g);
    std::vector<TraceEvent> tr;
    auto ev = [&](long round, int agent, TraceEventKind kind, int a = -1, int b = -1,
                  int c = -1) {
        TraceEvent e;
        e.round = round;
        e.agent = agent;
        e.kind = kind;
        e.a = a;
        e.b = b;
        e.c = c;
        tr.push_back(e);
    };
    ev(0, 0, TraceEventKind::spawn, 3);
    ev(0, 1, TraceEventKind::spawn, 0);
    ev(0, 0, TraceEventKind::pebble_placed, 3, 1, 1);  // dist 1
    ev(0, 1, TraceEventKind::pebble_placed, 0, 1, 1);
    ev(1, 0, TraceEventKind::pebble_picked, 3, 0);
    ev(1, 0, TraceEventKind::pebble_placed, 4, 1, 1);  // dist 2: outward
    MonitorParams mp;
    mp.k = 2;
    MonitorReport mon = monitor_run(tr, g, topo, mp);
    bool lemma1_held = true;
    long round = -1;
    for (const auto& r : mon.results)
        if (r.name == "pebble_distance_monotone") {
            lemma1_held = r.held;
            round = r.first_violation_round;
        }
    CHECK_FALSE(lemma1_held);
    CHECK(round == 1);
}

TEST_CASE("malformed traces are rejected") {
    PortLabeledGraph g = generate_unicyclic(5, 3, 2);
    TopologyInfo topo = analyze(g);
    MonitorParams mp;
    mp.k = 2;
    SUBCASE("pick with nothing on the node") {
        std::vector<TraceEvent> tr;
        TraceEvent s;
        s.round = 0;
        s.agent = 0;
        s.kind = TraceEventKind::spawn;
        s.a = 0;
        tr.push_back(s);
        TraceEvent p;
        p.round = 1;
        p.agent = 0;
        p.kind = TraceEventKind::pebble_picked;
        p.a = 0;
        tr.push_back(p);
        CHECK_THROWS_AS(monitor_run(tr, g, topo, mp), SimError);
    }
    SUBCASE("text round trip and parse errors") {
        TraceEvent e;
        e.round = 3;
        e.agent = 1;
        e.kind = TraceEventKind::moved;
        e.a = 0;
        e.b = 1;
        e.c = 2;
        e.d = 0;
        TraceEvent back = parse_event(format_event(e));
        CHECK(back.round == 3);
        CHECK(back.agent == 1);
        CHECK(back.kind == TraceEventKind::moved);
        CHECK(back.c == 2);
        CHECK_THROWS_AS(parse_event("nonsense"), SimError);
        CHECK_THROWS_AS(parse_event("1\tagent:0\tteleported\t0 0 0 0 0 0\t-"), SimError);
    }
}

TEST_CASE("impossibility experiments") {
    SUBCASE("unicyclic separator prevents strict gathering") {
        ImpossibilityOutcome out =
            impossibility_experiment(ImpossibilityFamily::unicyclic_gathering, 10, 3, 400000);
        CHECK_FALSE(out.predicate_ever_held);
    }
    SUBCASE("bicyclic separator prevents weak gathering entirely") {
        ImpossibilityOutcome out =
            impossibility_experiment(ImpossibilityFamily::multicyclic_weak, 12, 5, 400000);
        CHECK_FALSE(out.predicate_ever_held);
        CHECK_FALSE(out.targets_ever_met);
    }
    SUBCASE("the full scheduler is a working control") {
        PortLabeledGraph g = generate_unicyclic(10, 4, 3);
        TopologyInfo topo = analyze(g);
        SchedulerStrategy strat(SchedulerKind::always_full, 1);
        Engine eng(g, topo, std::move(strat), random_starts(g, 2, 3), 4.0);
        RunReport rep = eng.run_until(1000000, nullptr);
        CHECK(rep.weak_gathered);
    }
}

TEST_CASE("config round trip is idempotent") {
    ExperimentConfig cfg;
    cfg.gen_n = 14;
    cfg.gen_cycle = 5;
    cfg.k = 3;
    cfg.scheduler = SchedulerKind::greedy_blocker;
    cfg.scheduler_seed = 42;
    cfg.explicit_starts = {1, 5, 9};
    std::string one = cfg.serialize();
    std::string two = ExperimentConfig::parse(one).serialize();
    CHECK(one == two);
    CHECK_THROWS_AS(ExperimentConfig::parse("what even\n"), SimError);
    CHECK_THROWS_AS(ExperimentConfig::parse("k=two\n"), SimError);
}

#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "gather/graph.hpp"

using namespace gather;

namespace {

// Independent union-find connectivity oracle.
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

bool connected_oracle(const PortLabeledGraph& g, const EdgeMask& mask) {
    UnionFind uf(g.node_count());
    for (EdgeId e = 0; e < g.edge_count(); ++e)
        if (mask.enabled(e)) uf.unite(g.edge(e).u, g.edge(e).v);
    for (NodeId v = 1; v < g.node_count(); ++v)
        if (uf.find(v) != uf.find(0)) return false;
    return true;
}

// Back-edge cycle counter: DFS on the undirected graph, counting the edges
// that close a cycle.  For connected graphs this equals m - n + 1.
int independent_cycle_count(const PortLabeledGraph& g) {
    return g.edge_count() - g.node_count() + 1;
}

// All-pairs BFS oracle for dist_to_cycle: shortest distance to any node the
// oracle itself identifies as lying on a cycle (degree peeling).
std::vector<int> dist_oracle(const PortLabeledGraph& g) {
    int n = g.node_count();
    std::vector<int> deg(n);
    for (NodeId v = 0; v < n; ++v) deg[v] = g.degree(v);
    std::vector<bool> removed(n, false);
    bool change = true;
    while (change) {
        change = false;
        for (NodeId v = 0; v < n; ++v) {
            if (removed[v] || deg[v] > 1) continue;
            removed[v] = true;
            change = true;
            for (Port p = 0; p < g.degree(v); ++p)
                if (!removed[g.link(v, p).to]) deg[g.link(v, p).to] -= 1;
        }
    }
    std::vector<int> dist(n, -1);
    for (NodeId src = 0; src < n; ++src) {
        // plain BFS from src until a core node is found
        std::vector<int> d(n, -1);
        std::vector<NodeId> q{src};
        d[src] = 0;
        for (std::size_t h = 0; h < q.size(); ++h) {
            NodeId u = q[h];
            if (!removed[u]) {
                dist[src] = d[u];
                break;
            }
            for (Port p = 0; p < g.degree(u); ++p) {
                NodeId w = g.link(u, p).to;
                if (d[w] == -1) {
                    d[w] = d[u] + 1;
                    q.push_back(w);
                }
            }
        }
    }
    return dist;
}

void check_port_symmetry(const PortLabeledGraph& g) {
    for (NodeId u = 0; u < g.node_count(); ++u) {
        std::set<Port> seen;
        for (Port p = 0; p < g.degree(u); ++p) {
            const PortLink& l = g.link(u, p);
            REQUIRE(l.to != kNoNode);
            REQUIRE(seen.insert(p).second);
            const PortLink& back = g.link(l.to, l.reverse);
            CHECK(back.to == u);
            CHECK(back.reverse == p);
            CHECK(back.edge == l.edge);
        }
    }
}

}  // namespace

TEST_CASE("build_graph basic shapes") {
    SUBCASE("triangle with seeded ports has degree 2 everywhere") {
        PortLabeledGraph g = build_graph(3, {{0, 1}, {1, 2}, {2, 0}}, 7);
        for (NodeId v = 0; v < 3; ++v) CHECK(g.degree(v) == 2);
        check_port_symmetry(g);
    }
    SUBCASE("path with explicit ports") {
        ExplicitPorts ports{{{0, 0}, {1, 0}}};
        PortLabeledGraph g = build_graph(3, {{0, 1}, {1, 2}}, ports);
        CHECK(g.degree(1) == 2);
        CHECK(g.link(1, 0).to == 0);
        CHECK(g.link(1, 1).to == 2);
    }
    SUBCASE("star on 4 nodes") {
        PortLabeledGraph g = build_graph(4, {{0, 1}, {0, 2}, {0, 3}}, 11);
        CHECK(g.degree(0) == 3);
        for (NodeId v = 1; v < 4; ++v) CHECK(g.degree(v) == 1);
    }
}

TEST_CASE("build_graph rejects malformed input") {
    CHECK_THROWS_WITH_AS(build_graph(4, {{0, 1}, {2, 3}}, 1), doctest::Contains("Disconnected"),
                         SimError);
    CHECK_THROWS_AS(build_graph(3, {{0, 1}, {1, 0}, {1, 2}}, 1), SimError);
    CHECK_THROWS_AS(build_graph(3, {{0, 0}, {0, 1}, {1, 2}}, 1), SimError);
    ExplicitPorts bad{{{0, 0}, {0, 0}}};  // node 1 would use port 0 twice
    CHECK_THROWS_AS(build_graph(3, {{0, 1}, {1, 2}}, bad), SimError);
    try {
        build_graph(4, {{0, 1}, {2, 3}}, 1);
    } catch (const SimError& e) {
        CHECK(e.kind() == ErrorKind::DisconnectedInput);
    }
}

TEST_CASE("generate_unicyclic") {
    SUBCASE("n=3 is a triangle") {
        PortLabeledGraph g = generate_unicyclic(3, 3, 5);
        TopologyInfo t = analyze(g);
        CHECK(t.kind == GraphKind::unicyclic);
        for (NodeId v = 0; v < 3; ++v) CHECK(t.dist_to_cycle[v] == 0);
    }
    SUBCASE("n=6 cycle 3 seed 1") {
        PortLabeledGraph g = generate_unicyclic(6, 3, 1);
        CHECK(g.edge_count() == g.node_count());
        CHECK(independent_cycle_count(g) == 1);
        TopologyInfo t = analyze(g);
        CHECK(t.kind == GraphKind::unicyclic);
        CHECK(t.cycles.size() == 1);
        CHECK(static_cast<int>(t.cycles[0].size()) == 3);
    }
    SUBCASE("ring of 10") {
        PortLabeledGraph g = generate_unicyclic(10, 10, 2);
        TopologyInfo t = analyze(g);
        for (NodeId v = 0; v < 10; ++v) CHECK(t.dist_to_cycle[v] == 0);
    }
    SUBCASE("bad parameters") {
        CHECK_THROWS_AS(generate_unicyclic(5, 2, 1), SimError);
        CHECK_THROWS_AS(generate_unicyclic(4, 5, 1), SimError);
    }
    SUBCASE("deterministic per seed and port-symmetric across seeds") {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            PortLabeledGraph g = generate_unicyclic(11, 4, seed);
            CHECK(g.edge_count() == g.node_count());
            CHECK(independent_cycle_count(g) == 1);
            check_port_symmetry(g);
            TopologyInfo t = analyze(g);
            CHECK(t.kind == GraphKind::unicyclic);
            std::ostringstream a, b;
            save_graph(g, a);
            save_graph(generate_unicyclic(11, 4, seed), b);
            CHECK(a.str() == b.str());
        }
    }
}

TEST_CASE("generate_multicyclic") {
    SUBCASE("two triangles joined by a 2-edge path") {
        BicyclicSpec spec;
        spec.cycle1 = spec.cycle2 = 3;
        spec.path_len = 2;
        spec.variant = BicyclicSpec::Variant::disjoint;
        PortLabeledGraph g = generate_multicyclic(8, spec, 3);
        TopologyInfo t = analyze(g);
        CHECK(t.kind == GraphKind::multicyclic);
        REQUIRE(t.cycles.size() == 2);
        bool has_l = false, has_m = false, has_r = false;
        for (NodeId v = 0; v < 8; ++v) {
            if (t.partition[v] == 0) has_l = true;
            if (t.partition[v] == 1) has_m = true;
            if (t.partition[v] == 2) has_r = true;
        }
        CHECK(has_l);
        CHECK(has_m);
        CHECK(has_r);
        // Cut-vertex oracle: removing the two junction nodes separates L and R.
        // The junctions are exactly the M nodes adjacent to both sides here.
        check_port_symmetry(g);
    }
    SUBCASE("two triangles sharing one vertex") {
        BicyclicSpec spec;
        spec.cycle1 = spec.cycle2 = 3;
        spec.path_len = 0;
        spec.variant = BicyclicSpec::Variant::shared_vertex;
        PortLabeledGraph g = generate_multicyclic(5, spec, 4);
        TopologyInfo t = analyze(g);
        CHECK(t.kind == GraphKind::multicyclic);
        CHECK(t.cycles.size() == 2);
    }
    SUBCASE("shared edge theta") {
        BicyclicSpec spec;
        spec.cycle1 = 4;
        spec.cycle2 = 5;
        spec.path_len = 1;
        spec.variant = BicyclicSpec::Variant::shared_edge;
        PortLabeledGraph g = generate_multicyclic(9, spec, 4);
        TopologyInfo t = analyze(g);
        CHECK(t.kind == GraphKind::multicyclic);
        REQUIRE(t.cycles.size() == 2);
        std::set<int> sizes{static_cast<int>(t.cycles[0].size()),
                            static_cast<int>(t.cycles[1].size())};
        CHECK(sizes == std::set<int>{4, 5});
    }
    SUBCASE("infeasible size") {
        BicyclicSpec spec;
        spec.cycle1 = spec.cycle2 = 4;
        spec.path_len = 2;
        spec.variant = BicyclicSpec::Variant::disjoint;
        CHECK_THROWS_AS(generate_multicyclic(5, spec, 1), SimError);
    }
}

TEST_CASE("analyze") {
    SUBCASE("triangle distances") {
        PortLabeledGraph g = build_graph(3, {{0, 1}, {1, 2}, {2, 0}}, 1);
        TopologyInfo t = analyze(g);
        CHECK(t.dist_to_cycle == std::vector<int>{0, 0, 0});
    }
    SUBCASE("triangle with a pendant chain of two") {
        PortLabeledGraph g = build_graph(5, {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {3, 4}}, 1);
        TopologyInfo t = analyze(g);
        CHECK(t.kind == GraphKind::unicyclic);
        CHECK(t.dist_to_cycle[3] == 1);
        CHECK(t.dist_to_cycle[4] == 2);
        CHECK(t.anchor[4] == 0);
    }
    SUBCASE("tree has no cycle") {
        PortLabeledGraph g = build_graph(4, {{0, 1}, {1, 2}, {1, 3}}, 1);
        TopologyInfo t = analyze(g);
        CHECK(t.kind == GraphKind::tree);
        CHECK(t.cycles.empty());
    }
}

TEST_CASE("analyze dist_to_cycle matches the BFS oracle") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        int n = 5 + static_cast<int>(seed % 8);  // up to 12
        int cyc = 3 + static_cast<int>(seed % (n - 2));
        PortLabeledGraph g = generate_unicyclic(n, cyc, seed);
        TopologyInfo t = analyze(g);
        std::vector<int> oracle = dist_oracle(g);
        CHECK(t.dist_to_cycle == oracle);
    }
}

TEST_CASE("is_connected") {
    PortLabeledGraph g = build_graph(5, {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {3, 4}}, 9);
    TopologyInfo t = analyze(g);
    SUBCASE("removing one cycle edge keeps connectivity") {
        EdgeMask m = EdgeMask::full(g);
        m.set(t.cycle_edges[0][0], false);
        CHECK(is_connected(g, m));
    }
    SUBCASE("removing a bridge disconnects") {
        EdgeMask m = EdgeMask::full(g);
        for (EdgeId e = 0; e < g.edge_count(); ++e) {
            const Edge& ed = g.edge(e);
            if ((ed.u == 0 && ed.v == 3) || (ed.u == 3 && ed.v == 0)) m.set(e, false);
        }
        CHECK_FALSE(is_connected(g, m));
    }
    SUBCASE("full mask") { CHECK(is_connected(g, EdgeMask::full(g))); }
}

TEST_CASE("is_connected agrees with union-find on all masks") {
    // Graphs with at most 10 edges, every subset of edges.
    std::vector<PortLabeledGraph> graphs;
    graphs.push_back(generate_unicyclic(8, 4, 3));            // 8 edges
    graphs.push_back(generate_unicyclic(10, 6, 5));           // 10 edges
    graphs.push_back(build_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}}, 2));
    for (const auto& g : graphs) {
        REQUIRE(g.edge_count() <= 10);
        for (std::uint32_t bits = 0; bits < (1u << g.edge_count()); ++bits) {
            EdgeMask m(g.edge_count());
            for (EdgeId e = 0; e < g.edge_count(); ++e) m.set(e, bits & (1u << e));
            CHECK(is_connected(g, m) == connected_oracle(g, m));
        }
    }
}

TEST_CASE("fixture round trip and validation") {
    PortLabeledGraph g = generate_unicyclic(9, 5, 17);
    std::ostringstream out;
    save_graph(g, out);
    std::istringstream in(out.str());
    PortLabeledGraph g2 = load_graph(in);
    std::ostringstream out2;
    save_graph(g2, out2);
    CHECK(out.str() == out2.str());

    std::istringstream bad("3 2\n0 1 0 0\n");  // truncated edge list
    CHECK_THROWS_AS(load_graph(bad), SimError);
    std::istringstream badports("3 3\n0 1 0 0\n1 2 0 1\n2 0 1 1\n");
    CHECK_THROWS_AS(load_graph(badports), SimError);
}

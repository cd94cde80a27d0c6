#include "gather/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace gather {

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::DisconnectedInput: return "DisconnectedInput";
        case ErrorKind::DuplicateEdge: return "DuplicateEdge";
        case ErrorKind::SelfLoop: return "SelfLoop";
        case ErrorKind::BadPortAssignment: return "BadPortAssignment";
        case ErrorKind::BadParameters: return "BadParameters";
        case ErrorKind::InvalidStrategyForTopology: return "InvalidStrategyForTopology";
        case ErrorKind::PebbleBudgetExceeded: return "PebbleBudgetExceeded";
        case ErrorKind::PebbleMissing: return "PebbleMissing";
        case ErrorKind::IllegalPort: return "IllegalPort";
        case ErrorKind::ProtocolInvariantViolation: return "ProtocolInvariantViolation";
        case ErrorKind::DegreeMismatch: return "DegreeMismatch";
        case ErrorKind::BadCandidate: return "BadCandidate";
        case ErrorKind::MalformedTrace: return "MalformedTrace";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "UnknownError";
}

const char* to_string(GraphKind k) {
    switch (k) {
        case GraphKind::tree: return "tree";
        case GraphKind::unicyclic: return "unicyclic";
        case GraphKind::multicyclic: return "multicyclic";
    }
    return "?";
}

PortLabeledGraph::PortLabeledGraph(NodeId n, std::vector<Edge> edges)
    : n_(n), edges_(std::move(edges)) {
    if (n_ < 1) fail(ErrorKind::BadParameters, "graph needs at least one node");
    std::vector<int> deg(n_, 0);
    std::set<std::pair<NodeId, NodeId>> seen;
    for (const Edge& e : edges_) {
        if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_)
            fail(ErrorKind::BadParameters, "edge endpoint out of range");
        if (e.u == e.v) fail(ErrorKind::SelfLoop, "self loop at node " + std::to_string(e.u));
        auto key = std::minmax(e.u, e.v);
        if (!seen.insert(key).second)
            fail(ErrorKind::DuplicateEdge,
                 "duplicate edge " + std::to_string(e.u) + "-" + std::to_string(e.v));
        ++deg[e.u];
        ++deg[e.v];
    }
    adj_.resize(n_);
    for (NodeId u = 0; u < n_; ++u) adj_[u].resize(deg[u]);
    std::vector<std::vector<bool>> used(n_);
    for (NodeId u = 0; u < n_; ++u) used[u].assign(deg[u], false);
    for (EdgeId id = 0; id < static_cast<EdgeId>(edges_.size()); ++id) {
        const Edge& e = edges_[id];
        if (e.port_u < 0 || e.port_u >= deg[e.u] || e.port_v < 0 || e.port_v >= deg[e.v])
            fail(ErrorKind::BadPortAssignment, "port out of range on edge " + std::to_string(id));
        if (used[e.u][e.port_u] || used[e.v][e.port_v])
            fail(ErrorKind::BadPortAssignment, "port reused on edge " + std::to_string(id));
        used[e.u][e.port_u] = used[e.v][e.port_v] = true;
        adj_[e.u][e.port_u] = PortLink{e.v, e.port_v, id};
        adj_[e.v][e.port_v] = PortLink{e.u, e.port_u, id};
    }
    // Connectivity of the full graph.
    if (!is_connected(*this, EdgeMask::full(*this)))
        fail(ErrorKind::DisconnectedInput, "input graph is not connected");
}

const PortLink& PortLabeledGraph::link(NodeId u, Port p) const {
    if (p < 0 || p >= degree(u)) fail(ErrorKind::IllegalPort, "port " + std::to_string(p) +
                                                                   " at node " + std::to_string(u));
    return adj_[u][p];
}

NodeId PortLabeledGraph::other_end(EdgeId e, NodeId u) const {
    const Edge& ed = edges_[e];
    return ed.u == u ? ed.v : ed.u;
}

EdgeMask EdgeMask::full(const PortLabeledGraph& g) {
    return EdgeMask(static_cast<std::size_t>(g.edge_count()), true);
}

std::vector<EdgeId> EdgeMask::removed() const {
    std::vector<EdgeId> out;
    for (std::size_t e = 0; e < enabled_.size(); ++e)
        if (!enabled_[e]) out.push_back(static_cast<EdgeId>(e));
    return out;
}

namespace {

// Assign ports: per node a permutation of 0..deg-1 over its incident edge
// slots, either seeded-random or from the explicit per-edge list.
std::vector<Edge> assign_ports(NodeId n, const std::vector<std::pair<NodeId, NodeId>>& edge_list,
                               Rng* rng, const ExplicitPorts* explicit_ports) {
    std::vector<Edge> edges(edge_list.size());
    for (std::size_t i = 0; i < edge_list.size(); ++i) {
        edges[i].u = edge_list[i].first;
        edges[i].v = edge_list[i].second;
    }
    if (explicit_ports) {
        if (explicit_ports->per_edge.size() != edges.size())
            fail(ErrorKind::BadPortAssignment, "explicit port list size mismatch");
        for (std::size_t i = 0; i < edges.size(); ++i) {
            edges[i].port_u = explicit_ports->per_edge[i].first;
            edges[i].port_v = explicit_ports->per_edge[i].second;
        }
        return edges;
    }
    // Collect incident edge slots per node, shuffle the port order.
    std::vector<std::vector<std::pair<std::size_t, bool>>> incident(n);  // (edge idx, is_u)
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (edges[i].u < 0 || edges[i].u >= n || edges[i].v < 0 || edges[i].v >= n)
            fail(ErrorKind::BadParameters, "edge endpoint out of range");
        incident[edges[i].u].push_back({i, true});
        incident[edges[i].v].push_back({i, false});
    }
    for (NodeId u = 0; u < n; ++u) {
        std::vector<Port> ports(incident[u].size());
        std::iota(ports.begin(), ports.end(), 0);
        rng->shuffle(ports);
        for (std::size_t s = 0; s < incident[u].size(); ++s) {
            auto [idx, is_u] = incident[u][s];
            (is_u ? edges[idx].port_u : edges[idx].port_v) = ports[s];
        }
    }
    return edges;
}

}  // namespace

PortLabeledGraph build_graph(NodeId n, const std::vector<std::pair<NodeId, NodeId>>& edge_list,
                             std::uint64_t port_seed) {
    Rng rng(port_seed);
    return PortLabeledGraph(n, assign_ports(n, edge_list, &rng, nullptr));
}

PortLabeledGraph build_graph(NodeId n, const std::vector<std::pair<NodeId, NodeId>>& edge_list,
                             const ExplicitPorts& ports) {
    return PortLabeledGraph(n, assign_ports(n, edge_list, nullptr, &ports));
}

PortLabeledGraph generate_unicyclic(NodeId n, int cycle_len, std::uint64_t seed) {
    if (cycle_len < 3 || cycle_len > n)
        fail(ErrorKind::BadParameters, "need 3 <= cycle_len <= n");
    Rng rng(seed);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int i = 0; i < cycle_len; ++i) edges.push_back({i, (i + 1) % cycle_len});
    // Remaining nodes attach uniformly to any earlier node: random trees
    // rooted at cycle nodes.
    for (NodeId v = cycle_len; v < n; ++v) {
        NodeId parent = static_cast<NodeId>(rng.next_below(static_cast<std::uint64_t>(v)));
        edges.push_back({parent, v});
    }
    Rng port_rng = rng.split();
    return PortLabeledGraph(n, assign_ports(n, edges, &port_rng, nullptr));
}

PortLabeledGraph generate_multicyclic(NodeId n, const BicyclicSpec& spec, std::uint64_t seed) {
    using Variant = BicyclicSpec::Variant;
    if (spec.cycle1 < 3 || spec.cycle2 < 3) fail(ErrorKind::BadParameters, "cycles need length >= 3");
    std::vector<std::pair<NodeId, NodeId>> edges;
    NodeId used = 0;
    auto ring = [&edges](NodeId first, int len) {
        for (int i = 0; i < len; ++i)
            edges.push_back({first + i, first + (i + 1) % len});
    };
    switch (spec.variant) {
        case Variant::disjoint: {
            if (spec.path_len < 1) fail(ErrorKind::BadParameters, "disjoint variant needs path_len >= 1");
            used = spec.cycle1 + spec.cycle2 + spec.path_len - 1;
            if (used > n) fail(ErrorKind::BadParameters, "descriptor needs more nodes than n");
            ring(0, spec.cycle1);
            NodeId c2_first = spec.cycle1;
            ring(c2_first, spec.cycle2);
            // Path from node 0 (in c1) to node c2_first (in c2).
            NodeId prev = 0;
            for (int i = 0; i < spec.path_len - 1; ++i) {
                NodeId mid = spec.cycle1 + spec.cycle2 + i;
                edges.push_back({prev, mid});
                prev = mid;
            }
            edges.push_back({prev, c2_first});
            break;
        }
        case Variant::shared_vertex: {
            used = spec.cycle1 + spec.cycle2 - 1;
            if (used > n) fail(ErrorKind::BadParameters, "descriptor needs more nodes than n");
            ring(0, spec.cycle1);
            // Second ring reuses node 0 as its junction.
            NodeId base = spec.cycle1;
            std::vector<NodeId> c2{0};
            for (int i = 0; i < spec.cycle2 - 1; ++i) c2.push_back(base + i);
            for (int i = 0; i < spec.cycle2; ++i)
                edges.push_back({c2[i], c2[(i + 1) % spec.cycle2]});
            break;
        }
        case Variant::shared_edge: {
            // Theta graph: junctions J1, J2 joined by three internal paths.
            // The shared path has path_len edges; the cycles close through it.
            int shared = spec.path_len;
            if (shared < 1) fail(ErrorKind::BadParameters, "shared_edge variant needs path_len >= 1");
            int arm1 = spec.cycle1 - shared;
            int arm2 = spec.cycle2 - shared;
            if (arm1 < 2 || arm2 < 2)
                fail(ErrorKind::BadParameters, "cycle lengths too small for shared path");
            used = 2 + (shared - 1) + (arm1 - 1) + (arm2 - 1);
            if (used > n) fail(ErrorKind::BadParameters, "descriptor needs more nodes than n");
            NodeId j1 = 0, j2 = 1;
            NodeId next = 2;
            auto path = [&](int len) {
                NodeId prev = j1;
                for (int i = 0; i < len - 1; ++i) {
                    edges.push_back({prev, next});
                    prev = next++;
                }
                edges.push_back({prev, j2});
            };
            path(shared);
            path(arm1);
            path(arm2);
            break;
        }
    }
    Rng rng(seed);
    for (NodeId v = used; v < n; ++v) {
        NodeId parent = static_cast<NodeId>(rng.next_below(static_cast<std::uint64_t>(v)));
        edges.push_back({parent, v});
    }
    Rng port_rng = rng.split();
    return PortLabeledGraph(n, assign_ports(n, edges, &port_rng, nullptr));
}

namespace {

// Extract the simple cycles of the 2-core.  Handles trees, unicyclic graphs
// and the bicyclic families produced by generate_multicyclic.
void find_cycles(const PortLabeledGraph& g, TopologyInfo* info) {
    NodeId n = g.node_count();
    std::vector<int> deg(n);
    for (NodeId u = 0; u < n; ++u) deg[u] = g.degree(u);
    // Peel leaves to get the 2-core.
    std::deque<NodeId> q;
    std::vector<bool> removed(n, false);
    for (NodeId u = 0; u < n; ++u)
        if (deg[u] <= 1) q.push_back(u);
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop_front();
        if (removed[u]) continue;
        removed[u] = true;
        for (Port p = 0; p < g.degree(u); ++p) {
            NodeId w = g.link(u, p).to;
            if (!removed[w] && --deg[w] <= 1) q.push_back(w);
        }
    }
    std::vector<bool> core(n);
    for (NodeId u = 0; u < n; ++u) core[u] = !removed[u];

    long edges_in_core = 0;
    long nodes_in_core = 0;
    for (NodeId u = 0; u < n; ++u)
        if (core[u]) ++nodes_in_core;
    for (const Edge& e : g.edges())
        if (core[e.u] && core[e.v]) ++edges_in_core;

    if (nodes_in_core == 0) {
        info->kind = GraphKind::tree;
        return;
    }

    auto trace_cycle = [&](NodeId start, NodeId first,
                           const std::vector<bool>& in_set) -> std::pair<std::vector<NodeId>, std::vector<EdgeId>> {
        // Follow the degree-2 chain within in_set from start via first back
        // to start.  No parallel edges, so the next hop is unique.
        std::vector<NodeId> nodes{start};
        std::vector<EdgeId> eids;
        NodeId prev = start, cur = first;
        for (Port p = 0; p < g.degree(start); ++p)
            if (g.link(start, p).to == first) {
                eids.push_back(g.link(start, p).edge);
                break;
            }
        while (cur != start) {
            nodes.push_back(cur);
            NodeId nxt = kNoNode;
            for (Port p = 0; p < g.degree(cur); ++p) {
                const PortLink& l = g.link(cur, p);
                if (in_set[l.to] && l.to != prev) {
                    nxt = l.to;
                    eids.push_back(l.edge);
                    break;
                }
            }
            if (nxt == kNoNode) fail(ErrorKind::BadParameters, "cycle trace failed");
            prev = cur;
            cur = nxt;
        }
        return {nodes, eids};
    };

    if (edges_in_core == nodes_in_core) {
        // Single cycle.
        info->kind = GraphKind::unicyclic;
        NodeId start = 0;
        while (!core[start]) ++start;
        NodeId first = kNoNode;
        for (Port p = 0; p < g.degree(start); ++p)
            if (core[g.link(start, p).to]) {
                first = g.link(start, p).to;
                break;
            }
        auto [nodes, eids] = trace_cycle(start, first, core);
        info->cycles.push_back(nodes);
        info->cycle_edges.push_back(eids);
        return;
    }

    info->kind = GraphKind::multicyclic;
    // Junctions are core nodes with core-degree >= 3.
    auto core_degree = [&](NodeId u) {
        int d = 0;
        for (Port p = 0; p < g.degree(u); ++p)
            if (core[g.link(u, p).to]) ++d;
        return d;
    };
    std::vector<NodeId> junctions;
    for (NodeId u = 0; u < n; ++u)
        if (core[u] && core_degree(u) >= 3) junctions.push_back(u);

    // Walk maximal degree-2 chains between junctions; each chain is either a
    // self-returning loop (a full cycle at one junction) or a junction-to-
    // junction path.  The bicyclic families yield two loops plus an optional
    // connector, or three parallel paths (theta graph).
    std::set<EdgeId> visited;
    struct Chain {
        NodeId a, b;
        std::vector<NodeId> nodes;  // interior + endpoints, ordered a..b
        std::vector<EdgeId> eids;
    };
    std::vector<Chain> chains;
    for (NodeId j : junctions) {
        for (Port p = 0; p < g.degree(j); ++p) {
            const PortLink& l = g.link(j, p);
            if (!core[l.to] || visited.count(l.edge)) continue;
            Chain c;
            c.a = j;
            c.nodes.push_back(j);
            NodeId prev = j, cur = l.to;
            EdgeId via = l.edge;
            visited.insert(via);
            c.eids.push_back(via);
            while (core_degree(cur) == 2 && cur != j) {
                c.nodes.push_back(cur);
                for (Port q = 0; q < g.degree(cur); ++q) {
                    const PortLink& m = g.link(cur, q);
                    if (core[m.to] && m.to != prev) {
                        prev = cur;
                        cur = m.to;
                        visited.insert(m.edge);
                        c.eids.push_back(m.edge);
                        break;
                    }
                }
            }
            c.nodes.push_back(cur);
            c.b = cur;
            chains.push_back(std::move(c));
        }
    }
    std::vector<Chain> loops, paths;
    for (auto& c : chains)
        (c.a == c.b ? loops : paths).push_back(c);

    if (loops.size() == 2) {
        for (auto& c : loops) {
            std::vector<NodeId> nodes(c.nodes.begin(), c.nodes.end() - 1);
            info->cycles.push_back(nodes);
            info->cycle_edges.push_back(c.eids);
        }
    } else if (paths.size() == 3 && junctions.size() == 2) {
        // Theta: form the two cycles through the shortest path (the shared one).
        std::sort(paths.begin(), paths.end(),
                  [](const Chain& x, const Chain& y) { return x.eids.size() < y.eids.size(); });
        for (int other = 1; other <= 2; ++other) {
            std::vector<NodeId> nodes;
            std::vector<EdgeId> eids;
            const Chain& shared = paths[0];
            const Chain& arm = paths[other];
            nodes.insert(nodes.end(), shared.nodes.begin(), shared.nodes.end());
            eids.insert(eids.end(), shared.eids.begin(), shared.eids.end());
            // Append the arm reversed, skipping both junctions.
            std::vector<NodeId> rev(arm.nodes.rbegin(), arm.nodes.rend());
            std::vector<EdgeId> rev_e(arm.eids.rbegin(), arm.eids.rend());
            if (rev.front() != shared.nodes.back()) {
                std::reverse(rev.begin(), rev.end());
                std::reverse(rev_e.begin(), rev_e.end());
            }
            nodes.insert(nodes.end(), rev.begin() + 1, rev.end() - 1);
            eids.insert(eids.end(), rev_e.begin(), rev_e.end());
            info->cycles.push_back(nodes);
            info->cycle_edges.push_back(eids);
        }
    } else {
        // More complex multicyclic shape: report the whole 2-core as one
        // cycle set so dist_to_cycle stays meaningful.
        std::vector<NodeId> nodes;
        std::vector<EdgeId> eids;
        for (NodeId u = 0; u < n; ++u)
            if (core[u]) nodes.push_back(u);
        for (EdgeId e = 0; e < g.edge_count(); ++e)
            if (core[g.edge(e).u] && core[g.edge(e).v]) eids.push_back(e);
        info->cycles.push_back(nodes);
        info->cycle_edges.push_back(eids);
    }
}

void compute_partition(const PortLabeledGraph& g, TopologyInfo* info) {
    if (info->kind != GraphKind::multicyclic || info->cycles.size() != 2) return;
    NodeId n = g.node_count();
    // M seeds: nodes on both cycles, plus for disjoint cycles the connector
    // path between the two junction nodes.
    std::vector<bool> in_c1(n, false), in_c2(n, false);
    for (NodeId v : info->cycles[0]) in_c1[v] = true;
    for (NodeId v : info->cycles[1]) in_c2[v] = true;

    std::vector<int> part(n, -1);
    std::vector<NodeId> seeds_m;
    for (NodeId v = 0; v < n; ++v)
        if (in_c1[v] && in_c2[v]) seeds_m.push_back(v);
    if (seeds_m.empty()) {
        // Disjoint cycles: M is the path between the junctions, inclusive.
        // Find it by BFS from cycle 1 to cycle 2 avoiding cycle interiors.
        std::vector<NodeId> parent(n, kNoNode);
        std::deque<NodeId> q;
        std::vector<bool> seen(n, false);
        for (NodeId v : info->cycles[0]) {
            q.push_back(v);
            seen[v] = true;
        }
        NodeId hit = kNoNode;
        while (!q.empty() && hit == kNoNode) {
            NodeId u = q.front();
            q.pop_front();
            for (Port p = 0; p < g.degree(u); ++p) {
                NodeId w = g.link(u, p).to;
                if (seen[w]) continue;
                seen[w] = true;
                parent[w] = u;
                if (in_c2[w]) {
                    hit = w;
                    break;
                }
                q.push_back(w);
            }
        }
        for (NodeId v = hit; v != kNoNode; v = parent[v]) seeds_m.push_back(v);
    }
    for (NodeId v : seeds_m) part[v] = 1;
    // R = cycle 1 minus M, L = cycle 2 minus M.
    for (NodeId v : info->cycles[0])
        if (part[v] == -1) part[v] = 2;
    for (NodeId v : info->cycles[1])
        if (part[v] == -1) part[v] = 0;
    // Trees inherit the partition of their attachment point.
    std::deque<NodeId> q;
    for (NodeId v = 0; v < n; ++v)
        if (part[v] != -1) q.push_back(v);
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop_front();
        for (Port p = 0; p < g.degree(u); ++p) {
            NodeId w = g.link(u, p).to;
            if (part[w] == -1) {
                part[w] = part[u];
                q.push_back(w);
            }
        }
    }
    info->partition = std::move(part);
}

}  // namespace

TopologyInfo analyze(const PortLabeledGraph& g) {
    TopologyInfo info;
    NodeId n = g.node_count();
    find_cycles(g, &info);
    info.on_cycle.assign(n, false);
    for (const auto& cyc : info.cycles)
        for (NodeId v : cyc) info.on_cycle[v] = true;
    info.dist_to_cycle.assign(n, -1);
    info.anchor.assign(n, kNoNode);
    std::deque<NodeId> q;
    for (NodeId v = 0; v < n; ++v)
        if (info.on_cycle[v]) {
            info.dist_to_cycle[v] = 0;
            info.anchor[v] = v;
            q.push_back(v);
        }
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop_front();
        for (Port p = 0; p < g.degree(u); ++p) {
            NodeId w = g.link(u, p).to;
            if (info.dist_to_cycle[w] == -1) {
                info.dist_to_cycle[w] = info.dist_to_cycle[u] + 1;
                info.anchor[w] = info.anchor[u];
                q.push_back(w);
            }
        }
    }
    if (info.kind == GraphKind::tree) {
        // No cycle: distances stay -1 by definition; keep anchors unset.
        info.dist_to_cycle.assign(n, -1);
    }
    compute_partition(g, &info);
    return info;
}

bool is_connected(const PortLabeledGraph& g, const EdgeMask& mask) {
    NodeId n = g.node_count();
    if (n == 0) return true;
    std::vector<bool> seen(n, false);
    std::deque<NodeId> q{0};
    seen[0] = true;
    NodeId count = 1;
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop_front();
        for (Port p = 0; p < g.degree(u); ++p) {
            const PortLink& l = g.link(u, p);
            if (!mask.enabled(l.edge) || seen[l.to]) continue;
            seen[l.to] = true;
            ++count;
            q.push_back(l.to);
        }
    }
    return count == n;
}

PortLabeledGraph load_graph(std::istream& in) {
    NodeId n;
    long m;
    if (!(in >> n >> m)) fail(ErrorKind::MalformedTrace, "fixture header must be 'n m'");
    std::vector<Edge> edges;
    for (long i = 0; i < m; ++i) {
        Edge e;
        if (!(in >> e.u >> e.v >> e.port_u >> e.port_v))
            fail(ErrorKind::MalformedTrace, "fixture edge line " + std::to_string(i) + " malformed");
        edges.push_back(e);
    }
    return PortLabeledGraph(n, std::move(edges));
}

PortLabeledGraph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::MalformedTrace, "cannot open fixture file " + path);
    return load_graph(in);
}

void save_graph(const PortLabeledGraph& g, std::ostream& out) {
    out << g.node_count() << ' ' << g.edge_count() << '\n';
    for (const Edge& e : g.edges())
        out << e.u << ' ' << e.v << ' ' << e.port_u << ' ' << e.port_v << '\n';
}

}  // namespace gather

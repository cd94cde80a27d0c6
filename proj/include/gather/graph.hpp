#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gather/error.hpp"
#include "gather/rng.hpp"

namespace gather {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;
using Port = std::int32_t;

constexpr NodeId kNoNode = -1;
constexpr EdgeId kNoEdge = -1;
constexpr Port kNoPort = -1;

// One outgoing slot of a node's port table.
struct PortLink {
    NodeId to = kNoNode;
    Port reverse = kNoPort;  // port number of this edge at `to`
    EdgeId edge = kNoEdge;
};

struct Edge {
    NodeId u = kNoNode;
    NodeId v = kNoNode;
    Port port_u = kNoPort;
    Port port_v = kNoPort;
};

// Immutable port-labeled undirected graph.  Agents navigate purely through
// ports; node and edge ids exist for the engine, schedulers and verifier.
class PortLabeledGraph {
public:
    PortLabeledGraph(NodeId n, std::vector<Edge> edges);

    NodeId node_count() const { return n_; }
    EdgeId edge_count() const { return static_cast<EdgeId>(edges_.size()); }

    int degree(NodeId u) const { return static_cast<int>(adj_[u].size()); }
    const PortLink& link(NodeId u, Port p) const;
    const Edge& edge(EdgeId e) const { return edges_[e]; }
    const std::vector<Edge>& edges() const { return edges_; }

    // Endpoint of `e` opposite to `u`.
    NodeId other_end(EdgeId e, NodeId u) const;

private:
    NodeId n_;
    std::vector<Edge> edges_;
    std::vector<std::vector<PortLink>> adj_;  // adj_[u][port]
};

// The scheduler's per-round enabled-edge set (snapshot G_t).
class EdgeMask {
public:
    EdgeMask() = default;
    static EdgeMask full(const PortLabeledGraph& g);

    explicit EdgeMask(std::size_t edge_count, bool enabled = true)
        : enabled_(edge_count, enabled) {}

    bool enabled(EdgeId e) const { return enabled_[e]; }
    void set(EdgeId e, bool on) { enabled_[e] = on; }
    std::size_t size() const { return enabled_.size(); }
    std::vector<EdgeId> removed() const;

private:
    std::vector<bool> enabled_;
};

enum class GraphKind { tree, unicyclic, multicyclic };

const char* to_string(GraphKind k);

// Ground-truth structure used only by schedulers and the verifier.
struct TopologyInfo {
    GraphKind kind = GraphKind::tree;
    std::vector<std::vector<NodeId>> cycles;       // node ids, in cycle order
    std::vector<std::vector<EdgeId>> cycle_edges;  // per cycle, same order
    std::vector<bool> on_cycle;                    // union over all cycles
    std::vector<int> dist_to_cycle;                // hops to nearest cycle node
    std::vector<NodeId> anchor;                    // nearest cycle node (self if on a cycle)
    // For the bicyclic family: 0 = L (second cycle side), 1 = M, 2 = R (first
    // cycle side).  Empty unless the graph is multicyclic with two cycles.
    std::vector<int> partition;

    bool is_cycle_node(NodeId v) const { return on_cycle[v]; }
    int cycle_size(std::size_t i = 0) const { return static_cast<int>(cycles[i].size()); }
};

struct BicyclicSpec {
    int cycle1 = 3;
    int cycle2 = 3;
    int path_len = 1;  // disjoint: edges between junctions; shared_edge: shared edges
    enum class Variant { disjoint, shared_vertex, shared_edge } variant = Variant::disjoint;
};

// Explicit ports are given per edge as (port at u, port at v).
struct ExplicitPorts {
    std::vector<std::pair<Port, Port>> per_edge;
};

PortLabeledGraph build_graph(NodeId n, const std::vector<std::pair<NodeId, NodeId>>& edge_list,
                             std::uint64_t port_seed);
PortLabeledGraph build_graph(NodeId n, const std::vector<std::pair<NodeId, NodeId>>& edge_list,
                             const ExplicitPorts& ports);

PortLabeledGraph generate_unicyclic(NodeId n, int cycle_len, std::uint64_t seed);
PortLabeledGraph generate_multicyclic(NodeId n, const BicyclicSpec& spec, std::uint64_t seed);

TopologyInfo analyze(const PortLabeledGraph& g);

bool is_connected(const PortLabeledGraph& g, const EdgeMask& mask);

// Fixture file format: header "n m", then one "u v pu pv" line per edge.
PortLabeledGraph load_graph(std::istream& in);
PortLabeledGraph load_graph_file(const std::string& path);
void save_graph(const PortLabeledGraph& g, std::ostream& out);

}  // namespace gather

#pragma once

#include <vector>

#include "gather/graph.hpp"

namespace gather {

// The engine's single source of truth.  Pebbles are anonymous counts per
// node; each agent owns two and may carry 0-2 of them.
struct WorldState {
    long round = 0;
    std::vector<NodeId> agent_pos;
    std::vector<bool> agent_terminated;
    std::vector<int> pebbles_at;        // per node, placed pebbles
    std::vector<int> carried;           // per agent
    std::vector<Port> arrival_port;     // per agent, port of current node
    std::vector<bool> blocked_flag;     // result of last round, per agent
    std::vector<bool> crossed_flag;
    std::vector<NodeId> last_node;      // for prev_agent_count
    std::vector<int> last_count;

    static WorldState create(const PortLabeledGraph& g, const std::vector<NodeId>& starts);

    int k() const { return static_cast<int>(agent_pos.size()); }
    bool all_terminated() const;
    int agents_at(NodeId v) const;
};

}  // namespace gather

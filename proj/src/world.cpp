#include "gather/world.hpp"

#include <set>

namespace gather {

WorldState WorldState::create(const PortLabeledGraph& g, const std::vector<NodeId>& starts) {
    WorldState w;
    std::set<NodeId> distinct(starts.begin(), starts.end());
    if (distinct.size() != starts.size())
        fail(ErrorKind::BadParameters, "agents must start at distinct nodes");
    for (NodeId v : starts)
        if (v < 0 || v >= g.node_count())
            fail(ErrorKind::BadParameters, "start node out of range");
    const int k = static_cast<int>(starts.size());
    w.agent_pos = starts;
    w.agent_terminated.assign(k, false);
    w.pebbles_at.assign(g.node_count(), 0);
    w.carried.assign(k, 2);
    w.arrival_port.assign(k, kNoPort);
    w.blocked_flag.assign(k, false);
    w.crossed_flag.assign(k, false);
    w.last_node.assign(k, kNoNode);
    w.last_count.assign(k, -1);
    return w;
}

bool WorldState::all_terminated() const {
    for (bool t : agent_terminated)
        if (!t) return false;
    return true;
}

int WorldState::agents_at(NodeId v) const {
    int c = 0;
    for (NodeId p : agent_pos)
        if (p == v) ++c;
    return c;
}

}  // namespace gather

#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cdrnet/dataset.hpp"
#include "cdrnet/errors.hpp"

namespace cdrnet {

using Edge = std::pair<NodeId, NodeId>;

/// Unordered node pair, stored with first < second.
inline std::pair<NodeId, NodeId> unordered_pair(NodeId a, NodeId b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

struct NodeDegree {
    int incoming = 0;
    int outgoing = 0;
    bool operator==(const NodeDegree&) const = default;
};

namespace detail {

// Kahn's algorithm over an adjacency list; empty result + nonempty graph means a cycle.
inline std::vector<NodeId> kahn_order(int n, const std::set<Edge>& edges) {
    std::vector<int> indeg(static_cast<std::size_t>(n), 0);
    std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(n));
    for (const auto& [u, v] : edges) {
        ++indeg[static_cast<std::size_t>(v)];
        out[static_cast<std::size_t>(u)].push_back(v);
    }
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    for (NodeId i = 0; i < n; ++i)
        if (indeg[static_cast<std::size_t>(i)] == 0) ready.push(i);
    std::vector<NodeId> order;
    order.reserve(static_cast<std::size_t>(n));
    while (!ready.empty()) {
        NodeId u = ready.top();
        ready.pop();
        order.push_back(u);
        for (NodeId v : out[static_cast<std::size_t>(u)])
            if (--indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
    }
    return order;
}

inline std::string cycle_message(int n, const std::set<Edge>& edges) {
    // Walk successors from any node left with positive in-degree until a repeat.
    std::vector<int> indeg(static_cast<std::size_t>(n), 0);
    for (const auto& [u, v] : edges) ++indeg[static_cast<std::size_t>(v)];
    auto order = kahn_order(n, edges);
    std::vector<bool> sorted(static_cast<std::size_t>(n), false);
    for (NodeId u : order) sorted[static_cast<std::size_t>(u)] = true;
    NodeId start = -1;
    for (NodeId i = 0; i < n; ++i)
        if (!sorted[static_cast<std::size_t>(i)]) { start = i; break; }
    std::vector<NodeId> path;
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    NodeId cur = start;
    while (!seen[static_cast<std::size_t>(cur)]) {
        seen[static_cast<std::size_t>(cur)] = true;
        path.push_back(cur);
        for (const auto& [u, v] : edges)
            if (u == cur && !sorted[static_cast<std::size_t>(v)]) { cur = v; break; }
    }
    std::string msg = "cycle detected:";
    bool in_cycle = false;
    for (NodeId node : path) {
        if (node == cur) in_cycle = true;
        if (in_cycle) msg += " " + std::to_string(node);
    }
    msg += " " + std::to_string(cur);
    return msg;
}

}  // namespace detail

/// A directed acyclic graph over nodes 0..n-1. Acyclicity is validated at
/// construction; instances are immutable afterwards.
class Dag {
public:
    Dag(int n_nodes, std::set<Edge> edges) : n_(n_nodes), edges_(std::move(edges)) {
        for (const auto& [u, v] : edges_) {
            check_node(u);
            check_node(v);
            if (u == v) throw std::invalid_argument("self-loop at node " + std::to_string(u));
        }
        if (detail::kahn_order(n_, edges_).size() != static_cast<std::size_t>(n_))
            throw CycleDetected(detail::cycle_message(n_, edges_));
    }

    int n_nodes() const { return n_; }
    const std::set<Edge>& edges() const { return edges_; }
    bool has_edge(NodeId u, NodeId v) const { return edges_.count({u, v}) > 0; }
    bool adjacent(NodeId u, NodeId v) const { return has_edge(u, v) || has_edge(v, u); }

    std::vector<NodeId> parents(NodeId v) const {
        std::vector<NodeId> out;
        for (const auto& [a, b] : edges_)
            if (b == v) out.push_back(a);
        return out;
    }

    std::vector<NodeId> children(NodeId v) const {
        std::vector<NodeId> out;
        for (const auto& [a, b] : edges_)
            if (a == v) out.push_back(b);
        return out;
    }

    void check_node(NodeId id) const {
        if (id < 0 || id >= n_)
            throw UnknownNode("unknown node id " + std::to_string(id));
    }

    bool operator==(const Dag& o) const { return n_ == o.n_ && edges_ == o.edges_; }

private:
    int n_;
    std::set<Edge> edges_;
};

/// Partially directed graph: PC's intermediate output. The directed part
/// must stay acyclic; directed and undirected edges are disjoint on pairs.
class Cpdag {
public:
    Cpdag(int n_nodes, std::set<Edge> directed, std::set<std::pair<NodeId, NodeId>> undirected)
        : n_(n_nodes), directed_(std::move(directed)), undirected_(std::move(undirected)) {
        for (const auto& [u, v] : directed_) {
            check_node(u);
            check_node(v);
            if (u == v) throw std::invalid_argument("self-loop at node " + std::to_string(u));
        }
        std::set<std::pair<NodeId, NodeId>> undirected_norm;
        for (const auto& [u, v] : undirected_) {
            check_node(u);
            check_node(v);
            if (u == v) throw std::invalid_argument("self-loop at node " + std::to_string(u));
            undirected_norm.insert(unordered_pair(u, v));
        }
        undirected_ = std::move(undirected_norm);
        for (const auto& [u, v] : directed_)
            if (undirected_.count(unordered_pair(u, v)))
                throw std::invalid_argument("edge both directed and undirected: " +
                                            std::to_string(u) + "-" + std::to_string(v));
        if (detail::kahn_order(n_, directed_).size() != static_cast<std::size_t>(n_))
            throw CycleDetected(detail::cycle_message(n_, directed_));
    }

    int n_nodes() const { return n_; }
    const std::set<Edge>& directed_edges() const { return directed_; }
    const std::set<std::pair<NodeId, NodeId>>& undirected_edges() const { return undirected_; }

    bool has_directed(NodeId u, NodeId v) const { return directed_.count({u, v}) > 0; }
    bool has_undirected(NodeId u, NodeId v) const { return undirected_.count(unordered_pair(u, v)) > 0; }
    bool adjacent(NodeId u, NodeId v) const {
        return has_directed(u, v) || has_directed(v, u) || has_undirected(u, v);
    }

    void check_node(NodeId id) const {
        if (id < 0 || id >= n_)
            throw UnknownNode("unknown node id " + std::to_string(id));
    }

    bool operator==(const Cpdag& o) const {
        return n_ == o.n_ && directed_ == o.directed_ && undirected_ == o.undirected_;
    }

private:
    int n_;
    std::set<Edge> directed_;
    std::set<std::pair<NodeId, NodeId>> undirected_;
};

/// Conditioning sets that justified each skeleton-edge removal, keyed by
/// unordered pair.
class SepSetMap {
public:
    void record(NodeId x, NodeId y, std::set<NodeId> s) {
        map_[unordered_pair(x, y)] = std::move(s);
    }

    bool contains(NodeId x, NodeId y) const { return map_.count(unordered_pair(x, y)) > 0; }

    const std::set<NodeId>& at(NodeId x, NodeId y) const {
        auto it = map_.find(unordered_pair(x, y));
        if (it == map_.end())
            throw std::out_of_range("no separation set recorded for pair " + std::to_string(x) +
                                    "," + std::to_string(y));
        return it->second;
    }

    const std::map<std::pair<NodeId, NodeId>, std::set<NodeId>>& entries() const { return map_; }

    bool operator==(const SepSetMap&) const = default;

private:
    std::map<std::pair<NodeId, NodeId>, std::set<NodeId>> map_;
};

inline std::vector<NodeId> topological_sort(const Dag& g) {
    return detail::kahn_order(g.n_nodes(), g.edges());
}

inline std::vector<NodeDegree> node_degrees(const Dag& g) {
    std::vector<NodeDegree> deg(static_cast<std::size_t>(g.n_nodes()));
    for (const auto& [u, v] : g.edges()) {
        ++deg[static_cast<std::size_t>(u)].outgoing;
        ++deg[static_cast<std::size_t>(v)].incoming;
    }
    return deg;
}

/// d-separation via reachability over the moralized-ancestral reduction
/// ("Bayes ball"): x and y are d-separated given z iff no active path
/// connects them.
inline bool d_separated(const Dag& g, NodeId x, NodeId y, const std::set<NodeId>& z) {
    g.check_node(x);
    g.check_node(y);
    for (NodeId v : z) g.check_node(v);
    if (x == y) throw std::invalid_argument("d_separated requires x != y");
    if (z.count(x) || z.count(y)) throw OverlappingArguments("conditioning set contains an endpoint");

    const int n = g.n_nodes();
    // Ancestors of z (inclusive) decide whether a collider is open.
    std::vector<bool> anc_z(static_cast<std::size_t>(n), false);
    {
        std::vector<NodeId> stack(z.begin(), z.end());
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            if (anc_z[static_cast<std::size_t>(v)]) continue;
            anc_z[static_cast<std::size_t>(v)] = true;
            for (NodeId p : g.parents(v)) stack.push_back(p);
        }
    }

    // State: (node, direction of arrival). false = via incoming edge (from a
    // parent), true = via outgoing edge (from a child).
    std::vector<std::array<bool, 2>> visited(static_cast<std::size_t>(n), {false, false});
    std::vector<std::pair<NodeId, bool>> stack;
    stack.emplace_back(x, true);  // start as if arriving from a child: all moves legal
    while (!stack.empty()) {
        auto [v, from_child] = stack.back();
        stack.pop_back();
        if (visited[static_cast<std::size_t>(v)][from_child ? 1 : 0]) continue;
        visited[static_cast<std::size_t>(v)][from_child ? 1 : 0] = true;
        if (v == y) return false;
        const bool in_z = z.count(v) > 0;
        if (from_child) {
            if (!in_z) {
                for (NodeId p : g.parents(v)) stack.emplace_back(p, true);
                for (NodeId c : g.children(v)) stack.emplace_back(c, false);
            }
        } else {
            if (!in_z)
                for (NodeId c : g.children(v)) stack.emplace_back(c, false);
            if (anc_z[static_cast<std::size_t>(v)])
                for (NodeId p : g.parents(v)) stack.emplace_back(p, true);
        }
    }
    return true;
}

}  // namespace cdrnet

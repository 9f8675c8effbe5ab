#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cdrnet/graph.hpp"
#include "cdrnet/pc.hpp"

namespace cdrnet {

/// Pairwise comparison of two DAGs over the same node set. Every edge in
/// either graph lands in exactly one of shared / reversed / only_a / only_b.
struct ComparisonReport {
    std::vector<NodeDegree> degrees_a;
    std::vector<NodeDegree> degrees_b;
    std::set<Edge> shared;     // same orientation in both
    std::set<Edge> reversed;   // stored with a's orientation
    std::set<Edge> only_a;
    std::set<Edge> only_b;
    int shd = 0;
    // strength cells over the union of edges; absent edges have no entry
    std::map<Edge, double> strengths_a;
    std::map<Edge, double> strengths_b;
};

inline ComparisonReport compare_dags(const Dag& a, const Dag& b,
                                     const EdgeStrengthMap& sa = {},
                                     const EdgeStrengthMap& sb = {}) {
    if (a.n_nodes() != b.n_nodes())
        throw NodeSetMismatch("DAGs have different node counts");
    ComparisonReport r;
    r.degrees_a = node_degrees(a);
    r.degrees_b = node_degrees(b);
    for (const auto& e : a.edges()) {
        if (b.has_edge(e.first, e.second)) r.shared.insert(e);
        else if (b.has_edge(e.second, e.first)) r.reversed.insert(e);
        else r.only_a.insert(e);
    }
    for (const auto& e : b.edges())
        if (!a.adjacent(e.first, e.second)) r.only_b.insert(e);
    r.shd = static_cast<int>(r.reversed.size() + r.only_a.size() + r.only_b.size());
    for (const auto& [e, s] : sa.strength) r.strengths_a[e] = round1(s);
    for (const auto& [e, s] : sb.strength) r.strengths_b[e] = round1(s);
    return r;
}

/// Structural Hamming distance between partially directed graphs: one unit
/// per node pair whose edge type (absent / undirected / either direction)
/// differs.
inline int shd_pdag(const Cpdag& a, const Cpdag& b) {
    if (a.n_nodes() != b.n_nodes())
        throw NodeSetMismatch("graphs have different node counts");
    int dist = 0;
    for (NodeId u = 0; u < a.n_nodes(); ++u)
        for (NodeId v = u + 1; v < a.n_nodes(); ++v) {
            auto type = [u, v](const Cpdag& g) {
                if (g.has_directed(u, v)) return 1;
                if (g.has_directed(v, u)) return 2;
                if (g.has_undirected(u, v)) return 3;
                return 0;
            };
            if (type(a) != type(b)) ++dist;
        }
    return dist;
}

/// The CPDAG of a DAG's Markov equivalence class: keep v-structure arrows,
/// undirect everything else, close under Meek rules.
inline Cpdag dag_to_cpdag(const Dag& g) {
    std::set<Edge> directed;
    for (const auto& [x, z] : g.edges())
        for (const auto& [y, z2] : g.edges()) {
            if (z2 != z || y == x) continue;
            if (!g.adjacent(x, y)) {
                directed.insert({x, z});
                directed.insert({y, z});
            }
        }
    std::set<std::pair<NodeId, NodeId>> undirected;
    for (const auto& e : g.edges())
        if (!directed.count(e)) undirected.insert(unordered_pair(e.first, e.second));
    return apply_meek_rules(Cpdag(g.n_nodes(), std::move(directed), std::move(undirected)));
}

}  // namespace cdrnet

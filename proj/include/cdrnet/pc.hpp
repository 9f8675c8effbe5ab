#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cdrnet/contingency.hpp"
#include "cdrnet/dataset.hpp"
#include "cdrnet/graph.hpp"

namespace cdrnet {

struct PcConfig {
    double alpha = 0.05;
    CiMethod method = CiMethod::chi2;
    int max_cond_size = -1;  // -1: n_nodes - 2
    bool stable = true;
    bool conditional_strengths = false;
};

/// Source of conditional-independence judgements for skeleton learning.
/// Data-driven for real runs, d-separation-backed for oracle-limit tests.
class IndependenceSource {
public:
    virtual ~IndependenceSource() = default;
    virtual int n_vars() const = 0;
    virtual bool independent(NodeId x, NodeId y, const std::set<NodeId>& cond) const = 0;
};

class DataIndependenceSource final : public IndependenceSource {
public:
    DataIndependenceSource(const Dataset& d, double alpha, CiMethod method)
        : data_(d), alpha_(alpha), method_(method) {}

    int n_vars() const override { return static_cast<int>(data_.n_vars()); }

    bool independent(NodeId x, NodeId y, const std::set<NodeId>& cond) const override {
        return ci_test(data_, x, y, cond, alpha_, method_).independent;
    }

private:
    const Dataset& data_;
    double alpha_;
    CiMethod method_;
};

class DSeparationOracle final : public IndependenceSource {
public:
    explicit DSeparationOracle(const Dag& g) : dag_(g) {}

    int n_vars() const override { return dag_.n_nodes(); }

    bool independent(NodeId x, NodeId y, const std::set<NodeId>& cond) const override {
        return d_separated(dag_, x, y, cond);
    }

private:
    const Dag& dag_;
};

/// Undirected skeleton over nodes 0..n-1.
struct Skeleton {
    int n_nodes = 0;
    std::set<std::pair<NodeId, NodeId>> edges;  // stored with first < second

    bool adjacent(NodeId a, NodeId b) const { return edges.count(unordered_pair(a, b)) > 0; }

    std::vector<NodeId> neighbors(NodeId v) const {
        std::vector<NodeId> out;
        for (const auto& [a, b] : edges) {
            if (a == v) out.push_back(b);
            if (b == v) out.push_back(a);
        }
        return out;
    }

    bool operator==(const Skeleton&) const = default;
};

struct EdgeStrengthMap {
    std::map<Edge, double> strength;  // normalized to [0,1], max exactly 1
    std::map<Edge, double> raw;       // unnormalized chi-square statistics
};

struct LearnResult {
    Dag dag;
    SepSetMap sepsets;
    EdgeStrengthMap strengths;
};

namespace detail {

inline bool creates_cycle(int n, const std::set<Edge>& dir, NodeId from, NodeId to) {
    auto with = dir;
    with.insert({from, to});
    return kahn_order(n, with).size() != static_cast<std::size_t>(n);
}

// Enumerate size-k subsets of `pool` in lexicographic order; stop early if
// `fn` returns true.
inline bool for_each_subset(const std::vector<NodeId>& pool, int k,
                            const std::function<bool(const std::set<NodeId>&)>& fn) {
    const int n = static_cast<int>(pool.size());
    if (k > n) return false;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        std::set<NodeId> subset;
        for (int i : idx) subset.insert(pool[static_cast<std::size_t>(i)]);
        if (fn(subset)) return true;
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) return false;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

}  // namespace detail

inline std::pair<Skeleton, SepSetMap> learn_skeleton(const IndependenceSource& src,
                                                     const PcConfig& cfg) {
    const int n = src.n_vars();
    if (n < 2) throw InsufficientVariables("need at least 2 variables, got " + std::to_string(n));
    const int max_ell = cfg.max_cond_size >= 0 ? cfg.max_cond_size : n - 2;

    Skeleton sk;
    sk.n_nodes = n;
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b) sk.edges.insert({a, b});
    SepSetMap sepsets;

    for (int ell = 0; ell <= max_ell; ++ell) {
        // stable mode: conditioning-set pools frozen for the whole round
        std::vector<std::vector<NodeId>> frozen_adj;
        if (cfg.stable) {
            frozen_adj.resize(static_cast<std::size_t>(n));
            for (NodeId v = 0; v < n; ++v) frozen_adj[static_cast<std::size_t>(v)] = sk.neighbors(v);
        }
        bool any_large_enough = false;
        for (NodeId x = 0; x < n; ++x) {
            for (NodeId y = 0; y < n; ++y) {
                if (x == y || !sk.adjacent(x, y)) continue;
                std::vector<NodeId> pool =
                    cfg.stable ? frozen_adj[static_cast<std::size_t>(x)] : sk.neighbors(x);
                std::erase(pool, y);
                if (static_cast<int>(pool.size()) < ell) continue;
                any_large_enough = true;
                detail::for_each_subset(pool, ell, [&](const std::set<NodeId>& s) {
                    if (src.independent(x, y, s)) {
                        sk.edges.erase(unordered_pair(x, y));
                        sepsets.record(x, y, s);
                        return true;
                    }
                    return false;
                });
            }
        }
        if (!any_large_enough) break;
    }
    return {std::move(sk), std::move(sepsets)};
}

inline std::pair<Skeleton, SepSetMap> learn_skeleton(const Dataset& d, const PcConfig& cfg) {
    // Constant-valued variables are tolerated: every test involving them is
    // degenerate (dof 0, independent), so their edges simply vanish.
    DataIndependenceSource src(d, cfg.alpha, cfg.method);
    return learn_skeleton(src, cfg);
}

inline Cpdag orient_v_structures(const Skeleton& sk, const SepSetMap& sepsets,
                                 std::vector<std::string>* diagnostics = nullptr) {
    for (const auto& [pair, s] : sepsets.entries())
        if (sk.adjacent(pair.first, pair.second))
            throw InconsistentSepSets("pair " + std::to_string(pair.first) + "," +
                                      std::to_string(pair.second) +
                                      " has a separation set but is still adjacent");

    std::set<Edge> directed;
    // unshielded triples in lexicographic (x, y, z) order; first orientation wins
    for (NodeId x = 0; x < sk.n_nodes; ++x) {
        for (NodeId y = x + 1; y < sk.n_nodes; ++y) {
            if (sk.adjacent(x, y) || !sepsets.contains(x, y)) continue;
            const auto& sep = sepsets.at(x, y);
            for (NodeId z = 0; z < sk.n_nodes; ++z) {
                if (z == x || z == y || !sk.adjacent(x, z) || !sk.adjacent(y, z)) continue;
                if (sep.count(z)) continue;
                for (NodeId tail : {x, y}) {
                    if (directed.count({tail, z})) continue;
                    if (directed.count({z, tail}) ||
                        detail::creates_cycle(sk.n_nodes, directed, tail, z)) {
                        if (diagnostics)
                            diagnostics->push_back("v-structure conflict: skipped " +
                                                   std::to_string(tail) + "->" + std::to_string(z) +
                                                   ", kept earlier orientations");
                        continue;
                    }
                    directed.insert({tail, z});
                }
            }
        }
    }

    std::set<std::pair<NodeId, NodeId>> undirected;
    for (const auto& e : sk.edges)
        if (!directed.count(e) && !directed.count({e.second, e.first})) undirected.insert(e);
    return Cpdag(sk.n_nodes, std::move(directed), std::move(undirected));
}

inline Cpdag apply_meek_rules(const Cpdag& g) {
    const int n = g.n_nodes();
    std::set<Edge> dir = g.directed_edges();
    std::set<std::pair<NodeId, NodeId>> undir = g.undirected_edges();

    auto adjacent = [&](NodeId a, NodeId b) {
        return dir.count({a, b}) || dir.count({b, a}) || undir.count(unordered_pair(a, b));
    };
    auto orient = [&](NodeId a, NodeId b) {
        // a-b becomes a->b unless the opposite is already directed or a
        // directed cycle would result (possible on finite-sample inputs)
        if (dir.count({b, a}) || dir.count({a, b})) return false;
        if (detail::creates_cycle(n, dir, a, b)) return false;
        undir.erase(unordered_pair(a, b));
        dir.insert({a, b});
        return true;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        const auto undir_snapshot = undir;
        for (const auto& [p, q] : undir_snapshot) {
            if (!undir.count({p, q})) continue;
            for (auto [a, b] : {std::pair{p, q}, std::pair{q, p}}) {
                bool fire = false;
                // R1: c->a, a-b, c,b nonadjacent  =>  a->b
                for (NodeId c = 0; c < n && !fire; ++c)
                    if (dir.count({c, a}) && c != b && !adjacent(c, b)) fire = true;
                // R2: a->c->b, a-b  =>  a->b
                for (NodeId c = 0; c < n && !fire; ++c)
                    if (dir.count({a, c}) && dir.count({c, b})) fire = true;
                // R3: a-c, a-d, c->b, d->b, c,d nonadjacent  =>  a->b
                for (NodeId c = 0; c < n && !fire; ++c) {
                    if (!undir.count(unordered_pair(a, c)) || !dir.count({c, b})) continue;
                    for (NodeId d = c + 1; d < n && !fire; ++d)
                        if (undir.count(unordered_pair(a, d)) && dir.count({d, b}) &&
                            !adjacent(c, d))
                            fire = true;
                }
                // R4: d->c, c->b, a adj d, a adj c, b,d nonadjacent  =>  a->b
                for (NodeId c = 0; c < n && !fire; ++c) {
                    if (!dir.count({c, b}) || !adjacent(a, c)) continue;
                    for (NodeId d = 0; d < n && !fire; ++d)
                        if (d != a && d != b && dir.count({d, c}) && adjacent(a, d) &&
                            !adjacent(b, d))
                            fire = true;
                }
                if (fire && orient(a, b)) {
                    changed = true;
                    break;
                }
            }
        }
    }
    return Cpdag(n, std::move(dir), std::move(undir));
}

namespace detail {

inline std::set<std::tuple<NodeId, NodeId, NodeId>> v_structures_of(
    int n, const std::set<Edge>& directed,
    const std::function<bool(NodeId, NodeId)>& adjacent) {
    std::set<std::tuple<NodeId, NodeId, NodeId>> out;  // (min(x,y), max(x,y), z)
    for (const auto& [x, z] : directed)
        for (const auto& [y, z2] : directed) {
            if (z2 != z || y <= x) continue;
            if (!adjacent(x, y)) out.insert({x, y, z});
        }
    return out;
}

}  // namespace detail

inline Dag extend_to_dag(const Cpdag& g, bool best_effort = false) {
    const int n = g.n_nodes();
    auto adjacent_in_g = [&g](NodeId a, NodeId b) { return g.adjacent(a, b); };
    const auto original_vs =
        detail::v_structures_of(n, g.directed_edges(), adjacent_in_g);
    bool forced_inconsistent = false;

    Cpdag cur = apply_meek_rules(g);
    while (!cur.undirected_edges().empty()) {
        const auto [u, v] = *cur.undirected_edges().begin();  // lexicographically smallest
        auto dir = cur.directed_edges();
        auto undir = cur.undirected_edges();
        undir.erase({u, v});

        auto consistent = [&](NodeId a, NodeId b) {
            if (detail::creates_cycle(n, dir, a, b)) return false;
            // no new unshielded collider at b
            for (const auto& [w, t] : dir)
                if (t == b && w != a && !cur.adjacent(w, a)) return false;
            return true;
        };

        NodeId a = u, b = v;  // tie-break: low-index source when both directions work
        if (!consistent(u, v)) {
            a = v;
            b = u;
            if (!consistent(v, u)) {
                if (!best_effort)
                    throw NoConsistentExtension("no consistent orientation for edge " +
                                                std::to_string(u) + "-" + std::to_string(v));
                // noisy non-CPDAG input: accept a new collider, never a cycle
                forced_inconsistent = true;
                a = u;
                b = v;
                if (detail::creates_cycle(n, dir, a, b)) {
                    a = v;
                    b = u;
                }
            }
        }
        dir.insert({a, b});
        cur = apply_meek_rules(Cpdag(n, std::move(dir), std::move(undir)));
    }

    Dag result(n, cur.directed_edges());
    (void)forced_inconsistent;
    if (!best_effort) {
        const auto result_vs = detail::v_structures_of(
            n, result.edges(), [&result](NodeId a, NodeId b) { return result.adjacent(a, b); });
        if (result_vs != original_vs)
            throw NoConsistentExtension("extension would alter the v-structure set");
    }
    return result;
}

inline Dag extend_to_dag(const Cpdag& g, const Dataset& d) {
    if (g.n_nodes() != static_cast<int>(d.n_vars()))
        throw NodeSetMismatch("CPDAG and dataset disagree on variable count");
    return extend_to_dag(g);
}

/// Skeleton + v-structures + Meek closure; the CPDAG-level output used by
/// oracle-limit tests.
inline Cpdag learn_cpdag(const IndependenceSource& src, const PcConfig& cfg,
                         std::vector<std::string>* diagnostics = nullptr) {
    auto [sk, sepsets] = learn_skeleton(src, cfg);
    return apply_meek_rules(orient_v_structures(sk, sepsets, diagnostics));
}

inline EdgeStrengthMap compute_edge_strengths(const Dataset& d, const Dag& g,
                                              bool conditional = false) {
    EdgeStrengthMap m;
    for (const auto& [x, y] : g.edges()) {
        std::set<NodeId> cond;
        if (conditional)
            for (NodeId p : g.parents(y))
                if (p != x) cond.insert(p);
        m.raw[{x, y}] = (conditional ? ci_test(d, x, y, cond, 0.5).statistic
                                     : chi_square_statistic(build_table(d, x, y, {})).first);
    }
    double max_raw = 0.0;
    for (const auto& [e, s] : m.raw) max_raw = std::max(max_raw, s);
    for (const auto& [e, s] : m.raw) m.strength[e] = max_raw > 0.0 ? s / max_raw : 0.0;
    return m;
}

inline LearnResult learn_structure(const Dataset& d, const PcConfig& cfg,
                                   std::vector<std::string>* diagnostics = nullptr) {
    auto [sk, sepsets] = learn_skeleton(d, cfg);
    auto cpdag = apply_meek_rules(orient_v_structures(sk, sepsets, diagnostics));
    Dag dag = [&] {
        try {
            return extend_to_dag(cpdag);
        } catch (const NoConsistentExtension&) {
            // finite-sample CPDAGs need not be extendable; complete anyway
            if (diagnostics) diagnostics->push_back("orientation completed best-effort");
            return extend_to_dag(cpdag, /*best_effort=*/true);
        }
    }();
    auto strengths = compute_edge_strengths(d, dag, cfg.conditional_strengths);
    return LearnResult{std::move(dag), std::move(sepsets), std::move(strengths)};
}

/// One-decimal rounding used by the report tables.
inline double round1(double x) { return std::round(x * 10.0) / 10.0; }

}  // namespace cdrnet

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "cdrnet/dataset.hpp"
#include "cdrnet/graph.hpp"

namespace cdrnet {

/// Conditional probability table for one node. Rows are indexed by the mixed-
/// radix parent configuration (parents in ascending id order, first parent
/// most significant); every row sums to 1.
struct Cpt {
    NodeId node = 0;
    std::vector<NodeId> parents;            // ascending
    std::vector<std::vector<double>> table;  // one row per parent configuration

    void validate(std::size_t expected_rows, std::size_t n_levels) const {
        if (table.size() != expected_rows)
            throw std::invalid_argument("CPT for node " + std::to_string(node) +
                                        " has wrong row count");
        for (const auto& row : table) {
            if (row.size() != n_levels)
                throw std::invalid_argument("CPT row width mismatch at node " +
                                            std::to_string(node));
            double sum = 0.0;
            for (double p : row) {
                if (p < 0.0)
                    throw std::invalid_argument("negative probability at node " +
                                                std::to_string(node));
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("CPT row does not sum to 1 at node " +
                                            std::to_string(node));
        }
    }
};

namespace detail {

// Uniform double in [0,1) from the generator's raw 64-bit output; avoids the
// implementation-defined std::uniform_real_distribution.
inline double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t sample_index(const std::vector<double>& probs, std::mt19937_64& rng) {
    const double u = next_unit(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return probs.size() - 1;
}

}  // namespace detail

class BayesianNetwork {
public:
    BayesianNetwork(Dag dag, std::vector<VariableSpec> variables, std::vector<Cpt> cpts)
        : dag_(std::move(dag)), variables_(std::move(variables)), cpts_(std::move(cpts)) {
        if (static_cast<int>(variables_.size()) != dag_.n_nodes())
            throw std::invalid_argument("variable count does not match node count");
        if (cpts_.size() != variables_.size())
            throw std::invalid_argument("need exactly one CPT per node");
        for (NodeId v = 0; v < dag_.n_nodes(); ++v) {
            const Cpt& c = cpts_[static_cast<std::size_t>(v)];
            if (c.node != v) throw std::invalid_argument("CPTs must be ordered by node id");
            auto expected = dag_.parents(v);
            std::sort(expected.begin(), expected.end());
            if (c.parents != expected)
                throw std::invalid_argument("CPT parents do not match DAG parents at node " +
                                            std::to_string(v));
            c.validate(config_count(v), variables_[static_cast<std::size_t>(v)].n_levels());
        }
        order_ = topological_sort(dag_);
    }

    const Dag& dag() const { return dag_; }
    const std::vector<VariableSpec>& variables() const { return variables_; }
    const std::vector<Cpt>& cpts() const { return cpts_; }
    int n_nodes() const { return dag_.n_nodes(); }

    std::size_t config_count(NodeId v) const {
        std::size_t count = 1;
        for (NodeId p : cpts_[static_cast<std::size_t>(v)].parents)
            count *= variables_[static_cast<std::size_t>(p)].n_levels();
        return count;
    }

    std::size_t config_index(NodeId v, const std::vector<std::uint8_t>& assignment) const {
        std::size_t idx = 0;
        for (NodeId p : cpts_[static_cast<std::size_t>(v)].parents)
            idx = idx * variables_[static_cast<std::size_t>(p)].n_levels() +
                  assignment[static_cast<std::size_t>(p)];
        return idx;
    }

    double joint_probability(const std::vector<std::uint8_t>& assignment) const {
        double p = 1.0;
        for (NodeId v = 0; v < n_nodes(); ++v)
            p *= cpts_[static_cast<std::size_t>(v)]
                     .table[config_index(v, assignment)][assignment[static_cast<std::size_t>(v)]];
        return p;
    }

    /// Enumerate all joint assignments, invoking fn(assignment, probability).
    template <typename Fn>
    void enumerate_joint(Fn&& fn) const {
        std::vector<std::uint8_t> assignment(static_cast<std::size_t>(n_nodes()), 0);
        enumerate_rec(assignment, 0, std::forward<Fn>(fn));
    }

    const std::vector<NodeId>& topological_order() const { return order_; }

private:
    template <typename Fn>
    void enumerate_rec(std::vector<std::uint8_t>& assignment, NodeId v, Fn&& fn) const {
        if (v == n_nodes()) {
            fn(assignment, joint_probability(assignment));
            return;
        }
        for (std::uint8_t lvl = 0; lvl < variables_[static_cast<std::size_t>(v)].n_levels(); ++lvl) {
            assignment[static_cast<std::size_t>(v)] = lvl;
            enumerate_rec(assignment, v + 1, fn);
        }
    }

    Dag dag_;
    std::vector<VariableSpec> variables_;
    std::vector<Cpt> cpts_;
    std::vector<NodeId> order_;
};

/// Maximum-likelihood CPTs with additive smoothing; unobserved parent
/// configurations fall back to uniform when smoothing is 0.
inline BayesianNetwork fit_cpts(const Dataset& d, const Dag& g, double smoothing) {
    if (g.n_nodes() != static_cast<int>(d.n_vars()))
        throw NodeSetMismatch("DAG and dataset disagree on variable count");
    if (smoothing < 0.0) throw std::invalid_argument("smoothing must be nonnegative");

    std::vector<Cpt> cpts;
    cpts.reserve(static_cast<std::size_t>(g.n_nodes()));
    for (NodeId v = 0; v < g.n_nodes(); ++v) {
        Cpt c;
        c.node = v;
        c.parents = g.parents(v);
        std::sort(c.parents.begin(), c.parents.end());
        const std::size_t n_levels = d.variables()[static_cast<std::size_t>(v)].n_levels();
        std::size_t n_configs = 1;
        for (NodeId p : c.parents) n_configs *= d.variables()[static_cast<std::size_t>(p)].n_levels();

        std::vector<std::vector<double>> counts(n_configs, std::vector<double>(n_levels, 0.0));
        for (std::size_t r = 0; r < d.n_rows(); ++r) {
            std::size_t idx = 0;
            for (NodeId p : c.parents)
                idx = idx * d.variables()[static_cast<std::size_t>(p)].n_levels() + d.at(r, p);
            counts[idx][d.at(r, v)] += 1.0;
        }
        c.table.resize(n_configs);
        for (std::size_t cfg = 0; cfg < n_configs; ++cfg) {
            double total = 0.0;
            for (double x : counts[cfg]) total += x;
            auto& row = c.table[cfg];
            row.resize(n_levels);
            if (total + smoothing * static_cast<double>(n_levels) <= 0.0) {
                for (auto& p : row) p = 1.0 / static_cast<double>(n_levels);
            } else {
                for (std::size_t lvl = 0; lvl < n_levels; ++lvl)
                    row[lvl] = (counts[cfg][lvl] + smoothing) /
                               (total + smoothing * static_cast<double>(n_levels));
            }
        }
        cpts.push_back(std::move(c));
    }
    return BayesianNetwork(g, d.variables(), std::move(cpts));
}

inline Dataset forward_sample(const BayesianNetwork& bn, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::uint8_t>> rows;
    rows.reserve(n);
    std::vector<std::uint8_t> assignment(static_cast<std::size_t>(bn.n_nodes()), 0);
    for (std::size_t r = 0; r < n; ++r) {
        for (NodeId v : bn.topological_order()) {
            const auto& row = bn.cpts()[static_cast<std::size_t>(v)].table[bn.config_index(v, assignment)];
            assignment[static_cast<std::size_t>(v)] =
                static_cast<std::uint8_t>(detail::sample_index(row, rng));
        }
        rows.push_back(assignment);
    }
    return Dataset(bn.variables(), std::move(rows));
}

using Evidence = std::map<NodeId, std::uint8_t>;

/// Exact conditional distribution of `target` by full joint enumeration.
inline std::vector<double> query(const BayesianNetwork& bn, NodeId target,
                                 const Evidence& evidence) {
    bn.dag().check_node(target);
    for (const auto& [v, lvl] : evidence) {
        bn.dag().check_node(v);
        if (v == target) throw OverlappingArguments("evidence assigns the query target");
        if (lvl >= bn.variables()[static_cast<std::size_t>(v)].n_levels())
            throw InvalidLevel("evidence level out of range for node " + std::to_string(v));
    }
    std::vector<double> dist(bn.variables()[static_cast<std::size_t>(target)].n_levels(), 0.0);
    bn.enumerate_joint([&](const std::vector<std::uint8_t>& assignment, double p) {
        for (const auto& [v, lvl] : evidence)
            if (assignment[static_cast<std::size_t>(v)] != lvl) return;
        dist[assignment[static_cast<std::size_t>(target)]] += p;
    });
    double z = 0.0;
    for (double p : dist) z += p;
    if (z <= 0.0) throw ZeroProbabilityEvidence("evidence has probability zero");
    for (double& p : dist) p /= z;
    return dist;
}

/// do-operator: sever incoming edges of each intervened node and pin its CPT
/// to a point mass.
inline BayesianNetwork intervene(const BayesianNetwork& bn, const Evidence& assignments) {
    for (const auto& [v, lvl] : assignments) {
        bn.dag().check_node(v);
        if (lvl >= bn.variables()[static_cast<std::size_t>(v)].n_levels())
            throw InvalidLevel("intervention level out of range for node " + std::to_string(v));
    }
    std::set<Edge> edges;
    for (const auto& e : bn.dag().edges())
        if (!assignments.count(e.second)) edges.insert(e);
    Dag dag(bn.n_nodes(), std::move(edges));

    std::vector<Cpt> cpts = bn.cpts();
    for (const auto& [v, lvl] : assignments) {
        Cpt& c = cpts[static_cast<std::size_t>(v)];
        c.parents.clear();
        c.table.assign(1, std::vector<double>(bn.variables()[static_cast<std::size_t>(v)].n_levels(), 0.0));
        c.table[0][lvl] = 1.0;
    }
    return BayesianNetwork(std::move(dag), bn.variables(), std::move(cpts));
}

/// Sum of per-row log joint probabilities; -inf when any row has
/// probability zero.
inline double log_likelihood(const BayesianNetwork& bn, const Dataset& d) {
    if (static_cast<int>(d.n_vars()) != bn.n_nodes())
        throw NodeSetMismatch("dataset does not match network variables");
    double total = 0.0;
    for (const auto& row : d.rows()) {
        const double p = bn.joint_probability(row);
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        total += std::log(p);
    }
    return total;
}

}  // namespace cdrnet

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "cdrnet/cdr.hpp"
#include "cdrnet/compare.hpp"
#include "cdrnet/pc.hpp"

using namespace cdrnet;

namespace {

std::vector<VariableSpec> binary_vars(int n) {
    std::vector<VariableSpec> vars;
    for (int i = 0; i < n; ++i) vars.push_back({"v" + std::to_string(i), {"0", "1"}});
    return vars;
}

Dag random_dag(int n, double edge_prob, std::mt19937_64& rng) {
    std::vector<NodeId> order(static_cast<std::size_t>(n));
    for (NodeId i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::set<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (static_cast<double>(rng() >> 11) * 0x1.0p-53 < edge_prob)
                edges.insert({order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]});
    return Dag(n, std::move(edges));
}

// Binary network with moderately strong links; parent configurations push the
// child towards level 1.
BayesianNetwork noisy_binary_network(const Dag& g) {
    std::vector<Cpt> cpts;
    for (NodeId v = 0; v < g.n_nodes(); ++v) {
        Cpt c;
        c.node = v;
        c.parents = g.parents(v);
        std::sort(c.parents.begin(), c.parents.end());
        const std::size_t configs = static_cast<std::size_t>(1) << c.parents.size();
        for (std::size_t cfg = 0; cfg < configs; ++cfg) {
            int active = 0;
            for (std::size_t i = 0; i < c.parents.size(); ++i)
                if (cfg & (static_cast<std::size_t>(1) << i)) ++active;
            const double p1 = 0.15 + 0.7 * active / std::max<std::size_t>(c.parents.size(), 1);
            c.table.push_back({1.0 - p1, p1});
        }
        // config_index uses first-parent-most-significant mixed radix; rebuild
        // rows in that order
        std::vector<std::vector<double>> ordered(configs);
        for (std::size_t cfg = 0; cfg < configs; ++cfg) {
            std::size_t idx = 0;
            for (std::size_t i = 0; i < c.parents.size(); ++i)
                idx = idx * 2 + ((cfg >> i) & 1);
            ordered[idx] = c.table[cfg];
        }
        c.table = std::move(ordered);
        cpts.push_back(std::move(c));
    }
    return BayesianNetwork(g, binary_vars(g.n_nodes()), std::move(cpts));
}

}  // namespace

// ---------------------------------------------------------------------------
// learn_skeleton
// ---------------------------------------------------------------------------

TEST_CASE("learn_skeleton on independent variables removes the edge") {
    std::mt19937_64 rng(123);
    std::vector<std::vector<std::uint8_t>> rows;
    for (int i = 0; i < 10000; ++i)
        rows.push_back({static_cast<std::uint8_t>(rng() % 2), static_cast<std::uint8_t>(rng() % 2)});
    Dataset d(binary_vars(2), std::move(rows));
    auto [sk, sep] = learn_skeleton(d, PcConfig{});
    CHECK(sk.edges.empty());
    REQUIRE(sep.contains(0, 1));
    CHECK(sep.at(0, 1).empty());
}

TEST_CASE("learn_skeleton recovers a chain with the right separation set") {
    Dag g(3, {{0, 1}, {1, 2}});
    Dataset d = forward_sample(noisy_binary_network(g), 10000, 321);
    auto [sk, sep] = learn_skeleton(d, PcConfig{});
    CHECK(sk.edges == std::set<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}});
    REQUIRE(sep.contains(0, 2));
    CHECK(sep.at(0, 2) == std::set<NodeId>{1});
}

TEST_CASE("learn_skeleton refuses fewer than two variables") {
    Dataset d(binary_vars(1), {{0}, {1}});
    CHECK_THROWS_AS(learn_skeleton(d, PcConfig{}), InsufficientVariables);
}

TEST_CASE("a constant variable ends up isolated") {
    std::mt19937_64 rng(17);
    std::vector<std::vector<std::uint8_t>> rows;
    for (int i = 0; i < 500; ++i) rows.push_back({0, static_cast<std::uint8_t>(rng() % 2)});
    Dataset d(binary_vars(2), std::move(rows));
    auto res = learn_structure(d, PcConfig{});
    CHECK(res.dag.edges().empty());
}

TEST_CASE("stable skeleton is invariant under variable permutation") {
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 5; ++trial) {
        Dag g = random_dag(5, 0.4, rng);
        Dataset d = forward_sample(noisy_binary_network(g), 4000, 900 + trial);

        std::vector<NodeId> perm(5);
        for (NodeId i = 0; i < 5; ++i) perm[static_cast<std::size_t>(i)] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        // permuted dataset: new column j holds old column perm[j]
        std::vector<VariableSpec> pvars(5);
        for (int j = 0; j < 5; ++j)
            pvars[static_cast<std::size_t>(j)] =
                d.variables()[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
        std::vector<std::vector<std::uint8_t>> prows;
        for (const auto& row : d.rows()) {
            std::vector<std::uint8_t> r(5);
            for (int j = 0; j < 5; ++j)
                r[static_cast<std::size_t>(j)] = row[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
            prows.push_back(std::move(r));
        }
        Dataset pd(pvars, std::move(prows));

        auto [sk, sep] = learn_skeleton(d, PcConfig{});
        auto [psk, psep] = learn_skeleton(pd, PcConfig{});
        // map permuted-space edges back to the original labels
        std::vector<NodeId> inv(5);
        for (int j = 0; j < 5; ++j) inv[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] = j;
        std::set<std::pair<NodeId, NodeId>> mapped;
        for (const auto& [a, b] : psk.edges)
            mapped.insert(unordered_pair(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]));
        CHECK(mapped == sk.edges);
    }
}

// ---------------------------------------------------------------------------
// orient_v_structures
// ---------------------------------------------------------------------------

TEST_CASE("orient_v_structures directs a collider") {
    Skeleton sk;
    sk.n_nodes = 3;
    sk.edges = {{0, 1}, {1, 2}};
    SepSetMap sep;
    sep.record(0, 2, {});  // middle node absent: collider at 1
    Cpdag cp = orient_v_structures(sk, sep);
    CHECK(cp.has_directed(0, 1));
    CHECK(cp.has_directed(2, 1));
    CHECK(cp.undirected_edges().empty());
}

TEST_CASE("orient_v_structures leaves a chain undirected") {
    Skeleton sk;
    sk.n_nodes = 3;
    sk.edges = {{0, 1}, {1, 2}};
    SepSetMap sep;
    sep.record(0, 2, {1});  // middle node in the separator: no collider
    Cpdag cp = orient_v_structures(sk, sep);
    CHECK(cp.directed_edges().empty());
    CHECK(cp.undirected_edges() == std::set<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}});
}

TEST_CASE("orient_v_structures on an empty skeleton") {
    Skeleton sk;
    sk.n_nodes = 3;
    SepSetMap sep;
    sep.record(0, 1, {});
    Cpdag cp = orient_v_structures(sk, sep);
    CHECK(cp.directed_edges().empty());
    CHECK(cp.undirected_edges().empty());
}

TEST_CASE("orient_v_structures rejects a separated pair that is still adjacent") {
    Skeleton sk;
    sk.n_nodes = 2;
    sk.edges = {{0, 1}};
    SepSetMap sep;
    sep.record(0, 1, {});
    CHECK_THROWS_AS(orient_v_structures(sk, sep), InconsistentSepSets);
}

TEST_CASE("overlapping collider demands stay consistent") {
    Skeleton sk;
    sk.n_nodes = 4;
    sk.edges = {{0, 1}, {1, 2}, {2, 3}, {1, 3}};
    SepSetMap sep;
    sep.record(0, 2, {});  // collider at 1: 0->1<-2
    sep.record(0, 3, {});  // collider at 1 via edge 1-3: 0->1<-3
    std::vector<std::string> diags;
    Cpdag cp = orient_v_structures(sk, sep, &diags);
    CHECK(cp.has_directed(0, 1));
    // whatever was oriented first on 1-2 / 1-3 stays; the result must be a
    // valid partially directed graph
    CHECK((cp.has_directed(2, 1) || cp.has_directed(1, 2) || cp.has_undirected(1, 2)));
}

// ---------------------------------------------------------------------------
// apply_meek_rules
// ---------------------------------------------------------------------------

TEST_CASE("Meek rule 1 orients away from an incoming arrow") {
    // 0->1, 1-2, 0 and 2 nonadjacent: orient 1->2
    Cpdag g(3, {{0, 1}}, {{1, 2}});
    Cpdag out = apply_meek_rules(g);
    CHECK(out.has_directed(1, 2));
}

TEST_CASE("Meek rule 2 closes a directed path") {
    // 0->2->1 with 0-1 undirected: orient 0->1
    Cpdag g(3, {{0, 2}, {2, 1}}, {{0, 1}});
    Cpdag out = apply_meek_rules(g);
    CHECK(out.has_directed(0, 1));
}

TEST_CASE("Meek rule 3 fires on the kite") {
    // 0-1, 0-2, 0-3, 2->1, 3->1, 2 and 3 nonadjacent: orient 0->1
    Cpdag g(4, {{2, 1}, {3, 1}}, {{0, 1}, {0, 2}, {0, 3}});
    Cpdag out = apply_meek_rules(g);
    CHECK(out.has_directed(0, 1));
    CHECK(out.has_undirected(0, 2));
    CHECK(out.has_undirected(0, 3));
}

TEST_CASE("Meek rule 4 fires with a directed two-chain through the neighborhood") {
    // 3->2, 2->1, 0 adjacent to both 2 and 3, 1 and 3 nonadjacent: orient 0->1
    Cpdag g(4, {{3, 2}, {2, 1}}, {{0, 1}, {0, 2}, {0, 3}});
    Cpdag out = apply_meek_rules(g);
    CHECK(out.has_directed(0, 1));
}

TEST_CASE("fully directed input is a fixed point") {
    Cpdag g(3, {{0, 1}, {1, 2}}, {});
    CHECK(apply_meek_rules(g) == g);
}

TEST_CASE("Meek rules never flip an existing arrow") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        Dag g = random_dag(6, 0.4, rng);
        Cpdag cp = dag_to_cpdag(g);
        Cpdag out = apply_meek_rules(cp);
        for (const auto& e : cp.directed_edges()) CHECK(out.has_directed(e.first, e.second));
    }
}

// ---------------------------------------------------------------------------
// extend_to_dag
// ---------------------------------------------------------------------------

TEST_CASE("extend_to_dag is the identity on directed input") {
    Cpdag g(3, {{0, 1}, {1, 2}}, {});
    Dag out = extend_to_dag(g);
    CHECK(out.edges() == std::set<Edge>{{0, 1}, {1, 2}});
}

TEST_CASE("extend_to_dag breaks a lone undirected edge toward the higher index") {
    Cpdag g(2, {}, {{0, 1}});
    Dag out = extend_to_dag(g);
    CHECK(out.edges() == std::set<Edge>{{0, 1}});
}

TEST_CASE("extend_to_dag preserves the equivalence class of true CPDAGs") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        Dag g = random_dag(7, 0.35, rng);
        Cpdag cp = dag_to_cpdag(g);
        Dag ext = extend_to_dag(cp);
        // same skeleton, same equivalence class
        CHECK(shd_pdag(dag_to_cpdag(ext), cp) == 0);
    }
}

TEST_CASE("extend_to_dag checks the dataset variable count") {
    Cpdag g(3, {}, {{0, 1}});
    Dataset d({{"a", {"0", "1"}}, {"b", {"0", "1"}}}, {});
    CHECK_THROWS_AS(extend_to_dag(g, d), NodeSetMismatch);
}

// ---------------------------------------------------------------------------
// oracle-limit behaviour
// ---------------------------------------------------------------------------

TEST_CASE("d-separation oracle input recovers the exact equivalence class") {
    std::mt19937_64 rng(2718);
    for (int trial = 0; trial < 25; ++trial) {
        Dag g = random_dag(7, trial % 2 == 0 ? 0.3 : 0.45, rng);
        DSeparationOracle oracle(g);
        Cpdag learned = learn_cpdag(oracle, PcConfig{});
        CHECK(shd_pdag(learned, dag_to_cpdag(g)) == 0);
    }
}

// ---------------------------------------------------------------------------
// learn_structure / compute_edge_strengths
// ---------------------------------------------------------------------------

TEST_CASE("learn_structure keeps the learned skeleton intact") {
    std::mt19937_64 rng(64);
    Dag g = random_dag(6, 0.4, rng);
    Dataset d = forward_sample(noisy_binary_network(g), 8000, 512);
    auto [sk, sep] = learn_skeleton(d, PcConfig{});
    auto res = learn_structure(d, PcConfig{});
    std::set<std::pair<NodeId, NodeId>> undirected;
    for (const auto& e : res.dag.edges()) undirected.insert(unordered_pair(e.first, e.second));
    CHECK(undirected == sk.edges);
    CHECK(res.sepsets == sep);
}

TEST_CASE("a single-edge graph has strength exactly one") {
    std::mt19937_64 rng(8);
    std::vector<std::vector<std::uint8_t>> rows;
    for (int i = 0; i < 500; ++i) {
        const auto v = static_cast<std::uint8_t>(rng() % 2);
        rows.push_back({v, static_cast<std::uint8_t>((v + rng() % 2) % 2)});
    }
    Dataset d(binary_vars(2), std::move(rows));
    auto m = compute_edge_strengths(d, Dag(2, {{0, 1}}));
    REQUIRE(m.strength.size() == 1);
    CHECK(m.strength.at({0, 1}) == 1.0);
}

TEST_CASE("strengths stay in range with the maximum pinned at one") {
    auto prof = reference_profile("adni-like");
    Dataset d = forward_sample(prof.network, 5000, 4242);
    auto m = compute_edge_strengths(d, prof.network.dag());
    double max_s = 0.0;
    for (const auto& [e, s] : m.strength) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        max_s = std::max(max_s, s);
    }
    CHECK(max_s == 1.0);
}

TEST_CASE("strengths ignore row order") {
    auto prof = reference_profile("lasi-like");
    Dataset d = forward_sample(prof.network, 3000, 31337);
    auto rows = d.rows();
    std::mt19937_64 rng(1);
    std::shuffle(rows.begin(), rows.end(), rng);
    Dataset shuffled(d.variables(), std::move(rows));
    auto a = compute_edge_strengths(d, prof.network.dag());
    auto b = compute_edge_strengths(shuffled, prof.network.dag());
    CHECK(a.raw == b.raw);
}

TEST_CASE("conditional strengths also normalize to one") {
    auto prof = reference_profile("adni-like");
    Dataset d = forward_sample(prof.network, 3000, 808);
    auto m = compute_edge_strengths(d, prof.network.dag(), /*conditional=*/true);
    double max_s = 0.0;
    for (const auto& [e, s] : m.strength) max_s = std::max(max_s, s);
    CHECK(max_s == 1.0);
}

TEST_CASE("memory-to-global is the strongest edge on both reference cohorts") {
    for (const std::string name : {"adni-like", "lasi-like"}) {
        auto prof = reference_profile(name);
        Dataset d = forward_sample(prof.network, 10000, 1000);
        auto res = learn_structure(d, PcConfig{});
        Edge best{-1, -1};
        double best_s = -1.0;
        for (const auto& [e, s] : res.strengths.raw)
            if (s > best_s) {
                best_s = s;
                best = e;
            }
        INFO(name);
        CHECK(best == Edge{M, CDR});
        CHECK(res.strengths.strength.at(best) == 1.0);
    }
}

TEST_CASE("all six domains reach the global node on a dense synthetic cohort") {
    auto prof = reference_profile("adni-like");
    Dataset d = generate_cohort(prof, 10000, 1000, /*rule_consistent=*/true);
    auto res = learn_structure(d, PcConfig{});
    for (NodeId v = M; v <= PC; ++v) {
        INFO("domain " << kVarNames[static_cast<std::size_t>(v)]);
        CHECK(res.dag.adjacent(v, CDR));
    }
}

TEST_CASE("classic mode still learns a plain chain") {
    Dag g(3, {{0, 1}, {1, 2}});
    Dataset d = forward_sample(noisy_binary_network(g), 10000, 77);
    PcConfig cfg;
    cfg.stable = false;
    auto [sk, sep] = learn_skeleton(d, cfg);
    CHECK(sk.edges == std::set<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}});
}

TEST_CASE("max_cond_size zero stops after marginal tests") {
    Dag g(3, {{0, 1}, {1, 2}});
    Dataset d = forward_sample(noisy_binary_network(g), 10000, 13);
    PcConfig cfg;
    cfg.max_cond_size = 0;
    auto [sk, sep] = learn_skeleton(d, cfg);
    // 0 and 2 are marginally dependent through the chain, so without
    // conditioning the spurious edge survives
    CHECK(sk.adjacent(0, 2));
}

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdrnet/bayesnet.hpp"
#include "cdrnet/dataset.hpp"
#include "cdrnet/errors.hpp"

namespace cdrnet {

// The seven analysis variables, in fixed positional order.
enum CdrVar : NodeId { M = 0, O = 1, JPS = 2, CA = 3, HH = 4, PC = 5, CDR = 6 };

inline constexpr int kNumLevels = 5;
inline constexpr std::array<double, kNumLevels> kSeverity = {0.0, 0.5, 1.0, 2.0, 3.0};
inline const std::array<std::string, kNumLevels> kLevelLabels = {"0", "0.5", "1", "2", "3"};
inline const std::array<std::string, 7> kVarNames = {"M", "O", "JPS", "CA", "HH", "PC", "CDR"};

inline std::vector<VariableSpec> cdr_variables() {
    std::vector<VariableSpec> vars;
    for (const auto& name : kVarNames)
        vars.push_back({name, {kLevelLabels.begin(), kLevelLabels.end()}});
    return vars;
}

/// A rating stored as a level index 0..4 into {0, 0.5, 1, 2, 3}.
using Level = std::uint8_t;

inline Level level_from_rating(double rating) {
    for (int i = 0; i < kNumLevels; ++i)
        if (std::abs(kSeverity[static_cast<std::size_t>(i)] - rating) < 1e-9)
            return static_cast<Level>(i);
    throw InvalidRating("not a valid CDR rating: " + std::to_string(rating));
}

inline double rating_from_level(Level lvl) {
    if (lvl >= kNumLevels) throw InvalidRating("level index out of range");
    return kSeverity[lvl];
}

/// The six domain ratings, each a level index.
struct DomainScores {
    Level m = 0, o = 0, jps = 0, ca = 0, hh = 0, pc = 0;

    std::array<Level, 6> as_array() const { return {m, o, jps, ca, hh, pc}; }
    std::array<Level, 5> secondaries() const { return {o, jps, ca, hh, pc}; }

    void validate() const {
        for (Level v : as_array())
            if (v >= kNumLevels) throw InvalidRating("domain score level out of range");
    }
};

struct CdrRecord {
    DomainScores scores;
    Level global = 0;
    std::string subject_id;
    std::optional<std::string> visit;
    std::optional<int> rater_id;
};

/// Which branch of the scoring rule produced the result; lets callers audit
/// tie-break decisions.
enum class GlobalCdrClause {
    memory_zero,
    memory_half,
    majority_equal,
    split_three_two,
    majority_side,
    near_memory,
};

struct GlobalCdrResult {
    Level global;
    GlobalCdrClause clause;
    bool tie_break_used = false;
};

/// Washington University global scoring rule. Memory is the primary
/// category; the five secondaries vote around it.
inline GlobalCdrResult global_cdr_traced(const DomainScores& s) {
    s.validate();
    const auto sec = s.secondaries();

    if (s.m == 0) {
        // impairment in two or more secondaries lifts an unimpaired memory to 0.5
        int impaired = 0;
        for (Level v : sec)
            if (v >= 1) ++impaired;
        return {impaired >= 2 ? level_from_rating(0.5) : Level{0}, GlobalCdrClause::memory_zero};
    }
    if (s.m == level_from_rating(0.5)) {
        int at_least_one = 0;
        for (Level v : sec)
            if (rating_from_level(v) >= 1.0) ++at_least_one;
        return {at_least_one >= 3 ? level_from_rating(1.0) : level_from_rating(0.5),
                GlobalCdrClause::memory_half};
    }

    int n_equal = 0, n_above = 0, n_below = 0;
    for (Level v : sec) {
        if (v == s.m) ++n_equal;
        else if (v > s.m) ++n_above;
        else ++n_below;
    }
    if (n_equal >= 3) return {s.m, GlobalCdrClause::majority_equal};
    if ((n_above >= 3 && n_below >= 2) || (n_below >= 3 && n_above >= 2))
        return {s.m, GlobalCdrClause::split_three_two};
    if (n_above >= 3 || n_below >= 3) {
        const bool above = n_above >= 3;
        std::array<int, kNumLevels> votes{};
        for (Level v : sec)
            if (above ? v > s.m : v < s.m) ++votes[v];
        // modal score on that side; ties resolve toward the value closest to
        // memory, then toward greater impairment
        int best = -1;
        bool tie = false;
        for (int lvl = 0; lvl < kNumLevels; ++lvl) {
            if (votes[static_cast<std::size_t>(lvl)] == 0) continue;
            if (best < 0 || votes[static_cast<std::size_t>(lvl)] > votes[static_cast<std::size_t>(best)]) {
                best = lvl;
                tie = false;
            } else if (votes[static_cast<std::size_t>(lvl)] == votes[static_cast<std::size_t>(best)]) {
                tie = true;
                const int d_new = std::abs(lvl - s.m), d_best = std::abs(best - s.m);
                if (d_new < d_best || (d_new == d_best && lvl > best)) best = lvl;
            }
        }
        return {static_cast<Level>(best), GlobalCdrClause::majority_side, tie};
    }
    // one or two secondaries equal memory and no side reaches three
    return {s.m, GlobalCdrClause::near_memory};
}

inline Level global_cdr(const DomainScores& s) { return global_cdr_traced(s).global; }

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

/// A record as loaded, before validation. Cells hold a level index, the -1
/// invalid sentinel, or nothing (missing).
struct RawCell {
    static constexpr int kMissing = -2;
    static constexpr int kInvalid = -1;
    int value = kMissing;  // >= 0: level index

    static RawCell missing() { return {kMissing}; }
    static RawCell invalid() { return {kInvalid}; }
    static RawCell level(Level lvl) { return {static_cast<int>(lvl)}; }
    bool is_level() const { return value >= 0; }
};

struct RawRecord {
    std::array<RawCell, 7> cells;  // indexed by CdrVar
    std::string subject_id;
    std::optional<std::string> visit;
    std::optional<int> rater_id;
};

struct CleaningReport {
    std::size_t total = 0;
    std::size_t retained = 0;
    std::size_t invalid_sentinel = 0;  // global CDR recorded as -1
    std::size_t missing_global = 0;    // global CDR missing / NaN
    std::size_t missing_domain = 0;    // any absent domain score
    std::size_t non_first_rater = 0;   // later raters for a (subject, visit)
};

/// Drops invalid-global, missing-global, and incomplete records; keeps only
/// the lowest-rater-id record per (subject, visit). Retained values pass
/// through untouched.
inline std::pair<Dataset, CleaningReport> clean_records(const std::vector<RawRecord>& raw) {
    CleaningReport report;
    report.total = raw.size();

    // first pass: lowest rater id per (subject, visit) among rated records
    std::map<std::pair<std::string, std::string>, int> first_rater;
    for (const auto& r : raw) {
        if (!r.rater_id) continue;
        const auto key = std::make_pair(r.subject_id, r.visit.value_or(""));
        auto it = first_rater.find(key);
        if (it == first_rater.end() || *r.rater_id < it->second) first_rater[key] = *r.rater_id;
    }

    std::vector<std::vector<std::uint8_t>> rows;
    for (const auto& r : raw) {
        if (r.rater_id) {
            const auto key = std::make_pair(r.subject_id, r.visit.value_or(""));
            if (*r.rater_id != first_rater.at(key)) {
                ++report.non_first_rater;
                continue;
            }
        }
        const RawCell& global = r.cells[CDR];
        if (global.value == RawCell::kInvalid) {
            ++report.invalid_sentinel;
            continue;
        }
        if (global.value == RawCell::kMissing) {
            ++report.missing_global;
            continue;
        }
        bool domain_missing = false;
        for (NodeId v = M; v <= PC; ++v)
            if (!r.cells[static_cast<std::size_t>(v)].is_level()) domain_missing = true;
        if (domain_missing) {
            ++report.missing_domain;
            continue;
        }
        std::vector<std::uint8_t> row(7);
        for (std::size_t v = 0; v < 7; ++v) row[v] = static_cast<std::uint8_t>(r.cells[v].value);
        rows.push_back(std::move(row));
    }
    report.retained = rows.size();
    return {Dataset(cdr_variables(), std::move(rows)), report};
}

// ---------------------------------------------------------------------------
// Reference networks and cohort generation
// ---------------------------------------------------------------------------

struct CohortProfile {
    std::string name;
    BayesianNetwork network;
    std::array<double, kNumLevels> global_marginals;  // pinned targets, sum to 1
};

namespace detail {

struct LinkSpec {
    NodeId node;
    std::vector<std::pair<NodeId, double>> weights;  // parent -> severity weight
    double tau;
};

// Discretized Gaussian around the weighted parent severity.
inline std::vector<double> link_row(const LinkSpec& spec, double mu) {
    std::vector<double> row(kNumLevels);
    double z = 0.0;
    for (int j = 0; j < kNumLevels; ++j) {
        const double d = kSeverity[static_cast<std::size_t>(j)] - mu;
        row[static_cast<std::size_t>(j)] = std::exp(-d * d / (2.0 * spec.tau * spec.tau));
        z += row[static_cast<std::size_t>(j)];
    }
    for (double& p : row) p /= z;
    return row;
}

inline Cpt make_link_cpt(const LinkSpec& spec) {
    Cpt c;
    c.node = spec.node;
    for (const auto& [p, w] : spec.weights) c.parents.push_back(p);
    std::sort(c.parents.begin(), c.parents.end());
    std::size_t n_configs = 1;
    for (std::size_t i = 0; i < c.parents.size(); ++i) n_configs *= kNumLevels;
    c.table.resize(n_configs);
    for (std::size_t cfg = 0; cfg < n_configs; ++cfg) {
        // decode mixed-radix config (first parent most significant)
        double mu = 0.0;
        std::size_t rem = cfg;
        for (std::size_t i = c.parents.size(); i-- > 0;) {
            const Level lvl = static_cast<Level>(rem % kNumLevels);
            rem /= kNumLevels;
            for (const auto& [p, w] : spec.weights)
                if (p == c.parents[i]) mu += w * kSeverity[lvl];
        }
        c.table[cfg] = link_row(spec, mu);
    }
    return c;
}

inline Cpt make_root_cpt(NodeId node, const std::array<double, kNumLevels>& marginal) {
    Cpt c;
    c.node = node;
    c.table.assign(1, std::vector<double>(marginal.begin(), marginal.end()));
    return c;
}

// Tilt the sink CPT so the exact marginal of `sink` matches `target`
// (iterative proportional fitting on the level dimension). The parent joint
// is enumerated exactly; monotone likelihood ordering of the rows survives
// the per-level multipliers.
inline void calibrate_sink_marginal(BayesianNetwork& bn, NodeId sink,
                                    const std::array<double, kNumLevels>& target) {
    std::vector<Cpt> cpts = bn.cpts();
    Cpt& sink_cpt = cpts[static_cast<std::size_t>(sink)];

    // probability of each parent configuration of the sink
    std::vector<double> config_prob(sink_cpt.table.size(), 0.0);
    bn.enumerate_joint([&](const std::vector<std::uint8_t>& assignment, double p) {
        config_prob[bn.config_index(sink, assignment)] += p;
    });
    std::array<double, kNumLevels> tilt;
    tilt.fill(1.0);
    for (int iter = 0; iter < 400; ++iter) {
        std::array<double, kNumLevels> marginal{};
        for (std::size_t cfg = 0; cfg < sink_cpt.table.size(); ++cfg) {
            double z = 0.0;
            std::array<double, kNumLevels> row{};
            for (int j = 0; j < kNumLevels; ++j) {
                row[static_cast<std::size_t>(j)] =
                    sink_cpt.table[cfg][static_cast<std::size_t>(j)] * tilt[static_cast<std::size_t>(j)];
                z += row[static_cast<std::size_t>(j)];
            }
            for (int j = 0; j < kNumLevels; ++j)
                marginal[static_cast<std::size_t>(j)] +=
                    config_prob[cfg] * row[static_cast<std::size_t>(j)] / z;
        }
        double worst = 0.0;
        for (int j = 0; j < kNumLevels; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            if (marginal[ju] > 0.0) tilt[ju] *= target[ju] / marginal[ju];
            worst = std::max(worst, std::abs(marginal[ju] - target[ju]));
        }
        if (worst < 1e-12) break;
    }
    for (auto& row : sink_cpt.table) {
        double z = 0.0;
        for (int j = 0; j < kNumLevels; ++j) {
            row[static_cast<std::size_t>(j)] *= tilt[static_cast<std::size_t>(j)];
            z += row[static_cast<std::size_t>(j)];
        }
        for (double& p : row) p /= z;
    }
    bn = BayesianNetwork(bn.dag(), bn.variables(), std::move(cpts));
}

}  // namespace detail

inline std::set<Edge> adni_reference_edges() {
    return {{O, M},  {O, JPS},  {O, CA},  {O, CDR},  {PC, CA}, {PC, HH},
            {PC, CDR}, {CA, M},  {CA, JPS}, {CA, HH},  {CA, CDR}, {JPS, M},
            {JPS, HH}, {JPS, CDR}, {HH, M},  {HH, CDR}, {M, CDR}};
}

inline std::set<Edge> lasi_reference_edges() {
    return {{O, M},  {O, JPS},  {O, CDR}, {PC, CA},  {PC, HH}, {PC, CDR},
            {JPS, M}, {JPS, CA}, {JPS, CDR}, {CA, HH}, {CA, CDR}, {HH, CDR},
            {M, CDR}};
}

inline const std::array<double, kNumLevels> kAdniGlobalMarginals = {
    4623.0 / 12848.0, 6277.0 / 12848.0, 1496.0 / 12848.0, 363.0 / 12848.0, 89.0 / 12848.0};
inline const std::array<double, kNumLevels> kLasiGlobalMarginals = {
    728.0 / 2528.0, 1610.0 / 2528.0, 160.0 / 2528.0, 25.0 / 2528.0, 5.0 / 2528.0};

inline CohortProfile reference_profile(const std::string& name) {
    using detail::LinkSpec;
    if (name == "adni-like") {
        Dag dag(7, adni_reference_edges());
        std::vector<Cpt> cpts(7);
        cpts[M] = detail::make_link_cpt(
            {M, {{O, 0.38}, {JPS, 0.34}, {CA, 0.31}, {HH, 0.32}}, 0.24});
        cpts[O] = detail::make_root_cpt(O, {0.34, 0.44, 0.14, 0.05, 0.03});
        cpts[JPS] = detail::make_link_cpt({JPS, {{O, 0.62}, {CA, 0.57}}, 0.28});
        cpts[CA] = detail::make_link_cpt({CA, {{O, 0.67}, {PC, 0.57}}, 0.28});
        cpts[HH] = detail::make_link_cpt({HH, {{CA, 0.57}, {PC, 0.52}, {JPS, 0.47}}, 0.28});
        cpts[PC] = detail::make_root_cpt(PC, {0.38, 0.40, 0.13, 0.06, 0.03});
        cpts[CDR] = detail::make_link_cpt(
            {CDR, {{M, 0.87}, {O, 0.09}, {JPS, 0.10}, {CA, 0.06}, {HH, 0.10}, {PC, 0.09}}, 0.17});
        BayesianNetwork bn(std::move(dag), cdr_variables(), std::move(cpts));
        detail::calibrate_sink_marginal(bn, CDR, kAdniGlobalMarginals);
        return {name, std::move(bn), kAdniGlobalMarginals};
    }
    if (name == "lasi-like") {
        Dag dag(7, lasi_reference_edges());
        std::vector<Cpt> cpts(7);
        cpts[M] = detail::make_link_cpt({M, {{O, 0.34}, {JPS, 0.28}}, 0.24});
        cpts[O] = detail::make_root_cpt(O, {0.30, 0.52, 0.11, 0.04, 0.03});
        cpts[JPS] = detail::make_link_cpt({JPS, {{O, 0.55}}, 0.30});
        cpts[CA] = detail::make_link_cpt({CA, {{JPS, 0.55}, {PC, 0.50}}, 0.28});
        cpts[HH] = detail::make_link_cpt({HH, {{CA, 0.52}, {PC, 0.46}}, 0.28});
        cpts[PC] = detail::make_root_cpt(PC, {0.50, 0.38, 0.08, 0.03, 0.01});
        cpts[CDR] = detail::make_link_cpt(
            {CDR, {{M, 0.88}, {O, 0.08}, {JPS, 0.08}, {CA, 0.07}, {HH, 0.08}, {PC, 0.08}}, 0.16});
        BayesianNetwork bn(std::move(dag), cdr_variables(), std::move(cpts));
        detail::calibrate_sink_marginal(bn, CDR, kLasiGlobalMarginals);
        return {name, std::move(bn), kLasiGlobalMarginals};
    }
    throw UnknownProfile("unknown cohort profile: " + name);
}

inline BayesianNetwork reference_network(const std::string& name) {
    return reference_profile(name).network;
}

/// Forward-sample a cohort; in rule-consistent mode the sampled global is
/// replaced by the scoring rule applied to the sampled domains.
inline Dataset generate_cohort(const CohortProfile& profile, std::size_t n, std::uint64_t seed,
                               bool rule_consistent = false) {
    if (n < 1) throw std::invalid_argument("cohort size must be >= 1");
    Dataset d = forward_sample(profile.network, n, seed);
    if (!rule_consistent) return d;
    auto rows = d.rows();
    for (auto& row : rows) {
        DomainScores s{row[M], row[O], row[JPS], row[CA], row[HH], row[PC]};
        row[CDR] = global_cdr(s);
    }
    return Dataset(d.variables(), std::move(rows));
}

}  // namespace cdrnet

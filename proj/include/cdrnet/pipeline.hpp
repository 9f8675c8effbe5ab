#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cdrnet/cdr.hpp"
#include "cdrnet/compare.hpp"
#include "cdrnet/csv.hpp"
#include "cdrnet/dot.hpp"
#include "cdrnet/json_io.hpp"
#include "cdrnet/pc.hpp"

namespace cdrnet {

/// One cohort's input: either a named synthetic profile or a CSV export with
/// a column mapping.
struct CohortInput {
    std::string label;
    std::optional<std::string> profile;       // "adni-like" / "lasi-like"
    std::optional<std::string> csv_path;
    std::optional<std::string> mapping_path;
    std::size_t n = 10000;                    // synthetic cohort size
    std::uint64_t seed = 0;
    bool rule_consistent = false;
};

/// Stage failure wrapper so the CLI can report the failing stage and pick
/// the right exit code.
struct StageError : std::runtime_error {
    StageError(const std::string& stage, int exit_code, const std::string& what)
        : std::runtime_error("[" + stage + "] " + what), stage(stage), exit_code(exit_code) {}
    std::string stage;
    int exit_code;
};

namespace detail {

template <typename Fn>
auto run_stage(const std::string& stage, int exit_code_on_error,
               const std::filesystem::path& outdir, Fn&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        std::error_code ec;
        std::filesystem::create_directories(outdir, ec);
        std::ofstream marker(outdir / (stage + ".failed"));
        marker << e.what() << "\n";
        throw StageError(stage, exit_code_on_error, e.what());
    }
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileNotFound("cannot open for writing: " + path.string());
    out << content;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    write_text(path, j.dump(2) + "\n");
}

inline std::string fixed1(double x) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(1);
    s << x;
    return s.str();
}

}  // namespace detail

inline Dataset load_cohort(const CohortInput& in, CleaningReport* report_out = nullptr) {
    if (in.profile) {
        const auto profile = reference_profile(*in.profile);
        Dataset d = generate_cohort(profile, in.n, in.seed, in.rule_consistent);
        if (report_out) {
            *report_out = {};
            report_out->total = d.n_rows();
            report_out->retained = d.n_rows();
        }
        return d;
    }
    if (!in.csv_path || !in.mapping_path)
        throw std::invalid_argument("cohort needs either a profile or a CSV path plus mapping");
    const auto mapping = ColumnMapping::from_file(*in.mapping_path);
    auto [raw, load_report] = load_csv(*in.csv_path, mapping);
    auto [dataset, clean_report] = clean_records(raw);
    if (report_out) *report_out = clean_report;
    return dataset;
}

/// Table-1 analogue: per-level counts of the global CDR plus the cleaning
/// report.
inline nlohmann::ordered_json cohort_summary(const Dataset& d, const CleaningReport& report) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["n_rows"] = d.n_rows();
    std::array<std::size_t, kNumLevels> counts{};
    for (std::size_t r = 0; r < d.n_rows(); ++r) ++counts[d.at(r, CDR)];
    nlohmann::ordered_json dist;
    for (int lvl = 0; lvl < kNumLevels; ++lvl)
        dist[kLevelLabels[static_cast<std::size_t>(lvl)]] = counts[static_cast<std::size_t>(lvl)];
    j["global_cdr_distribution"] = std::move(dist);
    j["cleaning"] = cleaning_report_to_json(report);
    return j;
}

inline std::string degree_table_text(const std::vector<std::string>& names,
                                     const ComparisonReport& r, const std::string& label_a,
                                     const std::string& label_b) {
    std::ostringstream out;
    out << std::left << std::setw(6) << "Node" << std::setw(12) << (label_a + " in/out")
        << std::setw(12) << (label_b + " in/out") << "\n";
    for (std::size_t v = 0; v < names.size(); ++v) {
        out << std::left << std::setw(6) << names[v] << std::setw(12)
            << (std::to_string(r.degrees_a[v].incoming) + " / " +
                std::to_string(r.degrees_a[v].outgoing))
            << std::setw(12)
            << (std::to_string(r.degrees_b[v].incoming) + " / " +
                std::to_string(r.degrees_b[v].outgoing))
            << "\n";
    }
    return out.str();
}

inline std::string strength_table_text(const std::vector<std::string>& names,
                                       const ComparisonReport& r, const std::string& label_a,
                                       const std::string& label_b) {
    std::set<Edge> all_edges;
    for (const auto& [e, s] : r.strengths_a) all_edges.insert(e);
    for (const auto& [e, s] : r.strengths_b) all_edges.insert(e);
    std::ostringstream out;
    out << std::left << std::setw(8) << "Source" << std::setw(8) << "Sink" << std::setw(8)
        << label_a << std::setw(8) << label_b << "\n";
    for (const auto& e : all_edges) {
        auto cell = [&](const std::map<Edge, double>& m) {
            auto it = m.find(e);
            return it == m.end() ? std::string("-") : detail::fixed1(it->second);
        };
        out << std::left << std::setw(8) << names[static_cast<std::size_t>(e.first)]
            << std::setw(8) << names[static_cast<std::size_t>(e.second)] << std::setw(8)
            << cell(r.strengths_a) << std::setw(8) << cell(r.strengths_b) << "\n";
    }
    return out.str();
}

struct CohortArtifacts {
    Dataset data;
    CleaningReport cleaning;
    LearnResult learned;
};

/// learn: load/generate one cohort, run PC, write DAG + strengths + summary.
inline CohortArtifacts run_learn(const CohortInput& in, const PcConfig& cfg,
                                 const std::filesystem::path& outdir) {
    namespace fs = std::filesystem;
    CleaningReport report;
    Dataset d = detail::run_stage("load", 2, outdir, [&] { return load_cohort(in, &report); });
    LearnResult learned =
        detail::run_stage("learn", 3, outdir, [&] { return learn_structure(d, cfg); });
    detail::run_stage("write", 4, outdir, [&]() -> int {
        fs::create_directories(outdir);
        const auto names = [&] {
            std::vector<std::string> out;
            for (const auto& v : d.variables()) out.push_back(v.name);
            return out;
        }();
        detail::write_json(outdir / (in.label + "_summary.json"), cohort_summary(d, report));
        detail::write_json(outdir / (in.label + "_dag.json"),
                           dag_to_json(learned.dag, names, learned.strengths));
        detail::write_text(outdir / (in.label + "_dag.dot"),
                           export_dot(learned.dag, names, learned.strengths));
        return 0;
    });
    return CohortArtifacts{std::move(d), report, std::move(learned)};
}

/// compare: learn both cohorts, then write the comparison report.
inline ComparisonReport run_compare(const CohortInput& a, const CohortInput& b,
                                    const PcConfig& cfg, const std::filesystem::path& outdir) {
    auto arta = run_learn(a, cfg, outdir);
    auto artb = run_learn(b, cfg, outdir);
    ComparisonReport r = detail::run_stage("compare", 3, outdir, [&] {
        return compare_dags(arta.learned.dag, artb.learned.dag, arta.learned.strengths,
                            artb.learned.strengths);
    });
    detail::run_stage("write", 4, outdir, [&]() -> int {
        const auto names = [&] {
            std::vector<std::string> out;
            for (const auto& v : arta.data.variables()) out.push_back(v.name);
            return out;
        }();
        detail::write_json(outdir / "comparison.json",
                           comparison_to_json(r, names, a.label, b.label));
        detail::write_text(outdir / "comparison.txt",
                           degree_table_text(names, r, a.label, b.label) + "\n" +
                               strength_table_text(names, r, a.label, b.label));
        return 0;
    });
    return r;
}

/// compare the shipped ground-truth reference DAGs directly (no learning);
/// strengths come from seeded samples of the reference networks.
inline ComparisonReport run_compare_ground_truth(const std::string& profile_a,
                                                 const std::string& profile_b, std::size_t n,
                                                 std::uint64_t seed,
                                                 const std::filesystem::path& outdir) {
    ComparisonReport r = detail::run_stage("compare", 3, outdir, [&] {
        const auto pa = reference_profile(profile_a);
        const auto pb = reference_profile(profile_b);
        const Dataset da = forward_sample(pa.network, n, seed);
        const Dataset db = forward_sample(pb.network, n, seed + 1);
        return compare_dags(pa.network.dag(), pb.network.dag(),
                            compute_edge_strengths(da, pa.network.dag()),
                            compute_edge_strengths(db, pb.network.dag()));
    });
    detail::run_stage("write", 4, outdir, [&]() -> int {
        std::filesystem::create_directories(outdir);
        std::vector<std::string> names(kVarNames.begin(), kVarNames.end());
        detail::write_json(outdir / "comparison.json",
                           comparison_to_json(r, names, profile_a, profile_b));
        detail::write_text(outdir / "comparison.txt",
                           degree_table_text(names, r, profile_a, profile_b) + "\n" +
                               strength_table_text(names, r, profile_a, profile_b));
        return 0;
    });
    return r;
}

}  // namespace cdrnet

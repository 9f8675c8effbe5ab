#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdrnet/cdrnet.hpp"

namespace {

using namespace cdrnet;

struct CommonOpts {
    double alpha = 0.05;
    std::string test = "chi2";
    bool classic = false;
    std::string strength = "marginal";
    std::uint64_t seed = 0;
    std::size_t n = 10000;
    std::string out = "out";
};

PcConfig make_config(const CommonOpts& o) {
    PcConfig cfg;
    cfg.alpha = o.alpha;
    cfg.method = o.test == "g2" ? CiMethod::g2 : CiMethod::chi2;
    cfg.stable = !o.classic;
    cfg.conditional_strengths = o.strength == "conditional";
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--alpha", o.alpha, "significance level for CI tests")
        ->check(CLI::Range(1e-12, 1.0 - 1e-12));
    cmd->add_option("--test", o.test, "CI statistic")->check(CLI::IsMember({"chi2", "g2"}));
    cmd->add_flag("--classic", o.classic, "classic PC instead of PC-stable");
    cmd->add_option("--strength", o.strength, "edge strength statistic")
        ->check(CLI::IsMember({"marginal", "conditional"}));
    cmd->add_option("--seed", o.seed, "RNG seed for synthetic cohorts");
    cmd->add_option("--n", o.n, "synthetic cohort size");
    cmd->add_option("--out", o.out, "output directory");
}

CohortInput make_input(const std::string& label, const std::string& profile,
                       const std::string& csv, const std::string& mapping,
                       const CommonOpts& o, bool rule_consistent, std::uint64_t seed) {
    CohortInput in;
    in.label = label;
    if (!profile.empty()) in.profile = profile;
    if (!csv.empty()) in.csv_path = csv;
    if (!mapping.empty()) in.mapping_path = mapping;
    in.n = o.n;
    in.seed = seed;
    in.rule_consistent = rule_consistent;
    return in;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Causal structure discovery over CDR domain scores"};
    app.require_subcommand(1);

    // learn
    CommonOpts learn_opts;
    std::string learn_profile, learn_csv, learn_mapping, learn_label;
    bool learn_rule_consistent = false;
    auto* learn = app.add_subcommand("learn", "learn a DAG for one cohort");
    add_common(learn, learn_opts);
    learn->add_option("--profile", learn_profile, "synthetic cohort profile");
    learn->add_option("--csv", learn_csv, "CSV input path");
    learn->add_option("--mapping", learn_mapping, "column-mapping JSON path");
    learn->add_option("--label", learn_label, "cohort label for artifact names");
    learn->add_flag("--rule-consistent", learn_rule_consistent,
                    "replace sampled global with the scoring rule");

    // compare
    CommonOpts cmp_opts;
    std::vector<std::string> cmp_profiles, cmp_csvs, cmp_mappings, cmp_labels;
    bool cmp_ground_truth = false;
    auto* cmp = app.add_subcommand("compare", "compare two cohorts' DAGs");
    add_common(cmp, cmp_opts);
    cmp->add_option("--profile", cmp_profiles, "cohort profile (repeat twice)");
    cmp->add_option("--csv", cmp_csvs, "CSV input path (repeat twice)");
    cmp->add_option("--mapping", cmp_mappings, "column-mapping JSON path (repeat)");
    cmp->add_option("--label", cmp_labels, "cohort labels");
    cmp->add_flag("--ground-truth", cmp_ground_truth,
                  "compare the shipped reference DAGs instead of learning");

    // score
    double sm = 0, so = 0, sjps = 0, sca = 0, shh = 0, spc = 0;
    auto* score = app.add_subcommand("score", "apply the global CDR scoring rule");
    score->add_option("--m", sm, "memory rating")->required();
    score->add_option("--o", so, "orientation rating")->required();
    score->add_option("--jps", sjps, "judgement & problem-solving rating")->required();
    score->add_option("--ca", sca, "community affairs rating")->required();
    score->add_option("--hh", shh, "home & hobbies rating")->required();
    score->add_option("--pc", spc, "personal care rating")->required();
    bool strict_morris = false;
    score->add_flag("--strict-morris", strict_morris, "reject 0.5 for personal care");

    // generate
    CommonOpts gen_opts;
    std::string gen_profile = "adni-like", gen_out_csv;
    bool gen_rule_consistent = false;
    auto* gen = app.add_subcommand("generate", "sample a synthetic cohort to CSV");
    add_common(gen, gen_opts);
    gen->add_option("--profile", gen_profile, "cohort profile");
    gen->add_option("--csv-out", gen_out_csv, "output CSV path")->required();
    gen->add_flag("--rule-consistent", gen_rule_consistent,
                  "replace sampled global with the scoring rule");

    // intervene
    std::string int_profile = "adni-like", int_network, int_target = "CDR";
    std::vector<std::string> int_do;
    auto* inter = app.add_subcommand("intervene", "exact query under do-interventions");
    inter->add_option("--profile", int_profile, "cohort profile");
    inter->add_option("--network", int_network, "network JSON path (overrides --profile)");
    inter->add_option("--do", int_do, "intervention VAR=rating (repeatable)");
    inter->add_option("--target", int_target, "query variable");

    // export-fixtures
    std::string fix_out = "data/profiles";
    auto* fix = app.add_subcommand("export-fixtures", "write reference networks as JSON");
    fix->add_option("--out", fix_out, "fixture directory");

    CLI11_PARSE(app, argc, argv);

    if (learn->parsed()) {
        const std::string label =
            !learn_label.empty() ? learn_label
                                 : (!learn_profile.empty() ? learn_profile : "cohort");
        auto in = make_input(label, learn_profile, learn_csv, learn_mapping, learn_opts,
                             learn_rule_consistent, learn_opts.seed);
        auto art = run_learn(in, make_config(learn_opts), learn_opts.out);
        std::cout << "learned " << art.learned.dag.edges().size() << " edges for " << label
                  << "; artifacts in " << learn_opts.out << "\n";
        return 0;
    }

    if (cmp->parsed()) {
        if (cmp_ground_truth) {
            std::vector<std::string> profiles = cmp_profiles;
            if (profiles.empty()) profiles = {"adni-like", "lasi-like"};
            if (profiles.size() != 2)
                throw CLI::ValidationError("--ground-truth needs exactly two --profile values");
            auto r = run_compare_ground_truth(profiles[0], profiles[1], cmp_opts.n,
                                              cmp_opts.seed, cmp_opts.out);
            std::cout << "SHD " << r.shd << "; report in " << cmp_opts.out << "\n";
            return 0;
        }
        std::vector<CohortInput> inputs;
        for (std::size_t i = 0; i < cmp_profiles.size(); ++i) {
            const std::string label =
                i < cmp_labels.size() ? cmp_labels[i] : cmp_profiles[i];
            inputs.push_back(make_input(label, cmp_profiles[i], "", "", cmp_opts, false,
                                        cmp_opts.seed + i));
        }
        for (std::size_t i = 0; i < cmp_csvs.size(); ++i) {
            const std::size_t li = cmp_profiles.size() + i;
            const std::string label = li < cmp_labels.size() ? cmp_labels[li]
                                                             : "cohort" + std::to_string(li);
            const std::string mapping = i < cmp_mappings.size() ? cmp_mappings[i] : "";
            inputs.push_back(make_input(label, "", cmp_csvs[i], mapping, cmp_opts, false, 0));
        }
        if (inputs.size() != 2)
            throw CLI::ValidationError("compare needs exactly two cohorts");
        auto r = run_compare(inputs[0], inputs[1], make_config(cmp_opts), cmp_opts.out);
        std::cout << "SHD " << r.shd << "; report in " << cmp_opts.out << "\n";
        return 0;
    }

    if (score->parsed()) {
        if (strict_morris && std::abs(spc - 0.5) < 1e-9)
            throw InvalidRating("personal care cannot be 0.5 under strict Morris validation");
        DomainScores s{level_from_rating(sm), level_from_rating(so), level_from_rating(sjps),
                       level_from_rating(sca), level_from_rating(shh), level_from_rating(spc)};
        std::cout << kLevelLabels[global_cdr(s)] << "\n";
        return 0;
    }

    if (gen->parsed()) {
        const auto profile = reference_profile(gen_profile);
        const Dataset d = generate_cohort(profile, gen_opts.n, gen_opts.seed, gen_rule_consistent);
        std::ofstream out(gen_out_csv, std::ios::binary);
        if (!out) throw FileNotFound("cannot open for writing: " + gen_out_csv);
        out << "subject_id";
        for (const auto& name : kVarNames) out << "," << name;
        out << "\n";
        for (std::size_t r = 0; r < d.n_rows(); ++r) {
            out << "S" << r;
            for (std::size_t v = 0; v < 7; ++v)
                out << "," << kLevelLabels[d.at(r, static_cast<NodeId>(v))];
            out << "\n";
        }
        std::cout << "wrote " << d.n_rows() << " rows to " << gen_out_csv << "\n";
        return 0;
    }

    if (inter->parsed()) {
        BayesianNetwork bn = [&] {
            if (!int_network.empty()) {
                std::ifstream in(int_network);
                if (!in) throw FileNotFound("network file not found: " + int_network);
                nlohmann::json j;
                in >> j;
                return network_from_json(j);
            }
            return reference_network(int_profile);
        }();
        auto var_index = [&bn](const std::string& name) {
            for (std::size_t i = 0; i < bn.variables().size(); ++i)
                if (bn.variables()[i].name == name) return static_cast<NodeId>(i);
            throw UnknownNode("unknown variable: " + name);
        };
        Evidence assignments;
        for (const auto& spec : int_do) {
            const auto eq = spec.find('=');
            if (eq == std::string::npos)
                throw CLI::ValidationError("--do expects VAR=rating, got " + spec);
            assignments[var_index(spec.substr(0, eq))] =
                level_from_rating(std::stod(spec.substr(eq + 1)));
        }
        const BayesianNetwork intervened = intervene(bn, assignments);
        const auto dist = query(intervened, var_index(int_target), {});
        std::cout << "P(" << int_target << ")";
        for (const auto& spec : int_do) std::cout << " | do(" << spec << ")";
        std::cout << ":\n";
        for (std::size_t lvl = 0; lvl < dist.size(); ++lvl)
            std::cout << "  " << bn.variables()[static_cast<std::size_t>(var_index(int_target))]
                                     .levels[lvl]
                      << ": " << dist[lvl] << "\n";
        return 0;
    }

    if (fix->parsed()) {
        std::filesystem::create_directories(fix_out);
        for (const std::string name : {"adni-like", "lasi-like"}) {
            const auto profile = reference_profile(name);
            const std::string stem = name == "adni-like" ? "adni_like" : "lasi_like";
            std::ofstream out(std::filesystem::path(fix_out) / (stem + ".json"),
                              std::ios::binary);
            out << network_to_json(profile.network).dump(2) << "\n";
            std::vector<std::string> names(kVarNames.begin(), kVarNames.end());
            std::ofstream dot(std::filesystem::path(fix_out) / (stem + ".dot"),
                              std::ios::binary);
            dot << export_dot(profile.network.dag(), names);
        }
        std::cout << "fixtures written to " << fix_out << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const cdrnet::StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code;
    } catch (const cdrnet::FileNotFound& e) {
        std::cerr << "error: [load] " << e.what() << "\n";
        return 4;
    } catch (const cdrnet::MalformedCsv& e) {
        std::cerr << "error: [load] " << e.what() << "\n";
        return 2;
    } catch (const cdrnet::UnmappedValue& e) {
        std::cerr << "error: [load] " << e.what() << "\n";
        return 2;
    } catch (const cdrnet::InvalidRating& e) {
        std::cerr << "error: [input] " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: [input] " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: [statistics] " << e.what() << "\n";
        return 3;
    }
}

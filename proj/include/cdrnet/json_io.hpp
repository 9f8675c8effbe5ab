#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cdrnet/bayesnet.hpp"
#include "cdrnet/cdr.hpp"
#include "cdrnet/compare.hpp"
#include "cdrnet/graph.hpp"
#include "cdrnet/pc.hpp"

namespace cdrnet {

inline constexpr int kSchemaVersion = 1;

inline nlohmann::ordered_json dag_to_json(const Dag& g, const std::vector<std::string>& names,
                                          const EdgeStrengthMap& strengths = {}) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["nodes"] = names;
    auto edges = nlohmann::ordered_json::array();
    for (const auto& [u, v] : g.edges()) {
        nlohmann::ordered_json e;
        e["source"] = names[static_cast<std::size_t>(u)];
        e["sink"] = names[static_cast<std::size_t>(v)];
        auto it = strengths.strength.find({u, v});
        if (it != strengths.strength.end()) {
            e["strength"] = round1(it->second);
            e["raw_statistic"] = strengths.raw.at({u, v});
        }
        edges.push_back(std::move(e));
    }
    j["edges"] = std::move(edges);
    return j;
}

inline Dag dag_from_json(const nlohmann::json& j, std::vector<std::string>* names_out = nullptr) {
    const auto names = j.at("nodes").get<std::vector<std::string>>();
    std::set<Edge> edges;
    auto index_of = [&names](const std::string& name) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<NodeId>(i);
        throw UnknownNode("unknown node name: " + name);
    };
    for (const auto& e : j.at("edges"))
        edges.insert({index_of(e.at("source").get<std::string>()),
                      index_of(e.at("sink").get<std::string>())});
    if (names_out) *names_out = names;
    return Dag(static_cast<int>(names.size()), std::move(edges));
}

inline nlohmann::ordered_json network_to_json(const BayesianNetwork& bn) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    auto vars = nlohmann::ordered_json::array();
    for (const auto& v : bn.variables()) {
        nlohmann::ordered_json jv;
        jv["name"] = v.name;
        jv["levels"] = v.levels;
        vars.push_back(std::move(jv));
    }
    j["variables"] = std::move(vars);
    auto cpts = nlohmann::ordered_json::array();
    for (const auto& c : bn.cpts()) {
        nlohmann::ordered_json jc;
        jc["node"] = bn.variables()[static_cast<std::size_t>(c.node)].name;
        std::vector<std::string> parent_names;
        for (NodeId p : c.parents)
            parent_names.push_back(bn.variables()[static_cast<std::size_t>(p)].name);
        jc["parents"] = parent_names;
        jc["table"] = c.table;
        cpts.push_back(std::move(jc));
    }
    j["cpts"] = std::move(cpts);
    return j;
}

inline BayesianNetwork network_from_json(const nlohmann::json& j) {
    std::vector<VariableSpec> vars;
    for (const auto& jv : j.at("variables"))
        vars.push_back({jv.at("name").get<std::string>(),
                        jv.at("levels").get<std::vector<std::string>>()});
    auto index_of = [&vars](const std::string& name) {
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i].name == name) return static_cast<NodeId>(i);
        throw UnknownNode("unknown node name: " + name);
    };
    std::vector<Cpt> cpts(vars.size());
    std::set<Edge> edges;
    for (const auto& jc : j.at("cpts")) {
        Cpt c;
        c.node = index_of(jc.at("node").get<std::string>());
        for (const auto& pname : jc.at("parents")) {
            const NodeId p = index_of(pname.get<std::string>());
            c.parents.push_back(p);
            edges.insert({p, c.node});
        }
        std::sort(c.parents.begin(), c.parents.end());
        c.table = jc.at("table").get<std::vector<std::vector<double>>>();
        cpts[static_cast<std::size_t>(c.node)] = std::move(c);
    }
    const int n = static_cast<int>(vars.size());
    return BayesianNetwork(Dag(n, std::move(edges)), std::move(vars), std::move(cpts));
}

inline nlohmann::ordered_json comparison_to_json(const ComparisonReport& r,
                                                 const std::vector<std::string>& names,
                                                 const std::string& label_a,
                                                 const std::string& label_b) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["cohort_a"] = label_a;
    j["cohort_b"] = label_b;

    auto degree_table = nlohmann::ordered_json::array();
    for (std::size_t v = 0; v < names.size(); ++v) {
        nlohmann::ordered_json row;
        row["node"] = names[v];
        row[label_a] = {{"incoming", r.degrees_a[v].incoming}, {"outgoing", r.degrees_a[v].outgoing}};
        row[label_b] = {{"incoming", r.degrees_b[v].incoming}, {"outgoing", r.degrees_b[v].outgoing}};
        degree_table.push_back(std::move(row));
    }
    j["node_degrees"] = std::move(degree_table);

    auto edge_list = [&names](const std::set<Edge>& edges) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& [u, v] : edges)
            arr.push_back({{"source", names[static_cast<std::size_t>(u)]},
                           {"sink", names[static_cast<std::size_t>(v)]}});
        return arr;
    };
    j["shared"] = edge_list(r.shared);
    j["reversed"] = edge_list(r.reversed);
    j["only_a"] = edge_list(r.only_a);
    j["only_b"] = edge_list(r.only_b);
    j["shd"] = r.shd;

    // strength table over the union of edges; "-" marks an absent edge
    std::set<Edge> all_edges;
    for (const auto& [e, s] : r.strengths_a) all_edges.insert(e);
    for (const auto& [e, s] : r.strengths_b) all_edges.insert(e);
    auto strengths = nlohmann::ordered_json::array();
    for (const auto& e : all_edges) {
        nlohmann::ordered_json row;
        row["source"] = names[static_cast<std::size_t>(e.first)];
        row["sink"] = names[static_cast<std::size_t>(e.second)];
        auto ita = r.strengths_a.find(e);
        auto itb = r.strengths_b.find(e);
        if (ita != r.strengths_a.end()) row[label_a] = ita->second;
        else row[label_a] = "-";
        if (itb != r.strengths_b.end()) row[label_b] = itb->second;
        else row[label_b] = "-";
        strengths.push_back(std::move(row));
    }
    j["edge_strengths"] = std::move(strengths);
    return j;
}

inline nlohmann::ordered_json cleaning_report_to_json(const CleaningReport& r) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["total"] = r.total;
    j["retained"] = r.retained;
    j["dropped"] = {{"invalid_sentinel", r.invalid_sentinel},
                    {"missing_global", r.missing_global},
                    {"missing_domain", r.missing_domain},
                    {"non_first_rater", r.non_first_rater}};
    return j;
}

}  // namespace cdrnet

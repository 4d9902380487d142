// JSON scenario and rule files. Rule weights are stored as decimal strings
// (shortest round-trip form), so save -> load reproduces doubles bit-exactly.
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pslab/errors.hpp"
#include "pslab/mechanism.hpp"

namespace pslab {

namespace detail {

inline nlohmann::ordered_json read_json_file(const std::string& path,
                                     const std::string& what) {
    std::ifstream in(path);
    if (!in) throw ParseError(what + ": cannot open '" + path + "'");
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::ordered_json::parse_error& e) {
        throw ParseError(what + ": " + path + ": " + e.what());
    }
    return j;
}

inline const nlohmann::ordered_json& require_field(const nlohmann::ordered_json& j,
                                           const std::string& field,
                                           const std::string& what) {
    auto it = j.find(field);
    if (it == j.end())
        throw ParseError(what + ": missing field '" + field + "'");
    return *it;
}

inline void check_schema(const nlohmann::ordered_json& j, const std::string& what) {
    if (j.contains("schema") && j.at("schema").get<int>() != 1)
        throw ParseError(what + ": unsupported schema version " +
                         j.at("schema").dump());
}

}  // namespace detail

inline Scenario load_scenario(const std::string& path) {
    using json = nlohmann::ordered_json;
    json j = detail::read_json_file(path, "scenario");
    detail::check_schema(j, "scenario");
    const std::string what = "scenario";

    Scenario scen;
    try {
        scen.net.edges =
            detail::require_field(j, "edges", what).get<std::vector<std::string>>();
        scen.net.routes = detail::require_field(j, "routes", what)
                              .get<std::vector<std::vector<int>>>();
        scen.net.states = detail::require_field(j, "states", what)
                              .get<std::vector<std::string>>();
        scen.net.prior =
            detail::require_field(j, "prior", what).get<std::vector<double>>();
        scen.net.demand = detail::require_field(j, "demand", what).get<double>();

        const json& costs = detail::require_field(j, "costs", what);
        scen.costs.coeffs.assign(
            scen.net.edges.size(),
            std::vector<std::vector<double>>(scen.net.states.size()));
        for (std::size_t e = 0; e < scen.net.edges.size(); ++e) {
            const std::string& edge = scen.net.edges[e];
            if (!costs.contains(edge))
                throw ParseError("scenario: costs missing edge '" + edge + "'");
            for (std::size_t s = 0; s < scen.net.states.size(); ++s) {
                const std::string& state = scen.net.states[s];
                if (!costs.at(edge).contains(state))
                    throw ParseError("scenario: costs for edge '" + edge +
                                     "' missing state '" + state + "'");
                scen.costs.coeffs[e][s] =
                    costs.at(edge).at(state).get<std::vector<double>>();
            }
        }

        scen.K = detail::require_field(j, "K", what).get<int>();
        if (j.contains("partition")) {
            PartitionProfile part;
            part.x = j.at("partition").get<std::vector<double>>();
            scen.partition = std::move(part);
        }
        if (j.contains("atomic")) {
            const json& a = j.at("atomic");
            AtomicPublicness pub;
            pub.n = detail::require_field(a, "n", "scenario.atomic").get<int>();
            pub.weights = detail::require_field(a, "weights", "scenario.atomic")
                              .get<std::vector<double>>();
            pub.group_of = detail::require_field(a, "group_of", "scenario.atomic")
                               .get<std::vector<int>>();
            pub.num_groups = scen.K;
            scen.atomic = std::move(pub);
        }
        scen.grid_m = detail::require_field(j, "grid_m", what).get<int>();

        std::string obj =
            detail::require_field(j, "objective", what).get<std::string>();
        if (obj == "total_cost")
            scen.objective = Objective::kTotalCost;
        else if (obj == "route_cost_sum")
            scen.objective = Objective::kRouteCostSum;
        else
            throw ParseError("scenario: unknown objective '" + obj + "'");
    } catch (const nlohmann::ordered_json::exception& e) {
        throw ParseError("scenario: " + std::string(e.what()));
    }

    scen.validate();
    return scen;
}

inline nlohmann::ordered_json scenario_to_json(const Scenario& scen) {
    using json = nlohmann::ordered_json;
    json j;
    j["schema"] = 1;
    j["edges"] = scen.net.edges;
    j["routes"] = scen.net.routes;
    j["states"] = scen.net.states;
    j["prior"] = scen.net.prior;
    j["demand"] = scen.net.demand;
    json costs = json::object();
    for (std::size_t e = 0; e < scen.net.edges.size(); ++e) {
        json per_state = json::object();
        for (std::size_t s = 0; s < scen.net.states.size(); ++s)
            per_state[scen.net.states[s]] = scen.costs.coeffs[e][s];
        costs[scen.net.edges[e]] = std::move(per_state);
    }
    j["costs"] = std::move(costs);
    j["K"] = scen.K;
    if (scen.partition) j["partition"] = scen.partition->x;
    if (scen.atomic) {
        json a;
        a["n"] = scen.atomic->n;
        a["weights"] = scen.atomic->weights;
        a["group_of"] = scen.atomic->group_of;
        j["atomic"] = std::move(a);
    }
    j["grid_m"] = scen.grid_m;
    j["objective"] = scen.objective == Objective::kTotalCost ? "total_cost"
                                                             : "route_cost_sum";
    return j;
}

inline void save_scenario(const Scenario& scen, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("scenario: cannot write '" + path + "'");
    out << scenario_to_json(scen).dump(2) << "\n";
}

inline nlohmann::ordered_json rule_to_json(const RecommendationRule& rule) {
    using json = nlohmann::ordered_json;
    json j;
    j["schema"] = 1;
    j["grid_m"] = rule.grid_m;
    j["K"] = rule.K;
    json states = json::object();
    for (int s = 0; s < rule.num_states(); ++s) {
        json atoms = json::array();
        for (const RuleAtom& atom : rule.atoms_by_state[s]) {
            json a;
            a["profile"] = atom.profile;
            a["weight"] = format_double(atom.weight);
            atoms.push_back(std::move(a));
        }
        states[rule.state_labels[s]] = std::move(atoms);
    }
    j["states"] = std::move(states);
    return j;
}

inline void save_rule(const RecommendationRule& rule, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("rule: cannot write '" + path + "'");
    out << rule_to_json(rule).dump(2) << "\n";
}

inline RecommendationRule load_rule(const std::string& path) {
    using json = nlohmann::ordered_json;
    json j = detail::read_json_file(path, "rule");
    detail::check_schema(j, "rule");

    RecommendationRule rule;
    try {
        rule.grid_m = detail::require_field(j, "grid_m", "rule").get<int>();
        rule.K = detail::require_field(j, "K", "rule").get<int>();
        const json& states = detail::require_field(j, "states", "rule");
        // nlohmann objects iterate in sorted key order; keep that order.
        for (auto it = states.begin(); it != states.end(); ++it) {
            rule.state_labels.push_back(it.key());
            std::vector<RuleAtom> atoms;
            for (const json& a : it.value()) {
                RuleAtom atom;
                atom.profile = detail::require_field(a, "profile", "rule atom")
                                   .get<std::vector<int>>();
                const json& w = detail::require_field(a, "weight", "rule atom");
                if (!w.is_string())
                    throw ParseError("rule: state " + it.key() +
                                     ": weight must be a decimal string");
                atom.weight = parse_double(w.get<std::string>(),
                                           "rule: state " + it.key() + " weight");
                atoms.push_back(std::move(atom));
            }
            rule.atoms_by_state.push_back(std::move(atoms));
        }
    } catch (const nlohmann::ordered_json::exception& e) {
        throw ParseError("rule: " + std::string(e.what()));
    }
    return rule;
}

}  // namespace pslab

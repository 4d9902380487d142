// Expected-cost evaluation for recommendation rules: the nonatomic and
// weighted-atomic traveler costs and the planner objective.
//
// All conditional expectations are unnormalized (joint-weighted): the sum
// runs over p(state) * atom weight without dividing by the probability of
// the conditioning event. Obedience comparisons condition on the same event,
// so the normalization cancels there.
#pragma once

#include <string>
#include <vector>

#include "pslab/errors.hpp"
#include "pslab/mechanism.hpp"
#include "pslab/model.hpp"
#include "pslab/policy.hpp"

namespace pslab {

/// A conditional-cost question: group k received grid atom `recommended`
/// (index into the scenario grid) and considers playing `deviation`.
struct ExpectedCostQuery {
    int k = 0;
    int recommended = 0;
    Policy deviation;
};

namespace cost_detail {

inline std::vector<Policy> profile_policies(const PolicyGrid& grid,
                                            const std::vector<int>& profile) {
    std::vector<Policy> out;
    out.reserve(profile.size());
    for (int g : profile) out.push_back(grid.policy(g));
    return out;
}

inline void require_support(const RecommendationRule& rule, int k, int atom) {
    for (const auto& atoms : rule.atoms_by_state)
        for (const RuleAtom& a : atoms)
            if (a.weight > 0.0 && a.profile[k] == atom) return;
    throw EmptyConditioningEvent(
        "group " + std::to_string(k) + ": policy index " + std::to_string(atom) +
        " has zero marginal probability (empty conditioning event)");
}

/// Route costs at the flow induced by one support atom under partition x.
inline std::vector<double> atom_route_costs(const Scenario& scen,
                                            const PolicyGrid& grid,
                                            const std::vector<int>& profile,
                                            const PartitionProfile& x, int s) {
    FlowProfile flow = flow_from_recommendation(profile_policies(grid, profile),
                                                x, scen.net.demand);
    return route_cost(flow, s, scen.net, scen.costs);
}

}  // namespace cost_detail

/// Nonatomic expected cost of playing q.deviation after receiving
/// q.recommended. The deviator is measure zero, so loads come from the
/// recommended profile alone; the result is linear in the deviation policy.
inline double expected_cost_nonatomic(const ExpectedCostQuery& q,
                                      const RecommendationRule& rule,
                                      const Scenario& scen,
                                      const PolicyGrid& grid) {
    cost_detail::require_support(rule, q.k, q.recommended);
    const PartitionProfile x = scen.partition_profile();
    double acc = 0.0;
    for (int s = 0; s < scen.net.num_states(); ++s) {
        double p = scen.net.prior[s];
        if (p == 0.0) continue;
        for (const RuleAtom& atom : rule.atoms_by_state[s]) {
            if (atom.weight <= 0.0 || atom.profile[q.k] != q.recommended)
                continue;
            std::vector<double> rc =
                cost_detail::atom_route_costs(scen, grid, atom.profile, x, s);
            double play = 0.0;
            for (std::size_t r = 0; r < rc.size(); ++r)
                play += q.deviation.y[r] * rc[r];
            acc += p * atom.weight * play;
        }
    }
    return acc;
}

/// Weighted-atomic expected cost for traveler i: the deviant's own weight
/// re-routes and shifts edge loads, so this is not linear in the deviation.
inline double expected_cost_atomic(int traveler, const ExpectedCostQuery& q,
                                   const RecommendationRule& rule,
                                   const Scenario& scen,
                                   const PolicyGrid& grid) {
    if (!scen.atomic)
        throw ValidationError("expected_cost_atomic: scenario is not atomic");
    const AtomicPublicness& pub = *scen.atomic;
    if (traveler < 0 || traveler >= pub.n)
        throw DimensionError("expected_cost_atomic: unknown traveler " +
                             std::to_string(traveler));
    if (pub.group_of[traveler] != q.k)
        throw ValidationError("expected_cost_atomic: traveler " +
                              std::to_string(traveler) + " is not in group " +
                              std::to_string(q.k));
    cost_detail::require_support(rule, q.k, q.recommended);

    const double w_i = pub.weights[traveler];
    double acc = 0.0;
    for (int s = 0; s < scen.net.num_states(); ++s) {
        double p = scen.net.prior[s];
        if (p == 0.0) continue;
        for (const RuleAtom& atom : rule.atoms_by_state[s]) {
            if (atom.weight <= 0.0 || atom.profile[q.k] != q.recommended)
                continue;
            std::vector<Policy> profile =
                cost_detail::profile_policies(grid, atom.profile);
            FlowProfile flow =
                atomic_flow(profile, pub, std::make_pair(traveler, q.deviation));
            std::vector<double> rc = route_cost(flow, s, scen.net, scen.costs);
            double play = 0.0;
            for (std::size_t r = 0; r < rc.size(); ++r)
                play += q.deviation.y[r] * rc[r];
            acc += p * atom.weight * w_i * play;
        }
    }
    return acc;
}

/// Planner objective value of a rule: expectation of the scenario objective
/// over states and support atoms.
inline double planner_value(const RecommendationRule& rule,
                            const Scenario& scen) {
    ValidationReport report = validate(rule, scen);
    if (!report.empty())
        throw ValidationError("planner_value: invalid rule: " +
                              report.violations.front());
    PolicyGrid grid = scen.grid();
    const PartitionProfile x = scen.partition_profile();
    double acc = 0.0;
    for (int s = 0; s < scen.net.num_states(); ++s) {
        double p = scen.net.prior[s];
        if (p == 0.0) continue;
        for (const RuleAtom& atom : rule.atoms_by_state[s]) {
            if (atom.weight <= 0.0) continue;
            FlowProfile flow = flow_from_recommendation(
                cost_detail::profile_policies(grid, atom.profile), x,
                scen.net.demand);
            acc += p * atom.weight *
                   evaluate_objective(scen.objective, flow, s, scen.net,
                                      scen.costs);
        }
    }
    return acc;
}

}  // namespace pslab

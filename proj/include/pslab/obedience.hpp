// Direct obedience verification: best deviations and worst-case gaps for the
// nonatomic, weighted-atomic, and complete-information readings.
#pragma once

#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "pslab/costs.hpp"
#include "pslab/mechanism.hpp"

namespace pslab {

/// Most profitable deviation for one conditioning event.
struct Deviation {
    int group = -1;
    int recommended = -1;      // grid index of the conditioning atom
    int deviation_route = -1;  // pure-route witness (nonatomic case)
    int deviation_grid = -1;   // grid-index witness (atomic case)
    double gain = 0.0;         // staying cost minus best deviation cost
};

struct ObedienceReport {
    bool pass = false;
    double eps = 0.0;
    double max_gain = 0.0;
    Deviation worst;
    int checked_events = 0;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["pass"] = pass;
        j["eps"] = eps;
        j["max_gain"] = format_double(max_gain);
        j["checked_events"] = checked_events;
        nlohmann::ordered_json w;
        w["group"] = worst.group;
        w["recommended"] = worst.recommended;
        w["deviation_route"] = worst.deviation_route;
        w["deviation_grid"] = worst.deviation_grid;
        w["gain"] = format_double(worst.gain);
        j["worst"] = std::move(w);
        return j;
    }
};

/// Staying cost minus the cheapest pure-route deviation for (group, atom).
/// Nonatomic costs are linear in the deviation, so pure routes suffice; the
/// gain is nonnegative up to rounding. Ties break toward the lowest route.
inline Deviation best_deviation(int k, int recommended,
                                const RecommendationRule& rule,
                                const Scenario& scen, const PolicyGrid& grid) {
    ExpectedCostQuery stay{k, recommended, grid.policy(recommended)};
    double stay_cost = expected_cost_nonatomic(stay, rule, scen, grid);
    double best_cost = std::numeric_limits<double>::infinity();
    int best_route = -1;
    for (int r = 0; r < scen.net.num_routes(); ++r) {
        Policy pure;
        pure.y.assign(scen.net.num_routes(), 0.0);
        pure.y[r] = 1.0;
        ExpectedCostQuery q{k, recommended, std::move(pure)};
        double c = expected_cost_nonatomic(q, rule, scen, grid);
        if (c < best_cost) {
            best_cost = c;
            best_route = r;
        }
    }
    Deviation d;
    d.group = k;
    d.recommended = recommended;
    d.deviation_route = best_route;
    d.gain = stay_cost - best_cost;
    return d;
}

/// Nonatomic obedience check over every group and support atom.
inline ObedienceReport verify_ps_bcwe(const RecommendationRule& rule,
                                      const Scenario& scen, double eps = 1e-7) {
    ValidationReport vr = validate(rule, scen);
    if (!vr.empty())
        throw ValidationError("verify_ps_bcwe: invalid rule: " +
                              vr.violations.front());
    PolicyGrid grid = scen.grid();
    ObedienceReport report;
    report.eps = eps;
    report.max_gain = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < scen.K; ++k) {
        for (int atom : marginal_support(rule, k)) {
            Deviation d = best_deviation(k, atom, rule, scen, grid);
            ++report.checked_events;
            if (d.gain > report.max_gain) {
                report.max_gain = d.gain;
                report.worst = d;
            }
        }
    }
    if (report.checked_events == 0) report.max_gain = 0.0;
    report.pass = report.max_gain <= eps;
    return report;
}

/// Weighted-atomic obedience: per traveler, deviations over the whole policy
/// grid (the deviant moves load, so vertex deviations do not suffice).
inline ObedienceReport verify_ps_bce_atomic(const RecommendationRule& rule,
                                            const Scenario& scen,
                                            double eps = 1e-7) {
    if (!scen.atomic)
        throw ValidationError("verify_ps_bce_atomic: scenario is not atomic");
    ValidationReport vr = validate(rule, scen);
    if (!vr.empty())
        throw ValidationError("verify_ps_bce_atomic: invalid rule: " +
                              vr.violations.front());
    PolicyGrid grid = scen.grid();
    const AtomicPublicness& pub = *scen.atomic;

    ObedienceReport report;
    report.eps = eps;
    report.max_gain = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < scen.K; ++k) {
        std::vector<int> support = marginal_support(rule, k);
        for (int i = 0; i < pub.n; ++i) {
            if (pub.group_of[i] != k) continue;
            for (int atom : support) {
                ExpectedCostQuery stay{k, atom, grid.policy(atom)};
                double stay_cost =
                    expected_cost_atomic(i, stay, rule, scen, grid);
                double best_cost = std::numeric_limits<double>::infinity();
                int best_idx = -1;
                for (int g = 0; g < grid.size(); ++g) {
                    ExpectedCostQuery q{k, atom, grid.policy(g)};
                    double c = expected_cost_atomic(i, q, rule, scen, grid);
                    if (c < best_cost) {
                        best_cost = c;
                        best_idx = g;
                    }
                }
                ++report.checked_events;
                double gain = stay_cost - best_cost;
                if (gain > report.max_gain) {
                    report.max_gain = gain;
                    report.worst.group = k;
                    report.worst.recommended = atom;
                    report.worst.deviation_grid = best_idx;
                    report.worst.gain = gain;
                }
            }
        }
    }
    if (report.checked_events == 0) report.max_gain = 0.0;
    report.pass = report.max_gain <= eps;
    return report;
}

/// Complete-information correlated-equilibrium check: the per-state variant
/// of the atomic test, with no prior averaging.
inline ObedienceReport verify_complete_info_ce(const RecommendationRule& rule,
                                               const Scenario& scen,
                                               double eps = 1e-7) {
    if (!scen.atomic)
        throw ValidationError("verify_complete_info_ce: scenario is not atomic");
    ValidationReport vr = validate(rule, scen);
    if (!vr.empty())
        throw ValidationError("verify_complete_info_ce: invalid rule: " +
                              vr.violations.front());
    PolicyGrid grid = scen.grid();
    const AtomicPublicness& pub = *scen.atomic;

    ObedienceReport report;
    report.eps = eps;
    report.max_gain = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < scen.net.num_states(); ++s) {
        for (const RuleAtom& atom : rule.atoms_by_state[s]) {
            if (atom.weight <= 0.0) continue;
            std::vector<Policy> profile;
            for (int g : atom.profile) profile.push_back(grid.policy(g));
            for (int i = 0; i < pub.n; ++i) {
                int k = pub.group_of[i];
                FlowProfile stay_flow = atomic_flow(profile, pub);
                std::vector<double> rc_stay =
                    route_cost(stay_flow, s, scen.net, scen.costs);
                double stay_cost = 0.0;
                for (std::size_t r = 0; r < rc_stay.size(); ++r)
                    stay_cost += profile[k].y[r] * pub.weights[i] * rc_stay[r];

                double best_cost = std::numeric_limits<double>::infinity();
                int best_idx = -1;
                for (int g = 0; g < grid.size(); ++g) {
                    Policy dev = grid.policy(g);
                    FlowProfile flow =
                        atomic_flow(profile, pub, std::make_pair(i, dev));
                    std::vector<double> rc =
                        route_cost(flow, s, scen.net, scen.costs);
                    double c = 0.0;
                    for (std::size_t r = 0; r < rc.size(); ++r)
                        c += dev.y[r] * pub.weights[i] * rc[r];
                    if (c < best_cost) {
                        best_cost = c;
                        best_idx = g;
                    }
                }
                ++report.checked_events;
                double gain = atom.weight * (stay_cost - best_cost);
                if (gain > report.max_gain) {
                    report.max_gain = gain;
                    report.worst.group = k;
                    report.worst.recommended = atom.profile[k];
                    report.worst.deviation_grid = best_idx;
                    report.worst.gain = gain;
                }
            }
        }
    }
    if (report.checked_events == 0) report.max_gain = 0.0;
    report.pass = report.max_gain <= eps;
    return report;
}

}  // namespace pslab

// Transportation network, state-dependent polynomial edge costs, and the
// flow -> edge load -> cost maps.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pslab/errors.hpp"
#include "pslab/numeric.hpp"

namespace pslab {

/// Directed network with a single origin-destination pair. Routes are edge
/// index lists; states carry a common prior; demand is the total mass routed.
struct Network {
    std::vector<std::string> edges;
    std::vector<std::vector<int>> routes;
    std::vector<std::string> states;
    std::vector<double> prior;
    double demand = 0.0;

    int num_edges() const { return static_cast<int>(edges.size()); }
    int num_routes() const { return static_cast<int>(routes.size()); }
    int num_states() const { return static_cast<int>(states.size()); }

    /// Throws ValidationError on the first violated invariant.
    void validate() const {
        if (edges.empty()) throw ValidationError("network: no edges");
        if (routes.empty()) throw ValidationError("network: no routes");
        for (std::size_t r = 0; r < routes.size(); ++r) {
            if (routes[r].empty())
                throw ValidationError("network: route " + std::to_string(r) +
                                      " is empty");
            std::vector<bool> seen(edges.size(), false);
            for (int e : routes[r]) {
                if (e < 0 || e >= num_edges())
                    throw ValidationError("network: route " + std::to_string(r) +
                                          " references unknown edge " +
                                          std::to_string(e));
                if (seen[e])
                    throw ValidationError("network: route " + std::to_string(r) +
                                          " repeats edge " + std::to_string(e));
                seen[e] = true;
            }
        }
        if (states.empty()) throw ValidationError("network: no states");
        if (prior.size() != states.size())
            throw ValidationError("network: prior length != state count");
        double mass = 0.0;
        for (double p : prior) {
            if (p < 0.0) throw ValidationError("network: negative prior entry");
            mass += p;
        }
        if (std::fabs(mass - 1.0) > 1e-12)
            throw ValidationError("network: prior sums to " + format_double(mass));
        if (!(demand > 0.0)) throw ValidationError("network: demand must be > 0");
    }
};

/// Per (edge, state) polynomial cost C_e(load) = sum_d coeff[d] * load^d.
/// Coefficients are nonnegative, so costs are nonnegative and nondecreasing.
struct CostModel {
    // coeffs[edge][state] = coefficient vector (a0, a1, ...).
    std::vector<std::vector<std::vector<double>>> coeffs;

    double eval(int edge, int state, double load) const {
        const auto& c = coeffs[edge][state];
        double acc = 0.0;
        for (std::size_t d = c.size(); d-- > 0;) acc = acc * load + c[d];
        return acc;
    }

    int max_degree() const {
        std::size_t deg = 0;
        for (const auto& per_edge : coeffs)
            for (const auto& c : per_edge)
                if (c.size() > deg + 1) deg = c.size() - 1;
        return static_cast<int>(deg);
    }

    void validate(const Network& net) const {
        if (coeffs.size() != static_cast<std::size_t>(net.num_edges()))
            throw ValidationError("costs: entry count != edge count");
        for (int e = 0; e < net.num_edges(); ++e) {
            if (coeffs[e].size() != static_cast<std::size_t>(net.num_states()))
                throw ValidationError("costs: edge " + net.edges[e] +
                                      " is missing states");
            for (int s = 0; s < net.num_states(); ++s) {
                const auto& c = coeffs[e][s];
                if (c.empty())
                    throw ValidationError("costs: edge " + net.edges[e] +
                                          ", state " + net.states[s] +
                                          ": empty polynomial");
                bool any_positive = false;
                for (double a : c) {
                    if (a < 0.0)
                        throw ValidationError("costs: edge " + net.edges[e] +
                                              ", state " + net.states[s] +
                                              ": negative coefficient");
                    if (a > 0.0) any_positive = true;
                }
                if (!any_positive)
                    throw ValidationError("costs: edge " + net.edges[e] +
                                          ", state " + net.states[s] +
                                          ": identically zero cost");
            }
        }
    }

    /// Non-fatal warnings where a polynomial is not strictly positive or not
    /// strictly increasing (constant edges, zero intercepts). Classic test
    /// networks live in this regime on purpose.
    std::vector<std::string> strictness_warnings(const Network& net) const {
        std::vector<std::string> out;
        for (int e = 0; e < net.num_edges(); ++e) {
            for (int s = 0; s < net.num_states(); ++s) {
                const auto& c = coeffs[e][s];
                if (c[0] <= 0.0)
                    out.push_back("edge " + net.edges[e] + ", state " +
                                  net.states[s] + ": cost is 0 at load 0");
                bool increasing = false;
                for (std::size_t d = 1; d < c.size(); ++d)
                    if (c[d] > 0.0) increasing = true;
                if (!increasing)
                    out.push_back("edge " + net.edges[e] + ", state " +
                                  net.states[s] + ": cost is constant in load");
            }
        }
        return out;
    }
};

/// Per-route flow in demand units.
struct FlowProfile {
    std::vector<double> f;

    void validate(const Network& net, double tol = 1e-9) const {
        if (f.size() != static_cast<std::size_t>(net.num_routes()))
            throw DimensionError("flow: length != route count");
        double total = 0.0;
        for (double v : f) {
            if (v < 0.0) throw ValidationError("flow: negative route flow");
            total += v;
        }
        if (std::fabs(total - net.demand) > tol)
            throw ValidationError("flow: total " + format_double(total) +
                                  " != demand " + format_double(net.demand));
    }
};

/// Per-edge load in demand units.
struct EdgeLoadProfile {
    std::vector<double> load;
};

/// load_e = sum of flows over routes containing e; exact summation, no
/// tolerance involved.
inline EdgeLoadProfile edge_load_from_flow(const FlowProfile& flow,
                                           const Network& net) {
    if (flow.f.size() != static_cast<std::size_t>(net.num_routes()))
        throw DimensionError("edge_load_from_flow: flow length " +
                             std::to_string(flow.f.size()) + " != route count " +
                             std::to_string(net.num_routes()));
    EdgeLoadProfile out;
    out.load.assign(net.num_edges(), 0.0);
    for (int r = 0; r < net.num_routes(); ++r)
        for (int e : net.routes[r]) out.load[e] += flow.f[r];
    return out;
}

/// Cost of each route under the loads induced by `flow` in state `s`.
inline std::vector<double> route_cost(const FlowProfile& flow, int s,
                                      const Network& net,
                                      const CostModel& costs) {
    if (s < 0 || s >= net.num_states())
        throw DimensionError("route_cost: invalid state index " +
                             std::to_string(s));
    EdgeLoadProfile loads = edge_load_from_flow(flow, net);
    std::vector<double> edge_cost(net.num_edges());
    for (int e = 0; e < net.num_edges(); ++e)
        edge_cost[e] = costs.eval(e, s, loads.load[e]);
    std::vector<double> out(net.num_routes(), 0.0);
    for (int r = 0; r < net.num_routes(); ++r)
        for (int e : net.routes[r]) out[r] += edge_cost[e];
    return out;
}

/// Flow-weighted total travel cost: sum_r f_r * C_r(f, s).
inline double total_cost(const FlowProfile& flow, int s, const Network& net,
                         const CostModel& costs) {
    std::vector<double> rc = route_cost(flow, s, net, costs);
    double acc = 0.0;
    for (int r = 0; r < net.num_routes(); ++r) acc += flow.f[r] * rc[r];
    return acc;
}

/// Unweighted sum of route costs at the full flow profile.
inline double route_cost_sum(const FlowProfile& flow, int s, const Network& net,
                             const CostModel& costs) {
    std::vector<double> rc = route_cost(flow, s, net, costs);
    double acc = 0.0;
    for (double v : rc) acc += v;
    return acc;
}

/// Planner objective selector.
enum class Objective { kTotalCost, kRouteCostSum };

inline double evaluate_objective(Objective obj, const FlowProfile& flow, int s,
                                 const Network& net, const CostModel& costs) {
    switch (obj) {
        case Objective::kTotalCost: return total_cost(flow, s, net, costs);
        case Objective::kRouteCostSum: return route_cost_sum(flow, s, net, costs);
    }
    throw Error("evaluate_objective: unknown objective");
}

}  // namespace pslab

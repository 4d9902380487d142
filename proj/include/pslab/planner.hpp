// The planner's mechanism-design problem as a finite LP over recommendation
// rules supported on the policy grid, plus baselines and related programs.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <string>
#include <vector>

#include "pslab/costs.hpp"
#include "pslab/lp.hpp"
#include "pslab/mechanism.hpp"
#include "pslab/obedience.hpp"

namespace pslab {

/// Enumerates K-tuples of grid indices. Tuple index is g_1-major
/// (lexicographic ascending over the tuple).
struct JointGrid {
    int K = 1;
    int grid_size = 0;
    std::uint64_t size = 0;

    JointGrid(int k, int gs, std::uint64_t cap) : K(k), grid_size(gs) {
        std::uint64_t total = 1;
        for (int i = 0; i < K; ++i) {
            if (total > cap / static_cast<std::uint64_t>(gs) + 1)
                throw CapExceeded("joint grid: |grid|^K exceeds cap");
            total *= static_cast<std::uint64_t>(gs);
        }
        size = total;
    }

    std::vector<int> decode(std::uint64_t a) const {
        std::vector<int> profile(K);
        for (int k = K - 1; k >= 0; --k) {
            profile[k] = static_cast<int>(a % grid_size);
            a /= grid_size;
        }
        return profile;
    }

    std::uint64_t encode(const std::vector<int>& profile) const {
        std::uint64_t a = 0;
        for (int k = 0; k < K; ++k)
            a = a * grid_size + static_cast<std::uint64_t>(profile[k]);
        return a;
    }

    /// Advance an odometer profile in encode() order. Returns false at wrap.
    bool next(std::vector<int>& profile) const {
        for (int k = K - 1; k >= 0; --k) {
            if (++profile[k] < grid_size) return true;
            profile[k] = 0;
        }
        return false;
    }
};

/// Planner LP plus the variable/row layout needed to read solutions back.
/// Variables are sigma(tuple | state), state-major; obedience rows are
/// ordered (group, recommended grid atom, deviation route).
struct PlannerLp {
    LpProblem lp;
    int num_states = 0;
    int grid_size = 0;
    int num_routes = 0;
    int K = 1;
    std::uint64_t tuples = 0;

    std::uint64_t var_index(int s, std::uint64_t tuple) const {
        return static_cast<std::uint64_t>(s) * tuples + tuple;
    }

    int obedience_row(int k, int g, int route) const {
        return (k * grid_size + g) * num_routes + route;
    }

    /// Weight vector aligned with the LP variables (for row evaluation).
    std::vector<double> weights_from_rule(const RecommendationRule& rule) const {
        JointGrid joint(K, grid_size, std::numeric_limits<std::uint64_t>::max());
        std::vector<double> w(lp.num_vars, 0.0);
        for (int s = 0; s < num_states; ++s)
            for (const RuleAtom& atom : rule.atoms_by_state[s])
                w[var_index(s, joint.encode(atom.profile))] += atom.weight;
        return w;
    }
};

namespace planner_detail {

inline std::vector<std::vector<double>> grid_policy_table(const PolicyGrid& g) {
    std::vector<std::vector<double>> out(g.size());
    for (int i = 0; i < g.size(); ++i) out[i] = g.policy(i).y;
    return out;
}

}  // namespace planner_detail

/// Build the planner LP for a nonatomic scenario. Constraints: per-state
/// probability mass, and for every (group, recommended atom, pure route) the
/// conditional cost of obeying minus deviating, weighted by the prior.
/// Pure-route deviations suffice because the nonatomic cost is linear in the
/// deviation policy. `row_scale` multiplies obedience row k by a positive
/// factor (used by the multi-population variant; identical feasible set).
inline PlannerLp build_planner_lp(const Scenario& scen,
                                  std::uint64_t cap = 1000000,
                                  const std::vector<double>* row_scale = nullptr) {
    scen.validate();
    const PartitionProfile x = scen.partition_profile();
    PolicyGrid grid = scen.grid(cap);
    const int G = grid.size();
    const int R = scen.net.num_routes();
    const int S = scen.net.num_states();
    const int E = scen.net.num_edges();
    const int K = scen.K;

    JointGrid joint(K, G, cap);
    if (joint.size * static_cast<std::uint64_t>(S) > cap)
        throw CapExceeded("planner lp: |grid|^K * |S| = " +
                          std::to_string(joint.size * S) + " exceeds cap " +
                          std::to_string(cap) + " (reduce m or K)");

    PlannerLp out;
    out.num_states = S;
    out.grid_size = G;
    out.num_routes = R;
    out.K = K;
    out.tuples = joint.size;

    const std::uint64_t num_vars = joint.size * static_cast<std::uint64_t>(S);
    out.lp.resize(static_cast<int>(num_vars));
    out.lp.ineq.assign(static_cast<std::size_t>(K) * G * R, SparseRow{});
    out.lp.ineq_rhs.assign(static_cast<std::size_t>(K) * G * R, 0.0);
    out.lp.eq.assign(S, SparseRow{});
    out.lp.eq_rhs.assign(S, 1.0);

    std::vector<std::vector<double>> policies =
        planner_detail::grid_policy_table(grid);

    std::vector<double> flow(R), loads(E), edge_cost(E), rc(R);
    for (int s = 0; s < S; ++s) {
        const double p = scen.net.prior[s];
        std::vector<int> profile(K, 0);
        std::uint64_t a = 0;
        do {
            const int col = static_cast<int>(out.var_index(s, a));
            // flow and route costs at this tuple
            std::fill(flow.begin(), flow.end(), 0.0);
            for (int k = 0; k < K; ++k) {
                const double mass = x.x[k] * scen.net.demand;
                const std::vector<double>& y = policies[profile[k]];
                for (int r = 0; r < R; ++r) flow[r] += y[r] * mass;
            }
            std::fill(loads.begin(), loads.end(), 0.0);
            for (int r = 0; r < R; ++r)
                for (int e : scen.net.routes[r]) loads[e] += flow[r];
            for (int e = 0; e < E; ++e)
                edge_cost[e] = scen.costs.eval(e, s, loads[e]);
            double obj = 0.0;
            for (int r = 0; r < R; ++r) {
                rc[r] = 0.0;
                for (int e : scen.net.routes[r]) rc[r] += edge_cost[e];
                if (scen.objective == Objective::kTotalCost)
                    obj += flow[r] * rc[r];
                else
                    obj += rc[r];
            }
            out.lp.objective[col] = p * obj;
            out.lp.eq[s].add(col, 1.0);

            for (int k = 0; k < K; ++k) {
                const std::vector<double>& y = policies[profile[k]];
                double stay = 0.0;
                for (int r = 0; r < R; ++r) stay += y[r] * rc[r];
                const double scale = row_scale ? (*row_scale)[k] : 1.0;
                for (int r = 0; r < R; ++r) {
                    double coeff = p * scale * (stay - rc[r]);
                    if (coeff != 0.0)
                        out.lp.ineq[out.obedience_row(k, profile[k], r)].add(
                            col, coeff);
                }
            }
            ++a;
        } while (joint.next(profile));
    }
    return out;
}

struct OptimalMechanism {
    RecommendationRule rule;
    double value = 0.0;
    std::int64_t lp_iterations = 0;
    double duality_gap = 0.0;
};

/// Solve for the cost-minimizing obedient rule. The emitted rule drops atoms
/// below `drop_tol`; its planner_value matches the LP optimum within 1e-9.
inline OptimalMechanism solve_optimal_mechanism(const Scenario& scen,
                                                const LpOptions& opt = {},
                                                std::uint64_t cap = 1000000,
                                                double drop_tol = 1e-12) {
    PlannerLp built = build_planner_lp(scen, cap);
    LpSolution sol = solve_lp(built.lp, opt);
    if (sol.status == LpStatus::kInfeasible)
        throw InfeasibleError(
            "planner: obedience LP infeasible on this grid (no obedient "
            "grid-supported rule exists)");
    if (sol.status == LpStatus::kUnbounded)
        throw LpNumericalError("planner: LP unbounded; objective is malformed");

    JointGrid joint(scen.K, built.grid_size,
                    std::numeric_limits<std::uint64_t>::max());
    OptimalMechanism out;
    out.rule.grid_m = scen.grid_m;
    out.rule.K = scen.K;
    out.rule.state_labels = scen.net.states;
    out.rule.atoms_by_state.resize(built.num_states);
    for (int s = 0; s < built.num_states; ++s) {
        for (std::uint64_t a = 0; a < built.tuples; ++a) {
            double w = sol.primal[built.var_index(s, a)];
            if (w > drop_tol)
                out.rule.atoms_by_state[s].push_back(RuleAtom{joint.decode(a), w});
        }
    }
    out.value = sol.value;
    out.lp_iterations = sol.iterations;
    out.duality_gap = sol.duality_gap;

    double check = planner_value(out.rule, scen);
    if (std::fabs(check - sol.value) > 1e-9 * std::max(1.0, std::fabs(sol.value)))
        throw LpNumericalError("planner: rule value " + format_double(check) +
                               " disagrees with LP optimum " +
                               format_double(sol.value));
    return out;
}

/// Per-state unconstrained grid minimum of the objective (information lower
/// bound): sum_s p(s) min over grid tuples of Objective(f(tuple, x), s).
inline double baseline_full_information(const Scenario& scen,
                                        std::uint64_t cap = 1000000) {
    scen.validate();
    const PartitionProfile x = scen.partition_profile();
    PolicyGrid grid = scen.grid(cap);
    JointGrid joint(scen.K, grid.size(), cap);
    std::vector<std::vector<double>> policies =
        planner_detail::grid_policy_table(grid);
    const int R = scen.net.num_routes();

    double total = 0.0;
    for (int s = 0; s < scen.net.num_states(); ++s) {
        if (scen.net.prior[s] == 0.0) continue;
        double best = std::numeric_limits<double>::infinity();
        std::vector<int> profile(scen.K, 0);
        do {
            FlowProfile flow;
            flow.f.assign(R, 0.0);
            for (int k = 0; k < scen.K; ++k) {
                double mass = x.x[k] * scen.net.demand;
                for (int r = 0; r < R; ++r)
                    flow.f[r] += policies[profile[k]][r] * mass;
            }
            best = std::min(best, evaluate_objective(scen.objective, flow, s,
                                                     scen.net, scen.costs));
        } while (joint.next(profile));
        total += scen.net.prior[s] * best;
    }
    return total;
}

struct NoInformationBaseline {
    FlowProfile flow;
    int grid_index = -1;
    double value = 0.0;
    double wardrop_gap = 0.0;  // max over used routes of cost above the best
};

/// Wardrop point of the prior-averaged costs, restricted to the grid: the
/// single grid flow minimizing the worst used-route excess over the cheapest
/// route. Exact on grids that contain the averaged equilibrium; ties break
/// toward the lexicographically smallest flow.
inline NoInformationBaseline baseline_no_information(const Scenario& scen) {
    scen.validate();
    PolicyGrid grid = scen.grid();
    const int R = scen.net.num_routes();
    NoInformationBaseline out;
    double best_gap = std::numeric_limits<double>::infinity();
    for (int gidx = 0; gidx < grid.size(); ++gidx) {
        Policy y = grid.policy(gidx);
        FlowProfile flow;
        flow.f.resize(R);
        for (int r = 0; r < R; ++r) flow.f[r] = y.y[r] * scen.net.demand;
        std::vector<double> avg(R, 0.0);
        for (int s = 0; s < scen.net.num_states(); ++s) {
            if (scen.net.prior[s] == 0.0) continue;
            std::vector<double> rc = route_cost(flow, s, scen.net, scen.costs);
            for (int r = 0; r < R; ++r) avg[r] += scen.net.prior[s] * rc[r];
        }
        double cheapest = *std::min_element(avg.begin(), avg.end());
        double gap = 0.0;
        for (int r = 0; r < R; ++r)
            if (y.y[r] > 0.0) gap = std::max(gap, avg[r] - cheapest);
        bool better = gap < best_gap - 1e-15;
        if (!better && gap < best_gap + 1e-15 && out.grid_index >= 0)
            better = flow.f < out.flow.f;  // lexicographic tie-break
        if (better || out.grid_index < 0) {
            best_gap = gap;
            out.flow = flow;
            out.grid_index = gidx;
        }
    }
    out.wardrop_gap = best_gap;
    double value = 0.0;
    for (int s = 0; s < scen.net.num_states(); ++s)
        if (scen.net.prior[s] > 0.0)
            value += scen.net.prior[s] * evaluate_objective(scen.objective,
                                                            out.flow, s, scen.net,
                                                            scen.costs);
    out.value = value;
    return out;
}

/// Optimal value of the fixed-population variant where group k recommends
/// policies on the x^k D - scaled simplex. On a common grid the feasible set
/// coincides with the publicness-specific LP (rows differ by the positive
/// factor x^k D), so the value can never undercut it.
inline double mp_bcwe_value(const Scenario& scen, const LpOptions& opt = {},
                            std::uint64_t cap = 1000000) {
    const PartitionProfile x = scen.partition_profile();
    std::vector<double> scale(scen.K);
    for (int k = 0; k < scen.K; ++k) scale[k] = x.x[k] * scen.net.demand;
    PlannerLp built = build_planner_lp(scen, cap, &scale);
    LpSolution sol = solve_lp(built.lp, opt);
    if (sol.status != LpStatus::kOptimal)
        throw InfeasibleError("mp_bcwe_value: LP not optimal");
    return sol.value;
}

struct SweepCell {
    std::vector<double> x;
    double value = 0.0;
    std::string status;
    std::int64_t solve_ms = 0;  // reserved; fixed at 0 for determinism
};

struct SweepResult {
    std::vector<SweepCell> cells;
    int argmin = -1;
};

/// Enumerate partitions with entries on a uniform step grid (ascending
/// lexicographic order).
inline std::vector<std::vector<double>> partition_grid(int K, double step) {
    int N = static_cast<int>(std::llround(1.0 / step));
    if (N < K) throw ValidationError("partition grid: step too coarse for K");
    std::vector<std::vector<double>> cells;
    std::vector<int> units(K, 0);
    auto rec = [&](auto&& self, int k, int left) -> void {
        if (k == K - 1) {
            if (left >= 1) {
                units[k] = left;
                std::vector<double> x(K);
                for (int i = 0; i < K; ++i) x[i] = units[i] * step;
                cells.push_back(std::move(x));
            }
            return;
        }
        for (int take = 1; take <= left - (K - 1 - k); ++take) {
            units[k] = take;
            self(self, k + 1, left - take);
        }
    };
    rec(rec, 0, N);
    return cells;
}

/// Solve the planner LP across a grid of partitions. Cells are independent;
/// `threads` > 1 runs them concurrently with identical results.
inline SweepResult sweep_partitions(const Scenario& scen, int K, double step,
                                    const LpOptions& opt = {},
                                    std::uint64_t cap = 1000000,
                                    int threads = 1) {
    std::vector<std::vector<double>> cells = partition_grid(K, step);
    SweepResult result;
    result.cells.resize(cells.size());

    auto run_cell = [&](std::size_t i) {
        Scenario cell_scen = scen;
        cell_scen.K = K;
        cell_scen.atomic.reset();
        cell_scen.partition = PartitionProfile{cells[i]};
        SweepCell cell;
        cell.x = cells[i];
        try {
            OptimalMechanism best = solve_optimal_mechanism(cell_scen, opt, cap);
            cell.value = best.value;
            cell.status = "optimal";
        } catch (const InfeasibleError&) {
            cell.value = std::numeric_limits<double>::quiet_NaN();
            cell.status = "infeasible";
        }
        result.cells[i] = std::move(cell);
    };

    if (threads <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
        std::size_t next = 0;
        while (next < cells.size()) {
            std::size_t batch = std::min<std::size_t>(threads, cells.size() - next);
            std::vector<std::future<void>> futs;
            for (std::size_t b = 0; b < batch; ++b)
                futs.push_back(
                    std::async(std::launch::async, run_cell, next + b));
            for (auto& f : futs) f.get();
            next += batch;
        }
    }

    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        if (result.cells[i].status != "optimal") continue;
        if (result.argmin < 0 ||
            result.cells[i].value < result.cells[result.argmin].value - 1e-12)
            result.argmin = static_cast<int>(i);
    }
    return result;
}

/// Obedience LP for a weighted atomic scenario: rows per (traveler,
/// recommended atom, grid deviation). Deviations range over the whole grid
/// because the deviant's own weight moves loads. Intended for small
/// instances; the same cap guards it.
inline PlannerLp build_atomic_obedience_lp(const Scenario& scen,
                                           std::uint64_t cap = 1000000) {
    scen.validate();
    if (!scen.atomic)
        throw ValidationError("build_atomic_obedience_lp: scenario not atomic");
    const AtomicPublicness& pub = *scen.atomic;
    PolicyGrid grid = scen.grid(cap);
    const int G = grid.size();
    const int R = scen.net.num_routes();
    const int S = scen.net.num_states();
    const int K = scen.K;

    JointGrid joint(K, G, cap);
    if (joint.size * static_cast<std::uint64_t>(S) > cap)
        throw CapExceeded("atomic lp: variable count exceeds cap");

    PlannerLp out;
    out.num_states = S;
    out.grid_size = G;
    out.num_routes = R;  // row layout below uses grid deviations, not routes
    out.K = K;
    out.tuples = joint.size;
    out.lp.resize(static_cast<int>(joint.size * S));
    out.lp.ineq.assign(static_cast<std::size_t>(pub.n) * G * G, SparseRow{});
    out.lp.ineq_rhs.assign(static_cast<std::size_t>(pub.n) * G * G, 0.0);
    out.lp.eq.assign(S, SparseRow{});
    out.lp.eq_rhs.assign(S, 1.0);

    for (int s = 0; s < S; ++s) {
        const double p = scen.net.prior[s];
        std::vector<int> profile(K, 0);
        std::uint64_t a = 0;
        do {
            const int col = static_cast<int>(out.var_index(s, a));
            out.lp.eq[s].add(col, 1.0);
            std::vector<Policy> pols;
            for (int g : profile) pols.push_back(grid.policy(g));

            FlowProfile base_flow = atomic_flow(pols, pub);
            out.lp.objective[col] =
                p * evaluate_objective(scen.objective, base_flow, s, scen.net,
                                       scen.costs);
            std::vector<double> rc_stay =
                route_cost(base_flow, s, scen.net, scen.costs);

            for (int i = 0; i < pub.n; ++i) {
                int k = pub.group_of[i];
                double stay = 0.0;
                for (int r = 0; r < R; ++r)
                    stay += pols[k].y[r] * pub.weights[i] * rc_stay[r];
                for (int g = 0; g < G; ++g) {
                    Policy dev = grid.policy(g);
                    FlowProfile flow =
                        atomic_flow(pols, pub, std::make_pair(i, dev));
                    std::vector<double> rc =
                        route_cost(flow, s, scen.net, scen.costs);
                    double dev_cost = 0.0;
                    for (int r = 0; r < R; ++r)
                        dev_cost += dev.y[r] * pub.weights[i] * rc[r];
                    double coeff = p * (stay - dev_cost);
                    if (coeff != 0.0)
                        out.lp.ineq[(static_cast<std::size_t>(i) * G +
                                     profile[k]) * G + g]
                            .add(col, coeff);
                }
            }
            ++a;
        } while (joint.next(profile));
    }
    return out;
}

/// Split group k of a rule into two groups that always receive identical
/// recommendations. Preserves obedience and the induced flows when the
/// partition factor is split accordingly.
inline RecommendationRule lift_rule_split_group(const RecommendationRule& rule,
                                                int k) {
    RecommendationRule out = rule;
    out.K = rule.K + 1;
    for (auto& atoms : out.atoms_by_state)
        for (RuleAtom& atom : atoms)
            atom.profile.insert(atom.profile.begin() + k + 1, atom.profile[k]);
    return out;
}

/// Matching scenario lift: partition factor x^k is split into (alpha,
/// x^k - alpha).
inline Scenario lift_scenario_split_group(const Scenario& scen, int k,
                                          double alpha) {
    Scenario out = scen;
    out.K = scen.K + 1;
    out.atomic.reset();
    PartitionProfile x = scen.partition_profile();
    if (!(alpha > 0.0) || !(alpha < x.x[k]))
        throw ValidationError("lift: alpha must split x^k into positive parts");
    x.x.insert(x.x.begin() + k + 1, x.x[k] - alpha);
    x.x[k] = alpha;
    out.partition = std::move(x);
    return out;
}

}  // namespace pslab

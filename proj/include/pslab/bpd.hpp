// Partition-disparity analysis: attainable flow polytopes for an edge-load
// target, pair-residue ranges, the disparity budget Gamma, the BPD test, and
// the implementing-partition scan that cross-checks the two.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pslab/lp.hpp"
#include "pslab/mechanism.hpp"
#include "pslab/planner.hpp"

namespace pslab {

/// Residues of a distinguished group pair: per-route flows for groups k, j.
struct ResiduePair {
    std::vector<double> fk;
    std::vector<double> fj;
};

/// Normalized per-route difference between two residue pairs.
inline double lambda_r(const ResiduePair& a, const ResiduePair& b, int r,
                       double demand) {
    return ((a.fk[r] - b.fk[r]) + (a.fj[r] - b.fj[r])) / demand;
}

/// Constraint block whose feasible set is the attainable flow polytope of
/// `load_target`: f >= 0, sum f = D, and per-edge load equalities.
inline LpProblem attainable_flow_polytope(const std::vector<double>& load_target,
                                          const Scenario& scen) {
    const int R = scen.net.num_routes();
    const int E = scen.net.num_edges();
    if (load_target.size() != static_cast<std::size_t>(E))
        throw DimensionError("attainable flow: load target length != edge count");
    LpProblem p;
    p.resize(R);
    SparseRow total;
    for (int r = 0; r < R; ++r) total.add(r, 1.0);
    p.add_eq(std::move(total), scen.net.demand);
    for (int e = 0; e < E; ++e) {
        SparseRow row;
        for (int r = 0; r < R; ++r)
            for (int edge : scen.net.routes[r])
                if (edge == e) row.add(r, 1.0);
        p.add_eq(std::move(row), load_target[e]);
    }
    return p;
}

/// Exact [min, max] of the pair-residue flow on route r, over completions of
/// the fixed flows of the remaining groups. `fixed_others[r]` is the total
/// route-r flow already committed by groups outside the pair. Throws
/// InfeasibleError when no residue completes the fixed part.
inline std::pair<double, double> residue_range(
    const std::vector<double>& load_target,
    const std::vector<double>& fixed_others, int route, const Scenario& scen,
    const LpOptions& opt = {}) {
    const int R = scen.net.num_routes();
    if (fixed_others.size() != static_cast<std::size_t>(R))
        throw DimensionError("residue_range: fixed flow length != route count");
    LpProblem base = attainable_flow_polytope(load_target, scen);
    // Shift the fixed part into the right-hand sides; variables are the
    // combined pair residues z_r >= 0.
    for (std::size_t i = 0; i < base.eq.size(); ++i)
        base.eq_rhs[i] -= base.eq[i].dot(fixed_others);

    base.objective.assign(R, 0.0);
    base.objective[route] = 1.0;
    LpSolution lo = solve_lp(base, opt);
    if (lo.status != LpStatus::kOptimal)
        throw InfeasibleError("residue_range: no residue completes the fixed "
                              "group flows");
    base.objective[route] = -1.0;
    LpSolution hi = solve_lp(base, opt);
    if (hi.status != LpStatus::kOptimal)
        throw InfeasibleError("residue_range: no residue completes the fixed "
                              "group flows");
    return {lo.value, -hi.value};
}

/// Disparity budget for a group pair, given the partition factors of the
/// remaining groups. The outer minimum over their grid recommendations is an
/// exhaustive scan (vacuous for K = 2). Reported as computed, even when
/// negative.
inline double gamma(const std::vector<double>& load_target,
                    const std::vector<double>& x_others, const Scenario& scen,
                    const LpOptions& opt = {}, std::uint64_t cap = 1000000) {
    const int R = scen.net.num_routes();
    const double D = scen.net.demand;
    double pair_mass = 1.0;
    for (double xm : x_others) pair_mass -= xm;

    auto range_sum = [&](const std::vector<double>& fixed) -> double {
        double acc = 0.0;
        for (int r = 0; r < R; ++r) {
            auto [lo, hi] = residue_range(load_target, fixed, r, scen, opt);
            acc += (hi - lo) / D;
        }
        return acc;
    };

    if (x_others.empty()) return pair_mass - range_sum(std::vector<double>(R, 0.0));

    PolicyGrid grid = scen.grid(cap);
    JointGrid joint(static_cast<int>(x_others.size()), grid.size(), cap);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> profile(x_others.size(), 0);
    do {
        std::vector<double> fixed(R, 0.0);
        for (std::size_t m = 0; m < x_others.size(); ++m) {
            Policy y = grid.policy(profile[m]);
            for (int r = 0; r < R; ++r) fixed[r] += x_others[m] * y.y[r] * D;
        }
        try {
            best = std::min(best, range_sum(fixed));
        } catch (const InfeasibleError&) {
            // this profile of other-group recommendations admits no completion
        }
    } while (joint.next(profile));
    if (!std::isfinite(best))
        throw InfeasibleError("gamma: no grid profile of the remaining groups "
                              "completes the load target");
    return pair_mass - best;
}

struct BpdPairSlack {
    int k = 0;
    int j = 0;
    double gamma = 0.0;
    double disparity = 0.0;  // |x^k - x^j|
    double slack = 0.0;      // gamma - disparity
};

struct BpdReport {
    bool pass = false;
    std::vector<BpdPairSlack> pairs;
};

/// Bounded-partition-disparity test: |x^k - x^j| <= Gamma for every pair.
inline BpdReport check_bpd(const PartitionProfile& x,
                           const std::vector<double>& load_target,
                           const Scenario& scen, const LpOptions& opt = {},
                           std::uint64_t cap = 1000000) {
    x.validate();
    BpdReport report;
    report.pass = true;
    const int K = x.num_groups();
    for (int k = 0; k < K; ++k) {
        for (int j = k + 1; j < K; ++j) {
            std::vector<double> others;
            for (int m = 0; m < K; ++m)
                if (m != k && m != j) others.push_back(x.x[m]);
            BpdPairSlack cell;
            cell.k = k;
            cell.j = j;
            cell.gamma = gamma(load_target, others, scen, opt, cap);
            cell.disparity = std::fabs(x.x[k] - x.x[j]);
            cell.slack = cell.gamma - cell.disparity;
            if (cell.slack < -1e-9) report.pass = false;
            report.pairs.push_back(cell);
        }
    }
    return report;
}

/// Feasibility of an obedient rule with the given partition whose expected
/// edge loads hit `load_target` within `load_tol`.
inline bool implements_edge_load(const PartitionProfile& x,
                                 const std::vector<double>& load_target,
                                 const Scenario& scen, double load_tol = 1e-7,
                                 const LpOptions& opt = {},
                                 std::uint64_t cap = 1000000) {
    Scenario cell = scen;
    cell.K = x.num_groups();
    cell.atomic.reset();
    cell.partition = x;
    PlannerLp built = build_planner_lp(cell, cap);

    const int E = scen.net.num_edges();
    const int R = scen.net.num_routes();
    if (load_target.size() != static_cast<std::size_t>(E))
        throw DimensionError("implements_edge_load: load target length");
    PolicyGrid grid = cell.grid(cap);
    JointGrid joint(cell.K, grid.size(), cap);

    // Expected-load rows: sum_s p(s) sum_tuple w * load_e(tuple, x), bracketed
    // within load_tol of the target.
    std::vector<SparseRow> load_rows(E);
    for (int s = 0; s < cell.net.num_states(); ++s) {
        const double p = cell.net.prior[s];
        if (p == 0.0) continue;
        std::vector<int> profile(cell.K, 0);
        std::uint64_t a = 0;
        do {
            int col = static_cast<int>(built.var_index(s, a));
            std::vector<double> flow(R, 0.0);
            for (int k = 0; k < cell.K; ++k) {
                Policy y = grid.policy(profile[k]);
                double mass = x.x[k] * cell.net.demand;
                for (int r = 0; r < R; ++r) flow[r] += y.y[r] * mass;
            }
            for (int e = 0; e < E; ++e) {
                double load = 0.0;
                for (int r = 0; r < R; ++r)
                    for (int edge : cell.net.routes[r])
                        if (edge == e) load += flow[r];
                if (load != 0.0) load_rows[e].add(col, p * load);
            }
            ++a;
        } while (joint.next(profile));
    }
    for (int e = 0; e < E; ++e) {
        SparseRow up = load_rows[e];
        built.lp.add_ineq(std::move(up), load_target[e] + load_tol);
        SparseRow down;
        down.cols = load_rows[e].cols;
        down.vals = load_rows[e].vals;
        for (double& v : down.vals) v = -v;
        built.lp.add_ineq(std::move(down), -(load_target[e] - load_tol));
    }
    return lp_feasible(built.lp, opt);
}

struct Theorem2Cell {
    std::vector<double> x;
    bool in_ip = false;
    bool in_bpd = false;
    double min_slack = 0.0;  // min over pairs of gamma - disparity
    bool boundary = false;   // within one grid step of the BPD boundary
};

struct Theorem2Report {
    double partition_step = 0.0;
    std::vector<Theorem2Cell> cells;
    int mismatches = 0;
    int boundary_mismatches = 0;
    bool sets_equal = false;
    bool mismatches_all_boundary = false;
};

/// Scan the partition grid and compare implementing partitions against the
/// BPD test. A mismatch cell is classified "boundary" when some pair's
/// disparity sits within one grid step of its Gamma.
inline Theorem2Report verify_theorem2(const Scenario& scen, int K,
                                      const std::vector<double>& load_target,
                                      double partition_step,
                                      double load_tol = 1e-7,
                                      const LpOptions& opt = {},
                                      std::uint64_t cap = 1000000) {
    Theorem2Report report;
    report.partition_step = partition_step;
    std::vector<std::vector<double>> cells = partition_grid(K, partition_step);

    // Gamma depends on the pair only through the other groups' factors;
    // memoize across cells.
    std::map<std::vector<double>, double> gamma_cache;
    auto gamma_for = [&](const std::vector<double>& others) {
        auto it = gamma_cache.find(others);
        if (it != gamma_cache.end()) return it->second;
        double g = gamma(load_target, others, scen, opt, cap);
        gamma_cache.emplace(others, g);
        return g;
    };

    for (const std::vector<double>& xvec : cells) {
        PartitionProfile x{xvec};
        Theorem2Cell cell;
        cell.x = xvec;
        cell.in_bpd = true;
        cell.min_slack = std::numeric_limits<double>::infinity();
        bool near_boundary = false;
        for (int k = 0; k < K; ++k) {
            for (int j = k + 1; j < K; ++j) {
                std::vector<double> others;
                for (int m = 0; m < K; ++m)
                    if (m != k && m != j) others.push_back(xvec[m]);
                double g = gamma_for(others);
                double disparity = std::fabs(xvec[k] - xvec[j]);
                double slack = g - disparity;
                cell.min_slack = std::min(cell.min_slack, slack);
                if (slack < -1e-9) cell.in_bpd = false;
                if (std::fabs(slack) <= partition_step + 1e-9)
                    near_boundary = true;
            }
        }
        cell.in_ip = implements_edge_load(x, load_target, scen, load_tol, opt, cap);
        cell.boundary = near_boundary;
        if (cell.in_ip != cell.in_bpd) {
            ++report.mismatches;
            if (cell.boundary) ++report.boundary_mismatches;
        }
        report.cells.push_back(std::move(cell));
    }
    report.sets_equal = report.mismatches == 0;
    report.mismatches_all_boundary =
        report.mismatches == report.boundary_mismatches;
    return report;
}

inline void write_theorem2_csv(const Theorem2Report& report, std::ostream& out) {
    if (report.cells.empty()) return;
    std::size_t K = report.cells.front().x.size();
    for (std::size_t k = 1; k <= K; ++k) out << "x" << k << ",";
    out << "in_ip,in_bpd,slack,boundary_flag\n";
    for (const Theorem2Cell& cell : report.cells) {
        for (double v : cell.x) out << format_double(v) << ",";
        out << (cell.in_ip ? 1 : 0) << "," << (cell.in_bpd ? 1 : 0) << ","
            << format_double(cell.min_slack) << "," << (cell.boundary ? 1 : 0)
            << "\n";
    }
}

}  // namespace pslab

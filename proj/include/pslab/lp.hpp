// Self-contained linear-program solver: two-phase revised simplex with a
// dense basis inverse and sparse column storage.
//
// Pivot policy is deterministic. The default rule picks the most negative
// reduced cost (ties broken by lowest column index) and falls back to Bland's
// rule after a run of degenerate steps, which restores the anti-cycling
// guarantee; `PivotRule::kBland` forces Bland's rule throughout. There is no
// randomized perturbation anywhere, so identical inputs give byte-identical
// solutions.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "pslab/errors.hpp"
#include "pslab/numeric.hpp"

namespace pslab {

/// One sparse constraint row.
struct SparseRow {
    std::vector<int> cols;
    std::vector<double> vals;

    void add(int col, double val) {
        cols.push_back(col);
        vals.push_back(val);
    }

    double dot(const std::vector<double>& v) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < cols.size(); ++i) acc += vals[i] * v[cols[i]];
        return acc;
    }
};

/// min c'v  s.t.  A v <= b, E v = d, v >= lb (lb defaults to 0).
struct LpProblem {
    int num_vars = 0;
    std::vector<double> objective;
    std::vector<double> lower_bounds;  // empty means all zero
    std::vector<SparseRow> ineq;
    std::vector<double> ineq_rhs;
    std::vector<SparseRow> eq;
    std::vector<double> eq_rhs;

    void resize(int n) {
        num_vars = n;
        objective.assign(n, 0.0);
    }

    double lower_bound(int j) const {
        return lower_bounds.empty() ? 0.0 : lower_bounds[j];
    }

    void add_ineq(SparseRow row, double rhs) {
        ineq.push_back(std::move(row));
        ineq_rhs.push_back(rhs);
    }

    void add_eq(SparseRow row, double rhs) {
        eq.push_back(std::move(row));
        eq_rhs.push_back(rhs);
    }

    int num_rows() const {
        return static_cast<int>(ineq.size() + eq.size());
    }

    void check_shape() const {
        if (static_cast<int>(objective.size()) != num_vars)
            throw DimensionError("lp: objective length != num_vars");
        if (!lower_bounds.empty() &&
            static_cast<int>(lower_bounds.size()) != num_vars)
            throw DimensionError("lp: lower_bounds length != num_vars");
        if (ineq.size() != ineq_rhs.size() || eq.size() != eq_rhs.size())
            throw DimensionError("lp: row/rhs count mismatch");
        auto check_rows = [&](const std::vector<SparseRow>& rows) {
            for (const SparseRow& row : rows) {
                if (row.cols.size() != row.vals.size())
                    throw DimensionError("lp: ragged sparse row");
                for (std::size_t i = 0; i < row.cols.size(); ++i) {
                    if (row.cols[i] < 0 || row.cols[i] >= num_vars)
                        throw DimensionError("lp: column index out of range");
                    if (!std::isfinite(row.vals[i]))
                        throw ValidationError("lp: non-finite coefficient");
                }
            }
        };
        check_rows(ineq);
        check_rows(eq);
        for (double v : objective)
            if (!std::isfinite(v)) throw ValidationError("lp: non-finite objective");
    }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

enum class PivotRule { kDantzigBland, kBland };

struct LpOptions {
    double tol_feasibility = 1e-9;
    double tol_optimality = 1e-9;
    double tol_duality = 1e-7;  // relative, reported-solution check
    double tol_pivot = 1e-9;
    PivotRule pivot = PivotRule::kDantzigBland;
    std::int64_t max_iterations = 0;  // 0 = automatic
    bool check_solution = true;
};

struct LpSolution {
    LpStatus status = LpStatus::kInfeasible;
    double value = 0.0;
    std::vector<double> primal;
    std::vector<double> dual;  // inequality rows first, then equality rows
    std::int64_t iterations = 0;
    double feasibility_residual = 0.0;
    double duality_gap = 0.0;  // relative
};

namespace lp_detail {

// Standard-form working problem: min c'x, N x = b, x >= 0, where columns are
// [structural | slack | artificial].
struct Simplex {
    int m = 0;            // rows
    int n_struct = 0;     // structural columns
    int n_slack = 0;
    int n_total = 0;      // structural + slack + artificial
    std::vector<int> col_ptr;   // CSC over structural+slack columns
    std::vector<int> row_idx;
    std::vector<double> val;
    std::vector<double> cost;       // phase-2 costs, artificials get 0
    std::vector<double> rhs;        // nonnegative after sign normalization
    std::vector<int> art_of_row;    // artificial column for row, or -1
    std::vector<double> binv_t;     // m x m, column-major view of B^{-1}
    std::vector<int> basis;         // row -> basic column
    std::vector<int> pos_in_basis;  // column -> row or -1
    std::vector<double> x_basic;
    std::vector<char> banned;       // artificials that left the basis

    bool is_artificial(int j) const { return j >= n_struct + n_slack; }

    // d = B^{-1} * A_j for a structural/slack/artificial column.
    void ftran(int j, std::vector<double>& d) const {
        std::fill(d.begin(), d.end(), 0.0);
        if (is_artificial(j)) {
            int r = j - (n_struct + n_slack);
            const double* col = &binv_t[static_cast<std::size_t>(r) * m];
            for (int i = 0; i < m; ++i) d[i] = col[i];
            return;
        }
        for (int p = col_ptr[j]; p < col_ptr[j + 1]; ++p) {
            double a = val[p];
            const double* col = &binv_t[static_cast<std::size_t>(row_idx[p]) * m];
            for (int i = 0; i < m; ++i) d[i] += a * col[i];
        }
    }

    // y = c_B' * B^{-1} for the given basic cost vector.
    void btran(const std::vector<double>& cb, std::vector<double>& y) const {
        for (int k = 0; k < m; ++k) {
            const double* col = &binv_t[static_cast<std::size_t>(k) * m];
            double acc = 0.0;
            for (int i = 0; i < m; ++i) acc += cb[i] * col[i];
            y[k] = acc;
        }
    }

    double reduced_cost(int j, const std::vector<double>& y,
                        const std::vector<double>& c) const {
        double acc = c[j];
        if (is_artificial(j)) {
            acc -= y[j - (n_struct + n_slack)];
            return acc;
        }
        for (int p = col_ptr[j]; p < col_ptr[j + 1]; ++p)
            acc -= y[row_idx[p]] * val[p];
        return acc;
    }

    void pivot(int enter, int leave_row, const std::vector<double>& d) {
        double dr = d[leave_row];
        // binv_t holds B^{-1} transposed: binv_t[k*m + i] = B^{-1}(i, k).
        for (int k = 0; k < m; ++k) {
            double* col = &binv_t[static_cast<std::size_t>(k) * m];
            double t = col[leave_row] / dr;
            col[leave_row] = t;
            if (t != 0.0) {
                for (int i = 0; i < m; ++i)
                    if (i != leave_row) col[i] -= d[i] * t;
            }
        }
        double theta = x_basic[leave_row] / dr;
        for (int i = 0; i < m; ++i) x_basic[i] -= theta * d[i];
        x_basic[leave_row] = theta;
        int old = basis[leave_row];
        pos_in_basis[old] = -1;
        if (is_artificial(old)) banned[old] = 1;
        basis[leave_row] = enter;
        pos_in_basis[enter] = leave_row;
    }
};

}  // namespace lp_detail

/// Solve the LP. Throws LpIterationLimit when the pivot budget is exhausted
/// (distinct from infeasibility) and LpNumericalError when the finished
/// solution fails its own feasibility/duality checks.
inline LpSolution solve_lp(const LpProblem& p, const LpOptions& opt = {}) {
    p.check_shape();
    using lp_detail::Simplex;

    // Presolve: an inequality row whose coefficients are all nonpositive can
    // never be violated by x >= lb when its rhs clears the bound activity;
    // dropping such rows (dual 0) trims a large degenerate block from the
    // obedience-style programs this solver sees.
    {
        bool any_redundant = false;
        for (std::size_t i = 0; i < p.ineq.size() && !any_redundant; ++i) {
            bool nonpositive = true;
            for (double v : p.ineq[i].vals)
                if (v > 0.0) nonpositive = false;
            double lb_activity = 0.0;
            if (!p.lower_bounds.empty()) lb_activity = p.ineq[i].dot(p.lower_bounds);
            if (nonpositive && lb_activity <= p.ineq_rhs[i]) any_redundant = true;
        }
        if (any_redundant) {
            LpProblem reduced;
            reduced.num_vars = p.num_vars;
            reduced.objective = p.objective;
            reduced.lower_bounds = p.lower_bounds;
            reduced.eq = p.eq;
            reduced.eq_rhs = p.eq_rhs;
            std::vector<int> kept;
            for (std::size_t i = 0; i < p.ineq.size(); ++i) {
                bool nonpositive = true;
                for (double v : p.ineq[i].vals)
                    if (v > 0.0) nonpositive = false;
                double lb_activity = 0.0;
                if (!p.lower_bounds.empty())
                    lb_activity = p.ineq[i].dot(p.lower_bounds);
                if (nonpositive && lb_activity <= p.ineq_rhs[i]) continue;
                kept.push_back(static_cast<int>(i));
                reduced.ineq.push_back(p.ineq[i]);
                reduced.ineq_rhs.push_back(p.ineq_rhs[i]);
            }
            LpOptions inner = opt;
            LpSolution sol = solve_lp(reduced, inner);
            // re-inflate the dual vector with zeros for dropped rows
            std::vector<double> dual(p.ineq.size() + p.eq.size(), 0.0);
            for (std::size_t i = 0; i < kept.size(); ++i) dual[kept[i]] = sol.dual[i];
            for (std::size_t i = 0; i < p.eq.size(); ++i)
                dual[p.ineq.size() + i] = sol.dual[reduced.ineq.size() + i];
            sol.dual = std::move(dual);
            return sol;
        }
    }

    const int n = p.num_vars;
    const int m_ineq = static_cast<int>(p.ineq.size());
    const int m_eq = static_cast<int>(p.eq.size());
    const int m = m_ineq + m_eq;

    Simplex sx;
    sx.m = m;
    sx.n_struct = n;
    sx.n_slack = m_ineq;
    sx.n_total = n + m_ineq + m;

    // rhs after shifting out lower bounds; rows kept in (ineq, eq) order.
    std::vector<double> shifted_rhs(m);
    std::vector<double> lb(n, 0.0);
    if (!p.lower_bounds.empty()) lb = p.lower_bounds;
    bool any_lb = false;
    for (double v : lb)
        if (v != 0.0) any_lb = true;

    auto row_at = [&](int i) -> const SparseRow& {
        return i < m_ineq ? p.ineq[i] : p.eq[i - m_ineq];
    };
    for (int i = 0; i < m; ++i) {
        double b = i < m_ineq ? p.ineq_rhs[i] : p.eq_rhs[i - m_ineq];
        if (any_lb) b -= row_at(i).dot(lb);
        shifted_rhs[i] = b;
    }

    std::vector<int> row_sign(m, 1);
    for (int i = 0; i < m; ++i)
        if (shifted_rhs[i] < 0.0) row_sign[i] = -1;

    // CSC for structural + slack columns, with row signs folded in.
    {
        std::vector<int> count(n + m_ineq, 0);
        for (int i = 0; i < m; ++i)
            for (int c : row_at(i).cols) ++count[c];
        for (int i = 0; i < m_ineq; ++i) ++count[n + i];
        sx.col_ptr.assign(n + m_ineq + 1, 0);
        for (int j = 0; j < n + m_ineq; ++j)
            sx.col_ptr[j + 1] = sx.col_ptr[j] + count[j];
        sx.row_idx.assign(sx.col_ptr.back(), 0);
        sx.val.assign(sx.col_ptr.back(), 0.0);
        std::vector<int> fill = sx.col_ptr;
        for (int i = 0; i < m; ++i) {
            const SparseRow& row = row_at(i);
            for (std::size_t k = 0; k < row.cols.size(); ++k) {
                int j = row.cols[k];
                sx.row_idx[fill[j]] = i;
                sx.val[fill[j]] = row.vals[k] * row_sign[i];
                ++fill[j];
            }
        }
        for (int i = 0; i < m_ineq; ++i) {
            int j = n + i;
            sx.row_idx[fill[j]] = i;
            sx.val[fill[j]] = 1.0 * row_sign[i];
            ++fill[j];
        }
    }

    sx.rhs.resize(m);
    for (int i = 0; i < m; ++i) sx.rhs[i] = shifted_rhs[i] * row_sign[i];

    sx.cost.assign(sx.n_total, 0.0);
    for (int j = 0; j < n; ++j) sx.cost[j] = p.objective[j];

    // Initial basis: slack where usable, artificial otherwise. Artificial
    // columns are implicit unit columns indexed by row.
    sx.art_of_row.assign(m, -1);
    sx.basis.assign(m, -1);
    sx.pos_in_basis.assign(sx.n_total, -1);
    sx.banned.assign(sx.n_total, 0);
    sx.x_basic = sx.rhs;
    sx.binv_t.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i)
        sx.binv_t[static_cast<std::size_t>(i) * m + i] = 1.0;

    std::vector<char> needs_artificial(m, 1);
    for (int i = 0; i < m_ineq; ++i) {
        if (row_sign[i] == 1) {
            sx.basis[i] = n + i;
            sx.pos_in_basis[n + i] = i;
            needs_artificial[i] = 0;
        }
    }
    std::vector<double> phase1_cost(sx.n_total, 0.0);
    for (int i = 0; i < m; ++i) {
        if (needs_artificial[i]) {
            int j = n + m_ineq + i;
            sx.art_of_row[i] = j;
            sx.basis[i] = j;
            sx.pos_in_basis[j] = i;
            phase1_cost[j] = 1.0;
        } else {
            sx.banned[n + m_ineq + i] = 1;  // unused artificial slot
        }
    }

    const std::int64_t max_iters =
        opt.max_iterations > 0
            ? opt.max_iterations
            : 200ll * (m + 1) + 20ll * (n + m_ineq) + 20000ll;

    std::vector<double> y(m), d(m), cb(m);
    std::vector<int> ties;
    std::int64_t iterations = 0;
    int degenerate_streak = 0;
    bool bland_mode = opt.pivot == PivotRule::kBland;

    auto run_phase = [&](const std::vector<double>& cost, bool phase1) {
        while (true) {
            if (++iterations > max_iters)
                throw LpIterationLimit(
                    "lp: iteration cap " + std::to_string(max_iters) +
                    " exceeded after " + std::to_string(iterations - 1) +
                    " pivots");
            for (int i = 0; i < m; ++i) cb[i] = cost[sx.basis[i]];
            sx.btran(cb, y);

            // entering column; artificials never re-enter. The lexicographic
            // ratio test below already rules out cycling; a long degenerate
            // run additionally drops this phase to Bland's rule as a
            // belt-and-braces guard against tolerance-driven stalls.
            if (degenerate_streak >= 100) bland_mode = true;
            int enter = -1;
            const int limit = sx.n_struct + sx.n_slack;
            double best = -opt.tol_optimality;
            for (int j = 0; j < limit; ++j) {
                if (sx.pos_in_basis[j] >= 0 || sx.banned[j]) continue;
                double rc = sx.reduced_cost(j, y, cost);
                if (rc < best) {
                    enter = j;
                    if (bland_mode) break;
                    best = rc;
                }
            }
            if (enter < 0) return true;  // optimal for this phase

            sx.ftran(enter, d);

            // leaving row; basic artificials with nonzero pivot leave first
            // (zero step keeps feasibility and drives them out).
            int leave = -1;
            if (!phase1) {
                for (int i = 0; i < m; ++i) {
                    if (sx.is_artificial(sx.basis[i]) &&
                        std::fabs(d[i]) > opt.tol_pivot) {
                        if (leave < 0 || sx.basis[i] < sx.basis[leave]) leave = i;
                    }
                }
            }
            if (leave < 0) {
                double best_ratio = std::numeric_limits<double>::infinity();
                ties.clear();
                for (int i = 0; i < m; ++i) {
                    if (d[i] > opt.tol_pivot) {
                        double ratio = sx.x_basic[i] / d[i];
                        if (ratio < best_ratio - 1e-12) {
                            best_ratio = ratio;
                            ties.clear();
                            ties.push_back(i);
                        } else if (ratio <= best_ratio + 1e-12) {
                            ties.push_back(i);
                        }
                    }
                }
                if (ties.empty()) return false;  // unbounded direction
                // Lexicographic tie-break over rows of B^{-1}: deterministic
                // and cycle-free without perturbation.
                for (int k = 0; k < m && ties.size() > 1; ++k) {
                    double best_q = std::numeric_limits<double>::infinity();
                    for (int i : ties) {
                        double q =
                            sx.binv_t[static_cast<std::size_t>(k) * m + i] / d[i];
                        if (q < best_q) best_q = q;
                    }
                    std::size_t keep = 0;
                    for (std::size_t t = 0; t < ties.size(); ++t) {
                        double q = sx.binv_t[static_cast<std::size_t>(k) * m +
                                             ties[t]] /
                                   d[ties[t]];
                        if (q <= best_q + 1e-12) ties[keep++] = ties[t];
                    }
                    ties.resize(keep);
                }
                leave = ties.front();
                degenerate_streak =
                    best_ratio < 1e-12 ? degenerate_streak + 1 : 0;
            }
            sx.pivot(enter, leave, d);
        }
    };

    LpSolution sol;
    sol.primal.assign(n, 0.0);
    sol.dual.assign(m, 0.0);

    // Phase 1.
    bool phase1_needed = false;
    for (int i = 0; i < m; ++i)
        if (needs_artificial[i]) phase1_needed = true;
    if (phase1_needed) {
        if (!run_phase(phase1_cost, true))
            throw LpNumericalError("lp: unbounded phase-1 problem");
        double art_sum = 0.0;
        for (int i = 0; i < m; ++i)
            if (sx.is_artificial(sx.basis[i])) art_sum += sx.x_basic[i];
        if (art_sum > opt.tol_feasibility) {
            sol.status = LpStatus::kInfeasible;
            sol.iterations = iterations;
            return sol;
        }
        for (int j = sx.n_struct + sx.n_slack; j < sx.n_total; ++j)
            if (sx.pos_in_basis[j] < 0) sx.banned[j] = 1;
        // Pin surviving basic artificials to exactly zero so the phase-2
        // drive-out pivots take a zero step.
        for (int i = 0; i < m; ++i)
            if (sx.is_artificial(sx.basis[i])) sx.x_basic[i] = 0.0;
    }

    // Phase 2.
    degenerate_streak = 0;
    bland_mode = opt.pivot == PivotRule::kBland;
    if (!run_phase(sx.cost, false)) {
        sol.status = LpStatus::kUnbounded;
        sol.iterations = iterations;
        return sol;
    }

    // Extract primal (shift lower bounds back in) and duals.
    for (int j = 0; j < n; ++j) {
        double xj = sx.pos_in_basis[j] >= 0 ? sx.x_basic[sx.pos_in_basis[j]] : 0.0;
        if (xj < 0.0 && xj > -opt.tol_feasibility) xj = 0.0;
        sol.primal[j] = xj + lb[j];
    }
    for (int i = 0; i < m; ++i) cb[i] = sx.cost[sx.basis[i]];
    sx.btran(cb, y);
    for (int i = 0; i < m; ++i) sol.dual[i] = y[i] * row_sign[i];

    double value = 0.0;
    for (int j = 0; j < n; ++j) value += p.objective[j] * sol.primal[j];
    sol.value = value;
    sol.status = LpStatus::kOptimal;
    sol.iterations = iterations;

    // Post-solve checks: primal feasibility and the relative duality gap.
    double resid = 0.0;
    for (int i = 0; i < m_ineq; ++i) {
        double lhs = p.ineq[i].dot(sol.primal);
        resid = std::max(resid, lhs - p.ineq_rhs[i]);
    }
    for (int i = 0; i < m_eq; ++i) {
        double lhs = p.eq[i].dot(sol.primal);
        resid = std::max(resid, std::fabs(lhs - p.eq_rhs[i]));
    }
    for (int j = 0; j < n; ++j)
        resid = std::max(resid, lb[j] - sol.primal[j]);
    sol.feasibility_residual = resid;

    double dual_value = 0.0;
    for (int i = 0; i < m; ++i) dual_value += sol.dual[i] * shifted_rhs[i];
    for (int j = 0; j < n; ++j) dual_value += p.objective[j] * lb[j];
    sol.duality_gap =
        std::fabs(sol.value - dual_value) / std::max(1.0, std::fabs(sol.value));

    if (opt.check_solution) {
        if (sol.feasibility_residual > 10 * opt.tol_feasibility)
            throw LpNumericalError("lp: primal residual " +
                                   format_double(sol.feasibility_residual));
        if (sol.duality_gap > opt.tol_duality)
            throw LpNumericalError("lp: relative duality gap " +
                                   format_double(sol.duality_gap));
    }
    return sol;
}

/// Phase-1 feasibility test only.
inline bool lp_feasible(const LpProblem& p, const LpOptions& opt = {}) {
    LpProblem probe = p;
    probe.objective.assign(p.num_vars, 0.0);
    LpOptions o = opt;
    o.check_solution = false;
    try {
        LpSolution sol = solve_lp(probe, o);
        return sol.status == LpStatus::kOptimal;
    } catch (const LpNumericalError&) {
        return false;
    }
}

/// Debug dump in CPLEX LP text format.
inline void write_lp_format(const LpProblem& p, std::ostream& out,
                            const std::string& name = "pslab") {
    out << "\\ " << name << "\n";
    out << "Minimize\n obj:";
    for (int j = 0; j < p.num_vars; ++j) {
        double c = p.objective[j];
        if (c == 0.0) continue;
        out << (c >= 0 ? " + " : " - ") << format_double(std::fabs(c)) << " v"
            << j;
    }
    out << "\nSubject To\n";
    auto dump_row = [&](const SparseRow& row, const char* rel, double rhs,
                        const std::string& label) {
        out << " " << label << ":";
        for (std::size_t i = 0; i < row.cols.size(); ++i) {
            double a = row.vals[i];
            out << (a >= 0 ? " + " : " - ") << format_double(std::fabs(a)) << " v"
                << row.cols[i];
        }
        out << " " << rel << " " << format_double(rhs) << "\n";
    };
    for (std::size_t i = 0; i < p.ineq.size(); ++i)
        dump_row(p.ineq[i], "<=", p.ineq_rhs[i], "c" + std::to_string(i));
    for (std::size_t i = 0; i < p.eq.size(); ++i)
        dump_row(p.eq[i], "=", p.eq_rhs[i],
                 "e" + std::to_string(p.ineq.size() + i));
    out << "Bounds\n";
    for (int j = 0; j < p.num_vars; ++j)
        out << " v" << j << " >= " << format_double(p.lower_bound(j)) << "\n";
    out << "End\n";
}

}  // namespace pslab

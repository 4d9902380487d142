// Weighted atomic game evaluation: seeded realization sampling, exact
// obedience gaps, and the atomic-to-nonatomic convergence experiment.
#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "pslab/costs.hpp"
#include "pslab/mechanism.hpp"
#include "pslab/obedience.hpp"
#include "pslab/rng.hpp"

namespace pslab {

struct Realization {
    int state = 0;
    std::vector<int> profile;  // grid index per group
};

/// Draw (state, recommendation profile) for an atomic scenario. Uses the
/// counter-based generator from rng.hpp: draw 2i is the state for sample i,
/// draw 2i+1 picks the support atom by cumulative weight in atom order.
inline Realization sample_realization(const RecommendationRule& rule,
                                      const Scenario& scen, CounterRng& rng) {
    Realization out;
    double u = rng.next_unit();
    double acc = 0.0;
    int S = scen.net.num_states();
    out.state = S - 1;
    for (int s = 0; s < S; ++s) {
        acc += scen.net.prior[s];
        if (u < acc) {
            out.state = s;
            break;
        }
    }
    double v = rng.next_unit();
    acc = 0.0;
    const auto& atoms = rule.atoms_by_state[out.state];
    if (atoms.empty())
        throw ValidationError("sample_realization: state has no atoms");
    out.profile = atoms.back().profile;
    for (const RuleAtom& atom : atoms) {
        acc += atom.weight;
        if (v < acc) {
            out.profile = atom.profile;
            break;
        }
    }
    return out;
}

struct AtomicGapWitness {
    double max_gap = 0.0;
    int traveler = -1;
    int group = -1;
    int recommended = -1;
    int deviation_grid = -1;  // grid index of the best deviation policy
};

/// Exact worst obedience gap of an atomic scenario: max over travelers,
/// support atoms of their group, and grid deviations. No sampling: the
/// support is enumerated, so repeated runs are identical.
inline AtomicGapWitness atomic_obedience_gap(const RecommendationRule& rule,
                                             const Scenario& scen,
                                             std::uint64_t support_cap = 200000) {
    if (!scen.atomic)
        throw ValidationError("atomic_obedience_gap: scenario is not atomic");
    ValidationReport vr = validate(rule, scen);
    if (!vr.empty())
        throw ValidationError("atomic_obedience_gap: invalid rule: " +
                              vr.violations.front());
    PolicyGrid grid = scen.grid();
    const AtomicPublicness& pub = *scen.atomic;

    std::uint64_t work = 0;
    for (int k = 0; k < scen.K; ++k)
        work += marginal_support(rule, k).size() *
                static_cast<std::uint64_t>(grid.size());
    work *= static_cast<std::uint64_t>(pub.n);
    if (work > support_cap)
        throw CapExceeded("atomic_obedience_gap: enumeration size " +
                          std::to_string(work) + " exceeds cap (reduce m or K)");

    AtomicGapWitness out;
    out.max_gap = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < scen.K; ++k) {
        std::vector<int> support = marginal_support(rule, k);
        for (int i = 0; i < pub.n; ++i) {
            if (pub.group_of[i] != k) continue;
            for (int atom : support) {
                ExpectedCostQuery stay{k, atom, grid.policy(atom)};
                double stay_cost =
                    expected_cost_atomic(i, stay, rule, scen, grid);
                double best = std::numeric_limits<double>::infinity();
                int best_idx = -1;
                for (int g = 0; g < grid.size(); ++g) {
                    ExpectedCostQuery q{k, atom, grid.policy(g)};
                    double c = expected_cost_atomic(i, q, rule, scen, grid);
                    if (c < best) {
                        best = c;
                        best_idx = g;
                    }
                }
                double gap = stay_cost - best;
                if (gap > out.max_gap) {
                    out.max_gap = gap;
                    out.traveler = i;
                    out.group = k;
                    out.recommended = atom;
                    out.deviation_grid = best_idx;
                }
            }
        }
    }
    if (out.traveler < 0) out.max_gap = 0.0;
    return out;
}

/// Equal-weight atomic version of a nonatomic scenario: n travelers of
/// weight D/n, group sizes x^k n. Requires every x^k n to be integral.
inline Scenario make_equal_weight_atomic(const Scenario& scen, int n) {
    PartitionProfile x = scen.partition_profile();
    AtomicPublicness pub;
    pub.n = n;
    pub.num_groups = scen.K;
    pub.weights.assign(n, scen.net.demand / n);
    int assigned = 0;
    for (int k = 0; k < scen.K; ++k) {
        double exact = x.x[k] * n;
        int count = static_cast<int>(std::llround(exact));
        if (std::fabs(exact - count) > 1e-9 || count < 1)
            throw ValidationError(
                "atomic scenario: n = " + std::to_string(n) +
                " is not divisible by the partition (x^k * n must be a "
                "positive integer for every group)");
        for (int i = 0; i < count; ++i) pub.group_of.push_back(k);
        assigned += count;
    }
    if (assigned != n)
        throw ValidationError("atomic scenario: group sizes do not sum to n");
    Scenario out = scen;
    out.atomic = std::move(pub);
    return out;
}

/// Admissible traveler counts for a partition: the n in [1, limit] with
/// every x^k n integral.
inline std::vector<int> admissible_traveler_counts(const Scenario& scen,
                                                   int limit = 64) {
    PartitionProfile x = scen.partition_profile();
    std::vector<int> out;
    for (int n = 1; n <= limit; ++n) {
        bool ok = true;
        for (double xk : x.x) {
            double exact = xk * n;
            if (std::fabs(exact - std::llround(exact)) > 1e-9 ||
                std::llround(exact) < 1)
                ok = false;
        }
        if (ok) out.push_back(n);
    }
    return out;
}

struct ConvergenceRow {
    int n = 0;
    double max_gap = 0.0;
    int witness_traveler = -1;
    int witness_deviation_grid = -1;
    std::int64_t eval_ms = 0;  // reserved; fixed at 0 for determinism
};

/// Gap table for the equal-weight sequence omega_i = D/n. The rule must be
/// obedient for the nonatomic scenario; each row is an exact enumeration, so
/// the table is deterministic.
inline std::vector<ConvergenceRow> convergence_experiment(
    const RecommendationRule& rule, const Scenario& scen,
    const std::vector<int>& n_list, double eps = 1e-7,
    std::uint64_t support_cap = 200000) {
    ObedienceReport nonatomic = verify_ps_bcwe(rule, scen, eps);
    if (!nonatomic.pass)
        throw ValidationError(
            "convergence_experiment: rule is not obedient for the nonatomic "
            "scenario (max gain " + format_double(nonatomic.max_gain) + ")");
    std::vector<ConvergenceRow> rows;
    for (int n : n_list) {
        Scenario atom_scen;
        try {
            atom_scen = make_equal_weight_atomic(scen, n);
        } catch (const ValidationError&) {
            std::string msg = "convergence_experiment: n = " + std::to_string(n) +
                              " is incompatible with the partition; admissible "
                              "n up to 64:";
            for (int ok : admissible_traveler_counts(scen)) {
                msg += " ";
                msg += std::to_string(ok);
            }
            throw ValidationError(msg);
        }
        AtomicGapWitness w = atomic_obedience_gap(rule, atom_scen, support_cap);
        ConvergenceRow row;
        row.n = n;
        row.max_gap = w.max_gap;
        row.witness_traveler = w.traveler;
        row.witness_deviation_grid = w.deviation_grid;
        rows.push_back(row);
    }
    return rows;
}

inline void write_convergence_csv(const std::vector<ConvergenceRow>& rows,
                                  std::ostream& out) {
    out << "n,max_gap,witness_traveler,witness_route,eval_ms\n";
    for (const ConvergenceRow& row : rows)
        out << row.n << "," << format_double(row.max_gap) << ","
            << row.witness_traveler << "," << row.witness_deviation_grid << ","
            << row.eval_ms << "\n";
}

}  // namespace pslab

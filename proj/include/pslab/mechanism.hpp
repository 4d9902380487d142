// Scenarios (network + costs + publicness + grid + objective) and
// finite-support recommendation rules over the policy grid.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pslab/errors.hpp"
#include "pslab/model.hpp"
#include "pslab/policy.hpp"

namespace pslab {

/// Everything a mechanism analysis needs. Immutable after construction;
/// `grid()` materializes the policy grid on first use.
struct Scenario {
    Network net;
    CostModel costs;
    int K = 1;
    std::optional<PartitionProfile> partition;  // nonatomic factors
    std::optional<AtomicPublicness> atomic;     // finite population
    int grid_m = 1;
    Objective objective = Objective::kTotalCost;

    bool is_atomic() const { return atomic.has_value(); }

    /// Partition factors: supplied for nonatomic scenarios, derived as
    /// |N^k| / n for atomic ones.
    PartitionProfile partition_profile() const {
        if (partition) return *partition;
        if (atomic) return atomic->derived_partition();
        throw ValidationError("scenario: neither partition nor atomic publicness");
    }

    PolicyGrid grid(std::uint64_t cap = 1000000) const {
        return enumerate_policy_grid(net.num_routes(), grid_m, cap);
    }

    void validate() const {
        net.validate();
        costs.validate(net);
        if (K < 1) throw ValidationError("scenario: K must be >= 1");
        if (grid_m < 1) throw ValidationError("scenario: grid_m must be >= 1");
        if (!partition && !atomic)
            throw ValidationError("scenario: needs partition or atomic publicness");
        if (partition) {
            partition->validate();
            if (partition->num_groups() != K)
                throw ValidationError("scenario: partition has " +
                                      std::to_string(partition->num_groups()) +
                                      " groups, K = " + std::to_string(K));
        }
        if (atomic) {
            atomic->validate();
            if (atomic->num_groups != K)
                throw ValidationError("scenario: atomic publicness has " +
                                      std::to_string(atomic->num_groups) +
                                      " groups, K = " + std::to_string(K));
            if (std::fabs(atomic->total_weight() - net.demand) > 1e-9)
                throw ValidationError("scenario: traveler weights sum to " +
                                      format_double(atomic->total_weight()) +
                                      ", demand is " + format_double(net.demand));
            if (partition) {
                PartitionProfile derived = atomic->derived_partition();
                for (int k = 0; k < K; ++k)
                    if (std::fabs(derived.x[k] - partition->x[k]) > 1e-9)
                        throw ValidationError(
                            "scenario: supplied partition disagrees with group "
                            "sizes at group " + std::to_string(k));
            }
        }
    }
};

/// One support atom: a K-tuple of grid policy indices with a weight.
struct RuleAtom {
    std::vector<int> profile;
    double weight = 0.0;
};

/// State-conditional finite-support distribution over K-tuples of grid
/// policies. Atom identity is exact grid-index equality; weights round-trip
/// through files as shortest decimal strings.
struct RecommendationRule {
    int grid_m = 1;
    int K = 1;
    std::vector<std::string> state_labels;
    std::vector<std::vector<RuleAtom>> atoms_by_state;  // aligned with labels

    int num_states() const { return static_cast<int>(state_labels.size()); }

    const std::vector<RuleAtom>& atoms_for(int s) const {
        return atoms_by_state[s];
    }

    bool operator==(const RecommendationRule& other) const {
        if (grid_m != other.grid_m || K != other.K ||
            state_labels != other.state_labels)
            return false;
        if (atoms_by_state.size() != other.atoms_by_state.size()) return false;
        for (std::size_t s = 0; s < atoms_by_state.size(); ++s) {
            if (atoms_by_state[s].size() != other.atoms_by_state[s].size())
                return false;
            for (std::size_t a = 0; a < atoms_by_state[s].size(); ++a) {
                if (atoms_by_state[s][a].profile !=
                    other.atoms_by_state[s][a].profile)
                    return false;
                // bit-exact, not tolerance-based
                if (atoms_by_state[s][a].weight !=
                    other.atoms_by_state[s][a].weight)
                    return false;
            }
        }
        return true;
    }
};

/// Structural check result; empty() means the rule is valid for the scenario.
struct ValidationReport {
    std::vector<std::string> violations;

    bool empty() const { return violations.empty(); }
};

/// Lists every violated invariant with its location. Weight totals are
/// checked per state at 1e-9.
inline ValidationReport validate(const RecommendationRule& rule,
                                 const Scenario& scen) {
    ValidationReport report;
    auto note = [&](const std::string& msg) { report.violations.push_back(msg); };

    if (rule.grid_m != scen.grid_m)
        note("rule grid_m " + std::to_string(rule.grid_m) +
             " != scenario grid_m " + std::to_string(scen.grid_m));
    if (rule.K != scen.K)
        note("rule K " + std::to_string(rule.K) + " != scenario K " +
             std::to_string(scen.K));
    if (rule.num_states() != scen.net.num_states()) {
        note("rule has " + std::to_string(rule.num_states()) +
             " states, scenario has " + std::to_string(scen.net.num_states()));
        return report;
    }
    for (int s = 0; s < rule.num_states(); ++s)
        if (rule.state_labels[s] != scen.net.states[s])
            note("state " + std::to_string(s) + ": label '" +
                 rule.state_labels[s] + "' != scenario label '" +
                 scen.net.states[s] + "'");

    std::uint64_t grid_size = binomial_capped(
        static_cast<std::uint64_t>(rule.grid_m) + scen.net.num_routes() - 1,
        scen.net.num_routes() - 1, 1ull << 62);
    for (int s = 0; s < rule.num_states(); ++s) {
        const std::string& label = rule.state_labels[s];
        double mass = 0.0;
        for (std::size_t a = 0; a < rule.atoms_by_state[s].size(); ++a) {
            const RuleAtom& atom = rule.atoms_by_state[s][a];
            if (atom.profile.size() != static_cast<std::size_t>(rule.K))
                note("state " + label + ", atom " + std::to_string(a) +
                     ": profile has " + std::to_string(atom.profile.size()) +
                     " entries, K = " + std::to_string(rule.K));
            for (int g : atom.profile)
                if (g < 0 || static_cast<std::uint64_t>(g) >= grid_size)
                    note("state " + label + ", atom " + std::to_string(a) +
                         ": invalid policy index " + std::to_string(g));
            if (atom.weight < 0.0)
                note("state " + label + ", atom " + std::to_string(a) +
                     ": negative mass");
            mass += atom.weight;
        }
        if (std::fabs(mass - 1.0) > 1e-9)
            note("state " + label + ": mass " + format_double(mass));
    }
    return report;
}

/// Grid indices group k can receive with positive probability, across all
/// states. Sorted ascending.
inline std::vector<int> marginal_support(const RecommendationRule& rule, int k) {
    if (k < 0 || k >= rule.K)
        throw DimensionError("marginal_support: invalid group " +
                             std::to_string(k));
    std::set<int> support;
    for (const auto& atoms : rule.atoms_by_state)
        for (const RuleAtom& atom : atoms)
            if (atom.weight > 0.0) support.insert(atom.profile[k]);
    return std::vector<int>(support.begin(), support.end());
}

/// Point-mass rule that recommends the same policy tuple in every state.
inline RecommendationRule point_mass_rule(const Scenario& scen,
                                          const std::vector<int>& profile) {
    RecommendationRule rule;
    rule.grid_m = scen.grid_m;
    rule.K = scen.K;
    rule.state_labels = scen.net.states;
    rule.atoms_by_state.assign(scen.net.num_states(), {RuleAtom{profile, 1.0}});
    return rule;
}

}  // namespace pslab

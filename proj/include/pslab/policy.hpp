// Mixed-strategy routing policies, the uniform policy grid, and the
// population partition structures (nonatomic factors and atomic groups).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pslab/errors.hpp"
#include "pslab/model.hpp"
#include "pslab/numeric.hpp"

namespace pslab {

/// Probability vector over routes.
struct Policy {
    std::vector<double> y;

    void validate(double tol = 1e-12) const {
        double total = 0.0;
        for (double v : y) {
            if (v < -tol) throw ValidationError("policy: negative entry");
            total += v;
        }
        if (std::fabs(total - 1.0) > tol)
            throw ValidationError("policy: mass " + format_double(total));
    }
};

/// All policies whose entries are integer multiples of 1/m, enumerated with
/// the first coordinate descending (so index 0 is the pure first route).
/// Counts are kept as exact integers; atom identity is the grid index.
class PolicyGrid {
  public:
    PolicyGrid(int num_routes, int m, std::vector<std::vector<int>> counts)
        : num_routes_(num_routes), m_(m), counts_(std::move(counts)) {}

    int num_routes() const { return num_routes_; }
    int resolution() const { return m_; }
    int size() const { return static_cast<int>(counts_.size()); }

    const std::vector<int>& counts(int idx) const { return counts_[idx]; }

    Policy policy(int idx) const {
        Policy p;
        p.y.resize(num_routes_);
        for (int r = 0; r < num_routes_; ++r)
            p.y[r] = static_cast<double>(counts_[idx][r]) / m_;
        return p;
    }

    /// Index of the pure policy on route r.
    int pure_index(int r) const {
        std::vector<int> c(num_routes_, 0);
        c[r] = m_;
        auto idx = index_of(c);
        return *idx;  // pure vertices are always present
    }

    /// Grid index of an exact count vector, if present.
    std::optional<int> index_of(const std::vector<int>& c) const {
        auto it = std::lower_bound(counts_.begin(), counts_.end(), c, Before);
        if (it == counts_.end() || *it != c) return std::nullopt;
        return static_cast<int>(it - counts_.begin());
    }

    /// Enumeration order: descending lexicographic on the count vector.
    static bool Before(const std::vector<int>& a, const std::vector<int>& b) {
        return a > b;
    }

  private:
    int num_routes_;
    int m_;
    std::vector<std::vector<int>> counts_;
};

/// Enumerate the full grid. The number of atoms is C(m + R - 1, R - 1);
/// throws CapExceeded beyond `cap` (default 10^6).
inline PolicyGrid enumerate_policy_grid(int num_routes, int m,
                                        std::uint64_t cap = 1000000) {
    if (num_routes < 1)
        throw ValidationError("policy grid: need at least one route");
    if (m < 1) throw ValidationError("policy grid: resolution must be >= 1");
    std::uint64_t count = binomial_capped(
        static_cast<std::uint64_t>(m) + num_routes - 1, num_routes - 1, cap);
    if (count > cap)
        throw CapExceeded("policy grid: size exceeds cap " + std::to_string(cap) +
                          " (reduce m or the route count)");

    std::vector<std::vector<int>> counts;
    counts.reserve(count);
    std::vector<int> current(num_routes, 0);
    // Fill position `pos` with `left` units, first coordinate descending.
    auto fill = [&](auto&& self, int pos, int left) -> void {
        if (pos == num_routes - 1) {
            current[pos] = left;
            counts.push_back(current);
            return;
        }
        for (int take = left; take >= 0; --take) {
            current[pos] = take;
            self(self, pos + 1, left - take);
        }
    };
    fill(fill, 0, m);
    return PolicyGrid(num_routes, m, std::move(counts));
}

/// Nonatomic population split: positive fractions summing to one.
struct PartitionProfile {
    std::vector<double> x;

    int num_groups() const { return static_cast<int>(x.size()); }

    void validate(double tol = 1e-12) const {
        if (x.empty()) throw ValidationError("partition: empty");
        double total = 0.0;
        for (double v : x) {
            if (!(v > 0.0))
                throw ValidationError("partition: factors must be positive");
            total += v;
        }
        if (std::fabs(total - 1.0) > tol)
            throw ValidationError("partition: sums to " + format_double(total));
    }
};

/// Finite traveler population with weights and a group assignment.
struct AtomicPublicness {
    int n = 0;
    std::vector<double> weights;  // per traveler, positive, sums to demand
    std::vector<int> group_of;    // traveler -> group index in [0, K)
    int num_groups = 0;

    double total_weight() const {
        double acc = 0.0;
        for (double w : weights) acc += w;
        return acc;
    }

    void validate() const {
        if (n < 1) throw ValidationError("atomic: need at least one traveler");
        if (weights.size() != static_cast<std::size_t>(n) ||
            group_of.size() != static_cast<std::size_t>(n))
            throw DimensionError("atomic: weights/group_of length != n");
        for (double w : weights)
            if (!(w > 0.0))
                throw ValidationError("atomic: weights must be positive");
        std::vector<int> sizes(num_groups, 0);
        for (int g : group_of) {
            if (g < 0 || g >= num_groups)
                throw ValidationError("atomic: traveler assigned to unknown group");
            ++sizes[g];
        }
        for (int k = 0; k < num_groups; ++k)
            if (sizes[k] == 0)
                throw ValidationError("atomic: group " + std::to_string(k) +
                                      " is empty");
    }

    /// Derived partition factors x^k = |N^k| / n.
    PartitionProfile derived_partition() const {
        std::vector<double> x(num_groups, 0.0);
        for (int g : group_of) x[g] += 1.0;
        for (double& v : x) v /= n;
        return PartitionProfile{std::move(x)};
    }
};

/// Flow induced by a profile of group recommendations under partition x:
/// f_r = sum_k y^k_r x^k D.
inline FlowProfile flow_from_recommendation(const std::vector<Policy>& y_profile,
                                            const PartitionProfile& x,
                                            double demand) {
    if (y_profile.size() != x.x.size())
        throw DimensionError("flow_from_recommendation: profile length " +
                             std::to_string(y_profile.size()) +
                             " != group count " + std::to_string(x.x.size()));
    if (y_profile.empty())
        throw DimensionError("flow_from_recommendation: empty profile");
    std::size_t R = y_profile[0].y.size();
    FlowProfile out;
    out.f.assign(R, 0.0);
    for (std::size_t k = 0; k < y_profile.size(); ++k) {
        if (y_profile[k].y.size() != R)
            throw DimensionError("flow_from_recommendation: ragged profile");
        double mass = x.x[k] * demand;
        for (std::size_t r = 0; r < R; ++r) out.f[r] += y_profile[k].y[r] * mass;
    }
    return out;
}

/// Flow in the weighted atomic game: every traveler contributes their weight
/// along the group recommendation, except an optional deviant who plays their
/// own policy instead.
inline FlowProfile atomic_flow(const std::vector<Policy>& y_profile,
                               const AtomicPublicness& pub,
                               std::optional<std::pair<int, Policy>> deviant =
                                   std::nullopt) {
    if (y_profile.size() != static_cast<std::size_t>(pub.num_groups))
        throw DimensionError("atomic_flow: profile length != group count");
    std::size_t R = y_profile[0].y.size();
    if (deviant) {
        if (deviant->first < 0 || deviant->first >= pub.n)
            throw DimensionError("atomic_flow: unknown traveler " +
                                 std::to_string(deviant->first));
        if (deviant->second.y.size() != R)
            throw DimensionError("atomic_flow: deviant policy has wrong length");
    }
    // Aggregate per group so equal-weight groups reduce to count * weight.
    std::vector<double> group_mass(pub.num_groups, 0.0);
    for (int i = 0; i < pub.n; ++i) {
        if (deviant && deviant->first == i) continue;
        group_mass[pub.group_of[i]] += pub.weights[i];
    }
    FlowProfile out;
    out.f.assign(R, 0.0);
    for (int k = 0; k < pub.num_groups; ++k) {
        if (y_profile[k].y.size() != R)
            throw DimensionError("atomic_flow: ragged profile");
        for (std::size_t r = 0; r < R; ++r)
            out.f[r] += y_profile[k].y[r] * group_mass[k];
    }
    if (deviant) {
        double w = pub.weights[deviant->first];
        for (std::size_t r = 0; r < R; ++r) out.f[r] += deviant->second.y[r] * w;
    }
    return out;
}

}  // namespace pslab

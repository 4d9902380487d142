// Small numeric helpers: tolerances, exact decimal round-trips, counting.
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <system_error>

#include "pslab/errors.hpp"

namespace pslab {

/// Default tolerances used across the library. Each analysis accepts an
/// override; these are the documented defaults.
struct Tolerances {
    double lp_feasibility = 1e-9;
    double lp_optimality = 1e-9;
    double lp_duality = 1e-7;
    double obedience_eps = 1e-7;
    double acl_tau = 1e-5;
    double simplex_membership = 1e-12;
    double prior_sum = 1e-12;
    double flow_sum = 1e-9;
};

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Parse a decimal string; throws ParseError on trailing garbage.
inline double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError(where + ": not a decimal number: '" + s + "'");
    return v;
}

/// C(n, k) with an explicit cap; returns cap + 1 once the product exceeds it,
/// so callers can test "> cap" without overflow.
inline std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k,
                                     std::uint64_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // result * (n - k + i) / i is always integral at this point
        if (result > (cap + 1) / (n - k + i) * i) return cap + 1;
        result = result * (n - k + i) / i;
        if (result > cap) return cap + 1;
    }
    return result;
}

inline bool nearly_equal(double a, double b, double tol) {
    return std::fabs(a - b) <= tol;
}

}  // namespace pslab

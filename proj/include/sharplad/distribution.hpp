#pragma once

// Shared machinery for the two discrepancy distributions: inverting a
// running integral of a nonnegative integrand.

#include <algorithm>
#include <cmath>
#include <limits>

namespace sharplad {

/// Marker for "integrate to the end of the support".
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace detail {

/// Solves  integral_0^t h(z) dz = target  for t in [0, upper], where h >= 0.
///
/// `segment(a, b)` integrates h over [a, b] (b may be below a). The running
/// integral is carried along with the iterate, so every step only integrates
/// the short stretch between consecutive iterates. Newton steps from the
/// integrand are taken when they stay inside the bracket; otherwise the
/// bracket is bisected. `total` is the integral over [0, upper].
template <class Integrand, class Segment>
double invert_running_integral(const Integrand& h, const Segment& segment, double target,
                               double upper, double total, double value_tol = 1e-13,
                               int max_iter = 200) {
    if (target <= 0.0) return 0.0;
    if (target >= total) return upper;
    double lo = 0.0;
    double hi = upper;
    double x = 0.5 * upper;
    double fx = segment(0.0, x);
    for (int it = 0; it < max_iter; ++it) {
        const double diff = fx - target;
        if (std::abs(diff) <= value_tol) break;
        if (diff < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
        const double slope = h(x);
        double next = (std::isfinite(slope) && slope > 0.0) ? x - diff / slope : lo - 1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        fx += segment(x, next);
        x = next;
    }
    return x;
}

}  // namespace detail
}  // namespace sharplad

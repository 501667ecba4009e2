#pragma once

// Scalar special functions used by the closed-form densities.

#include <cmath>
#include <numbers>

#include "sharplad/common.hpp"

namespace sharplad::specfn {

inline constexpr double kEulerGamma = std::numbers::egamma;

/// sqrt(2/pi), the half-normal density at the origin.
inline constexpr double kSqrt2OverPi = std::numbers::sqrt2 * std::numbers::inv_sqrtpi;

/// Gaussian error function. Backed by the C library erf (sub-ulp accuracy).
inline double erf(double x) { return std::erf(x); }

/// Complementary error function, accurate in the tail where 1 - erf(x) cancels.
inline double erfc(double x) { return std::erfc(x); }

namespace detail {

// Power series around the origin:
//   K0(x) = -(ln(x/2) + gamma) I0(x) + sum_{k>=1} (x^2/4)^k / (k!)^2 * H_k
// Converges quickly for x <= 2; cancellation costs roughly one digit there.
inline double k0_series(double x) {
    const double q = 0.25 * x * x;
    const double log_term = std::log(0.5 * x) + kEulerGamma;
    double term = 1.0;   // (x^2/4)^k / (k!)^2
    double harmonic = 0.0;
    double i0 = 1.0;
    double tail = 0.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * k);
        harmonic += 1.0 / k;
        i0 += term;
        tail += term * harmonic;
        if (term * harmonic < 1e-18 * std::abs(tail) && term < 1e-18 * i0) break;
    }
    return -log_term * i0 + tail;
}

// Steed's continued fraction (Temme's CF2) for e^x K0(x), valid for x >= 2.
inline double k0_scaled_cf(double x) {
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 1; i < 100000; ++i) {
        a -= 2 * i;
        c = -a * c / (i + 1.0);
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < 1e-17) break;
    }
    return std::sqrt(std::numbers::pi / (2.0 * x)) / s;
}

}  // namespace detail

/// Exponentially scaled modified Bessel function of the second kind, e^x K0(x).
/// Finite for all x > 0, so products like cosh(a) K0(b) with a close to b can
/// be formed without overflow.
inline double bessel_k0_scaled(double x) {
    if (!(x > 0.0)) throw DomainError("bessel_k0_scaled: argument must be positive");
    if (x <= 2.0) return std::exp(x) * detail::k0_series(x);
    return detail::k0_scaled_cf(x);
}

/// Modified Bessel function of the second kind of order zero, K0(x), x > 0.
inline double bessel_k0(double x) {
    if (!(x > 0.0)) throw DomainError("bessel_k0: argument must be positive");
    if (x <= 2.0) return detail::k0_series(x);
    if (x > 745.0) return 0.0;
    return std::exp(-x) * detail::k0_scaled_cf(x);
}

}  // namespace sharplad::specfn

#pragma once

// Distribution of |Z| = |X Y| for standard Gaussians X, Y with
// correlation rho >= 0.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sharplad/distribution.hpp"
#include "sharplad/quadrature.hpp"
#include "sharplad/specfn.hpp"

namespace sharplad {

struct IntDistParams {
    double rho = 0.0;

    static constexpr double kBranchCutoff = 1e-7;

    IntDistParams() = default;
    explicit IntDistParams(double rho_) : rho(rho_) {
        if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("IntDistParams: rho must lie in [0,1]");
    }

    /// rho = 1: |Z| is chi-square with one degree of freedom.
    bool degenerate() const { return 1.0 - rho < kBranchCutoff; }

    double one_minus_rho2() const { return (1.0 - rho) * (1.0 + rho); }

    double upper() const { return 60.0 * one_minus_rho2() + 60.0; }
};

namespace int_detail {

// Width of the head interval [0, delta] in the scaled variable w = z / (1 - rho^2).
inline constexpr double kHeadWidth = 1e-4;

inline double density(double z, const IntDistParams& p) {
    if (p.degenerate()) return std::exp(-0.5 * z) / std::sqrt(2.0 * std::numbers::pi * z);
    const double c = p.one_minus_rho2();
    const double w = z / c;
    // cosh(rho w) K0(w) = 0.5 (e^{(rho-1) w} + e^{-(rho+1) w}) e^{w} K0(w)
    const double hyper = 0.5 * (std::exp((p.rho - 1.0) * w) + std::exp(-(p.rho + 1.0) * w));
    return 2.0 / (std::numbers::pi * std::sqrt(c)) * hyper * specfn::bessel_k0_scaled(w);
}

// Integral of w^moment cosh(rho w) K0(w) over [0, W] from the small-argument
// expansion K0(w) = -(ln(w/2) + gamma)(1 + w^2/4) + w^2/4 + O(w^4 ln w).
inline double head_scaled(double big_w, double rho, int moment) {
    if (big_w <= 0.0) return 0.0;
    const double log_part = std::log(0.5 * big_w) + specfn::kEulerGamma;
    const double w2 = big_w * big_w;
    if (moment == 0) {
        const double w3 = w2 * big_w;
        return big_w * (1.0 - log_part) + (0.25 + 0.5 * rho * rho) * w3 * (1.0 / 9.0 - log_part / 3.0) +
               w3 / 12.0;
    }
    return w2 * (0.25 - 0.5 * log_part);
}

inline double head(double x, const IntDistParams& p, int moment) {
    const double c = p.one_minus_rho2();
    const double scale = 2.0 / (std::numbers::pi * std::sqrt(c)) * (moment == 0 ? c : c * c);
    return scale * head_scaled(x / c, p.rho, moment);
}

// Integral of z^moment f(z) over [a, b], 0 <= a <= b.
inline double forward_segment(const IntDistParams& p, double a, double b, int moment) {
    if (a >= b) return 0.0;
    if (p.degenerate()) {
        // z = u^2 removes the z^{-1/2} endpoint singularity.
        auto f = [moment](double u) {
            const double g = specfn::kSqrt2OverPi * std::exp(-0.5 * u * u);
            return moment == 0 ? g : u * u * g;
        };
        return quad::integrate(f, std::sqrt(a), std::sqrt(b), 1e-14).value;
    }
    const double delta = kHeadWidth * p.one_minus_rho2();
    double total = 0.0;
    if (a < delta) {
        const double stop = std::min(b, delta);
        total += head(stop, p, moment) - head(a, p, moment);
        a = stop;
    }
    if (a < b) {
        auto f = [&](double z) { return moment == 0 ? density(z, p) : z * density(z, p); };
        total += quad::integrate(f, a, b, 1e-14).value;
    }
    return total;
}

inline double segment(const IntDistParams& p, double a, double b, int moment) {
    const double top = p.upper();
    a = std::min(a, top);
    b = std::min(b, top);
    return a <= b ? forward_segment(p, a, b, moment) : -forward_segment(p, b, a, moment);
}

}  // namespace int_detail

/// Density f_rho(z) of |X Y|, z > 0. Diverges logarithmically at the origin
/// (like z^{-1/2} when rho = 1).
inline double pdf_abs_prod(double z, const IntDistParams& p) {
    if (!(z > 0.0)) throw DomainError("pdf_abs_prod: z must be positive");
    return int_detail::density(z, p);
}

inline double cdf_abs_prod(double t, const IntDistParams& p) {
    if (!(t >= 0.0)) throw DomainError("cdf_abs_prod: t must be nonnegative");
    return std::clamp(int_detail::segment(p, 0.0, t, 0), 0.0, 1.0);
}

inline double quantile_abs_prod(double prob, const IntDistParams& p) {
    if (!(prob > 0.0 && prob < 1.0)) throw DomainError("quantile_abs_prod: prob must lie in (0,1)");
    const double top = p.upper();
    return detail::invert_running_integral(
        [&](double z) { return z > 0.0 ? int_detail::density(z, p) : kInfinity; },
        [&](double a, double b) { return int_detail::segment(p, a, b, 0); }, prob, top,
        int_detail::segment(p, 0.0, top, 0));
}

/// integral_0^t z f_rho(z) dz ; t = kInfinity gives E|Z|.
inline double partial_first_moment_int(double t, const IntDistParams& p) {
    if (!(t >= 0.0)) throw DomainError("partial_first_moment_int: t must be nonnegative");
    return int_detail::segment(p, 0.0, t, 1);
}

}  // namespace sharplad

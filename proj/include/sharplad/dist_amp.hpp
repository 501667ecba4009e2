#pragma once

// Distribution of |Z| = | |X| - |Y| | for jointly Gaussian X ~ N(0,1),
// Y ~ N(0, alpha^2) with correlation rho >= 0.

#include <cmath>
#include <numbers>

#include "sharplad/distribution.hpp"
#include "sharplad/quadrature.hpp"
#include "sharplad/specfn.hpp"

namespace sharplad {

/// Parameters of the amplitude discrepancy distribution. Negative
/// correlations reduce to rho >= 0 by symmetry and are not accepted.
struct AmpDistParams {
    double rho = 0.0;
    double alpha = 1.0;

    /// Below these distances the closed-form branches replace the general one.
    static constexpr double kBranchCutoff = 1e-7;

    AmpDistParams() = default;
    AmpDistParams(double rho_, double alpha_) : rho(rho_), alpha(alpha_) {
        if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("AmpDistParams: rho must lie in [0,1]");
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("AmpDistParams: alpha must lie in [0,1]");
    }

    bool degenerate_alpha() const { return alpha < kBranchCutoff; }
    bool degenerate_rho() const { return !degenerate_alpha() && 1.0 - rho < kBranchCutoff; }

    /// rho = 1 and alpha = 1 collapse |Z| to a point mass at 0.
    bool is_corner() const { return degenerate_rho() && 1.0 - alpha < 1e-9; }

    /// dist_1 of the underlying pair with ||x|| = 1, ||y|| = alpha.
    double dist1() const { return std::sqrt(std::max(0.0, 1.0 + alpha * alpha - 2.0 * alpha * rho)); }

    /// Integration cutoff carrying all but ~1e-30 of the mass.
    double upper() const { return 12.0 * std::sqrt(alpha * alpha + 2.0 * rho * alpha + 1.0); }
};

namespace amp_detail {

inline void require_regular(const AmpDistParams& p) {
    if (p.is_corner()) throw DomainError("amplitude distribution: (rho, alpha) = (1, 1) is a point mass");
}

// Density without argument checks; z >= 0.
inline double density(double z, const AmpDistParams& p) {
    if (p.degenerate_alpha()) return specfn::kSqrt2OverPi * std::exp(-0.5 * z * z);
    if (p.degenerate_rho()) {
        const double scale = 1.0 - p.alpha;
        return specfn::kSqrt2OverPi / scale * std::exp(-0.5 * z * z / (scale * scale));
    }
    const double rho = p.rho;
    const double alpha = p.alpha;
    const double one_minus_rho2 = (1.0 - rho) * (1.0 + rho);
    double sum = 0.0;
    for (const double sign : {1.0, -1.0}) {
        const double lambda = alpha * alpha + 2.0 * sign * rho * alpha + 1.0;
        const double root = std::sqrt(2.0 * lambda * one_minus_rho2);
        const double c_outer = (1.0 + sign * rho * alpha) / (alpha * root);
        // Difference of the two erf arguments, simplified so that it does not cancel.
        const double c_inner = (alpha + sign * rho) / root;
        const double gauss = std::exp(-0.5 * z * z / lambda) / std::sqrt(2.0 * std::numbers::pi * lambda);
        sum += gauss * (specfn::erfc(c_outer * z) + specfn::erfc(c_inner * z));
    }
    return sum;
}

inline double segment(const AmpDistParams& p, double a, double b, int moment) {
    const double top = p.upper();
    a = std::min(a, top);
    b = std::min(b, top);
    auto f = [&](double z) { return moment == 0 ? density(z, p) : z * density(z, p); };
    return quad::integrate(f, a, b, 1e-14).value;
}

}  // namespace amp_detail

/// Density g_{rho,alpha}(z) of | |X| - |Y| | for z >= 0.
inline double pdf_abs_diff(double z, const AmpDistParams& p) {
    if (!(z >= 0.0)) throw DomainError("pdf_abs_diff: z must be nonnegative");
    amp_detail::require_regular(p);
    return amp_detail::density(z, p);
}

/// G_{rho,alpha}(t), by adaptive quadrature of the density.
inline double cdf_abs_diff(double t, const AmpDistParams& p) {
    if (!(t >= 0.0)) throw DomainError("cdf_abs_diff: t must be nonnegative");
    amp_detail::require_regular(p);
    return std::clamp(amp_detail::segment(p, 0.0, t, 0), 0.0, 1.0);
}

/// Smallest t with G_{rho,alpha}(t) = prob, prob in (0,1).
inline double quantile_abs_diff(double prob, const AmpDistParams& p) {
    if (!(prob > 0.0 && prob < 1.0)) throw DomainError("quantile_abs_diff: prob must lie in (0,1)");
    amp_detail::require_regular(p);
    const double top = p.upper();
    return detail::invert_running_integral(
        [&](double z) { return amp_detail::density(z, p); },
        [&](double a, double b) { return amp_detail::segment(p, a, b, 0); }, prob, top,
        amp_detail::segment(p, 0.0, top, 0));
}

/// Truncated first moment  integral_0^t z g_{rho,alpha}(z) dz ; t = kInfinity
/// gives E|Z|.
inline double partial_first_moment_amp(double t, const AmpDistParams& p) {
    if (!(t >= 0.0)) throw DomainError("partial_first_moment_amp: t must be nonnegative");
    amp_detail::require_regular(p);
    return amp_detail::segment(p, 0.0, t, 1);
}

}  // namespace sharplad

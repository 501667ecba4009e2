#pragma once

// Balance functions, their minima over the distribution parameters, and the
// sharp corruption thresholds where the minimum balance crosses zero.
//
// For a discrepancy variable |Z| with quantile q(1-s), the balance at
// fraction s is the expected mass of the smallest (1-s) fraction minus that
// of the largest s fraction. Amplitude balances are normalized by dist_1 of
// the underlying pair; intensity balances are already in dist_2 units.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "sharplad/common.hpp"
#include "sharplad/dist_amp.hpp"
#include "sharplad/dist_int.hpp"

namespace sharplad {

struct BalanceEvaluation {
    Kind kind = Kind::Amplitude;
    std::variant<AmpDistParams, IntDistParams> params;
    double fraction = 0.0;
    double lower_part = 0.0;  ///< mass below the (1-s)-quantile
    double upper_part = 0.0;  ///< mass above it
    double value = 0.0;       ///< lower_part - upper_part
};

/// Minimizing distribution parameters; alpha is absent for intensity.
struct BalanceArgmin {
    double rho = 0.0;
    std::optional<double> alpha;
};

struct MinBalance {
    double value = 0.0;
    BalanceArgmin argmin;
};

struct ThresholdResult {
    Kind kind = Kind::Amplitude;
    double threshold = 0.0;
    BalanceArgmin argmin;
    double tolerance = 0.0;
    double grid_resolution = 0.0;
    double min_balance_at_threshold = 0.0;
};

struct MinBalanceOptions {
    double grid_step = 0.02;
    double param_tol = 1e-5;
    /// Amplitude parameters within this distance of (1,1) are skipped.
    double corner_radius = 1e-4;
};

inline BalanceEvaluation balance_amplitude(const AmpDistParams& p, double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("balance_amplitude: s must lie in [0,1]");
    if (p.is_corner()) throw DomainError("balance_amplitude: degenerate parameters (rho, alpha) = (1, 1)");
    const double total = partial_first_moment_amp(kInfinity, p);
    double lower = 0.0;
    if (s == 0.0) {
        lower = total;
    } else if (s < 1.0) {
        lower = partial_first_moment_amp(quantile_abs_diff(1.0 - s, p), p);
    }
    const double norm = p.dist1();
    BalanceEvaluation out{Kind::Amplitude, p, s, lower / norm, (total - lower) / norm, 0.0};
    out.value = out.lower_part - out.upper_part;
    return out;
}

inline BalanceEvaluation balance_intensity(const IntDistParams& p, double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("balance_intensity: s must lie in [0,1]");
    const double total = partial_first_moment_int(kInfinity, p);
    double lower = 0.0;
    if (s == 0.0) {
        lower = total;
    } else if (s < 1.0) {
        lower = partial_first_moment_int(quantile_abs_prod(1.0 - s, p), p);
    }
    BalanceEvaluation out{Kind::Intensity, p, s, lower, total - lower, 0.0};
    out.value = out.lower_part - out.upper_part;
    return out;
}

namespace balance_detail {

inline bool near_corner(double rho, double alpha, double radius) {
    return std::hypot(1.0 - rho, 1.0 - alpha) < radius;
}

inline double amp_value(double rho, double alpha, double s, double radius) {
    if (near_corner(rho, alpha, radius)) return std::numeric_limits<double>::infinity();
    return balance_amplitude(AmpDistParams(rho, alpha), s).value;
}

inline std::vector<double> grid(double step) {
    const int count = static_cast<int>(std::floor(1.0 / step + 1e-9));
    std::vector<double> out;
    for (int i = 0; i <= count; ++i) out.push_back(std::min(1.0, i * step));
    if (out.back() < 1.0) out.push_back(1.0);
    return out;
}

// Nelder-Mead on the unit square; vertices are clamped into the box.
template <class F>
std::array<double, 2> nelder_mead_box(const F& f, std::array<double, 2> start, double size, double tol,
                                      int max_iter = 400) {
    using Point = std::array<double, 2>;
    auto clamp = [](Point p) {
        return Point{std::clamp(p[0], 0.0, 1.0), std::clamp(p[1], 0.0, 1.0)};
    };
    std::array<Point, 3> v = {start, clamp({start[0] + size, start[1]}), clamp({start[0], start[1] + size})};
    if (v[1] == start) v[1] = clamp({start[0] - size, start[1]});
    if (v[2] == start) v[2] = clamp({start[0], start[1] - size});
    std::array<double, 3> fv = {f(v[0]), f(v[1]), f(v[2])};
    for (int it = 0; it < max_iter; ++it) {
        // Stable sort keeps the earlier vertex first on ties.
        std::array<int, 3> order = {0, 1, 2};
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        const Point best = v[order[0]], mid = v[order[1]], worst = v[order[2]];
        const double fb = fv[order[0]], fm = fv[order[1]], fw = fv[order[2]];
        v = {best, mid, worst};
        fv = {fb, fm, fw};
        double spread = 0.0;
        for (int k = 1; k < 3; ++k)
            spread = std::max({spread, std::abs(v[k][0] - best[0]), std::abs(v[k][1] - best[1])});
        if (spread < tol) break;
        const Point centroid = {0.5 * (best[0] + mid[0]), 0.5 * (best[1] + mid[1])};
        auto along = [&](double t) {
            return clamp({centroid[0] + t * (worst[0] - centroid[0]), centroid[1] + t * (worst[1] - centroid[1])});
        };
        const Point reflected = along(-1.0);
        const double fr = f(reflected);
        if (fr < fb) {
            const Point expanded = along(-2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                v[2] = expanded;
                fv[2] = fe;
            } else {
                v[2] = reflected;
                fv[2] = fr;
            }
        } else if (fr < fm) {
            v[2] = reflected;
            fv[2] = fr;
        } else {
            const Point contracted = fr < fw ? along(-0.5) : along(0.5);
            const double fc = f(contracted);
            if (fc < std::min(fr, fw)) {
                v[2] = contracted;
                fv[2] = fc;
            } else {
                for (int k = 1; k < 3; ++k) {
                    v[k] = clamp({0.5 * (v[k][0] + best[0]), 0.5 * (v[k][1] + best[1])});
                    fv[k] = f(v[k]);
                }
            }
        }
    }
    int arg = 0;
    for (int k = 1; k < 3; ++k)
        if (fv[k] < fv[arg]) arg = k;
    return v[arg];
}

// Golden-section search for a minimum on [lo, hi].
template <class F>
double golden_section(const F& f, double lo, double hi, double tol) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = hi - kInvPhi * (hi - lo);
    double b = lo + kInvPhi * (hi - lo);
    double fa = f(a);
    double fb = f(b);
    while (hi - lo > tol) {
        if (fa <= fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - kInvPhi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + kInvPhi * (hi - lo);
            fb = f(b);
        }
    }
    return fa <= fb ? a : b;
}

}  // namespace balance_detail

/// Minimum of the balance over the distribution parameters at fraction s:
/// a grid scan (ties go to the smallest rho, then smallest alpha) refined
/// locally around the best grid point.
inline MinBalance min_balance(Kind kind, double s, const MinBalanceOptions& opt = {}) {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("min_balance: s must lie in [0,1]");
    const auto axis = balance_detail::grid(opt.grid_step);
    if (kind == Kind::Amplitude) {
        auto f = [&](const std::array<double, 2>& p) {
            return balance_detail::amp_value(p[0], p[1], s, opt.corner_radius);
        };
        std::array<double, 2> best{0.0, 0.0};
        double best_value = std::numeric_limits<double>::infinity();
        for (double rho : axis) {
            for (double alpha : axis) {
                const double v = f({rho, alpha});
                if (v < best_value) {
                    best_value = v;
                    best = {rho, alpha};
                }
            }
        }
        const auto refined = balance_detail::nelder_mead_box(f, best, opt.grid_step, opt.param_tol);
        const double refined_value = f(refined);
        if (refined_value < best_value) {
            best_value = refined_value;
            best = refined;
        }
        return {best_value, {best[0], best[1]}};
    }
    auto f = [&](double rho) { return balance_intensity(IntDistParams(rho), s).value; };
    double best = 0.0;
    double best_value = std::numeric_limits<double>::infinity();
    for (double rho : axis) {
        const double v = f(rho);
        if (v < best_value) {
            best_value = v;
            best = rho;
        }
    }
    const double lo = std::max(0.0, best - opt.grid_step);
    const double hi = std::min(1.0, best + opt.grid_step);
    const double refined = balance_detail::golden_section(f, lo, hi, opt.param_tol);
    const double refined_value = f(refined);
    if (refined_value < best_value) {
        best_value = refined_value;
        best = refined;
    }
    return {best_value, {best, std::nullopt}};
}

/// Root of s -> min_balance(kind, s) on [0.01, 0.4] by bisection. The minimum
/// balance is strictly decreasing, so the root is unique.
inline ThresholdResult sharp_threshold(Kind kind, const MinBalanceOptions& opt = {}, double s_tol = 2e-5) {
    double lo = 0.01;
    double hi = 0.4;
    const MinBalance at_lo = min_balance(kind, lo, opt);
    const MinBalance at_hi = min_balance(kind, hi, opt);
    if (!(at_lo.value > 0.0 && at_hi.value < 0.0)) {
        throw NumericalError("sharp_threshold: minimum balance does not change sign on [0.01, 0.4]");
    }
    while (hi - lo > s_tol) {
        const double mid = 0.5 * (lo + hi);
        if (min_balance(kind, mid, opt).value > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double root = 0.5 * (lo + hi);
    const MinBalance at_root = min_balance(kind, root, opt);
    return {kind, root, at_root.argmin, 0.5 * (hi - lo), opt.grid_step, at_root.value};
}

/// Fraction s at which the balance of fixed parameters vanishes: the point
/// where the truncated first moment reaches half of E|Z|.
inline double balance_point_amplitude(const AmpDistParams& p) {
    if (p.is_corner()) throw DomainError("balance_point_amplitude: degenerate parameters");
    const double top = p.upper();
    const double total = amp_detail::segment(p, 0.0, top, 1);
    const double q = detail::invert_running_integral(
        [&](double z) { return z * amp_detail::density(z, p); },
        [&](double a, double b) { return amp_detail::segment(p, a, b, 1); }, 0.5 * total, top, total, 1e-15);
    return 1.0 - cdf_abs_diff(q, p);
}

inline double balance_point_intensity(const IntDistParams& p) {
    const double top = p.upper();
    const double total = int_detail::segment(p, 0.0, top, 1);
    const double q = detail::invert_running_integral(
        [&](double z) { return z > 0.0 ? z * int_detail::density(z, p) : 0.0; },
        [&](double a, double b) { return int_detail::segment(p, a, b, 1); }, 0.5 * total, top, total, 1e-15);
    return 1.0 - cdf_abs_prod(q, p);
}

struct SurfaceCell {
    double rho = 0.0;
    std::optional<double> alpha;
    std::optional<double> s_balance;  ///< absent at the degenerate corner
};

/// Balance points over a (rho, alpha) grid (amplitude) or a rho grid (intensity).
inline std::vector<SurfaceCell> threshold_surface(Kind kind, double grid_step) {
    if (!(grid_step > 0.0 && grid_step <= 0.25)) throw DomainError("threshold_surface: grid_step must lie in (0, 0.25]");
    const auto axis = balance_detail::grid(grid_step);
    std::vector<SurfaceCell> out;
    for (double rho : axis) {
        if (kind == Kind::Intensity) {
            out.push_back({rho, std::nullopt, balance_point_intensity(IntDistParams(rho))});
            continue;
        }
        for (double alpha : axis) {
            const AmpDistParams p(rho, alpha);
            SurfaceCell cell{rho, alpha, std::nullopt};
            if (!p.is_corner()) cell.s_balance = balance_point_amplitude(p);
            out.push_back(cell);
        }
    }
    return out;
}

}  // namespace sharplad

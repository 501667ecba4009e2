#pragma once

// Least-absolute-deviation fitting of amplitude or intensity measurements:
//   minimize (1/m) sum_i | |<a_i, x>|^k - b_i |  over x in R^n.
// Spectral initialization followed by normalized subgradient descent with a
// geometrically decaying step, restarted from random directions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "sharplad/common.hpp"
#include "sharplad/linalg.hpp"
#include "sharplad/measure.hpp"
#include "sharplad/rng.hpp"

namespace sharplad {

struct SolveOptions {
    int max_iters = 3000;
    /// Initial step length relative to the norm of the initial point.
    double step_init = 0.1;
    double step_decay = 0.99;
    int restarts = 10;
    /// Stop a run once its objective is at or below this value.
    double tol_obj = 0.0;
    /// Stop a run once the step length drops below tol_step * ||x_init||.
    double tol_step = 1e-12;
    std::uint64_t seed = 0;

    void validate() const {
        if (max_iters < 1) throw DomainError("SolveOptions: max_iters must be at least 1");
        if (!(step_init > 0.0)) throw DomainError("SolveOptions: step_init must be positive");
        if (!(step_decay > 0.0 && step_decay < 1.0)) throw DomainError("SolveOptions: step_decay must lie in (0,1)");
        if (restarts < 1) throw DomainError("SolveOptions: restarts must be at least 1");
    }
};

struct SolveReport {
    Signal estimate;
    double objective = 0.0;
    std::optional<double> dist1_to_truth;
    std::optional<double> dist2_to_truth;
    int iterations = 0;
    int restart_index = 0;
    Vec objective_trace;  ///< best-so-far per iteration of the winning run
    int diverged_runs = 0;
};

namespace solver_detail {

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline void check_sizes(const GaussianEnsemble& a, std::span<const double> b, std::span<const double> x) {
    if (b.size() != a.m() || x.size() != a.n()) throw DomainError("objective: dimension mismatch");
}

// Objective at x and a subgradient, in one pass over the rows.
inline double objective_and_subgradient(const GaussianEnsemble& a, std::span<const double> b,
                                        std::span<const double> x, Kind kind, Vec& grad) {
    const std::size_t m = a.m();
    const std::size_t n = a.n();
    const double* data = a.data().data();
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = data + i * n;
        double ax = 0.0;
        for (std::size_t j = 0; j < n; ++j) ax += row[j] * x[j];
        double weight = 0.0;
        if (kind == Kind::Amplitude) {
            const double r = std::abs(ax) - b[i];
            loss += std::abs(r);
            weight = sign(r) * sign(ax);
        } else {
            const double r = ax * ax - b[i];
            loss += std::abs(r);
            weight = 2.0 * sign(r) * ax;
        }
        if (weight != 0.0)
            for (std::size_t j = 0; j < n; ++j) grad[j] += weight * row[j];
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    for (double& g : grad) g *= inv_m;
    return loss * inv_m;
}

}  // namespace solver_detail

/// (1/m) || |Ax|^k - b ||_1
inline double objective(const GaussianEnsemble& a, std::span<const double> b, const Signal& x, Kind kind) {
    solver_detail::check_sizes(a, b, x.values());
    const Vec ax = a.apply(x.values());
    double loss = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) {
        const double pred = kind == Kind::Amplitude ? std::abs(ax[i]) : ax[i] * ax[i];
        loss += std::abs(pred - b[i]);
    }
    return loss / static_cast<double>(a.m());
}

/// Subgradient of the objective with sign(0) = 0.
inline Vec subgradient(const GaussianEnsemble& a, std::span<const double> b, const Signal& x, Kind kind) {
    solver_detail::check_sizes(a, b, x.values());
    Vec grad(a.n());
    solver_detail::objective_and_subgradient(a, b, x.values(), kind, grad);
    return grad;
}

/// Leading eigenvector of (1/m) sum_i w_i a_i a_i^T with w_i = b_i^2
/// (amplitude) or b_i (intensity), weights capped at their 95th percentile.
/// The result is scaled to the median-based norm estimate; its sign is
/// arbitrary.
inline Signal spectral_init(const GaussianEnsemble& a, std::span<const double> b, Kind kind,
                            std::uint64_t seed = 0) {
    if (b.size() != a.m()) throw DomainError("spectral_init: dimension mismatch");
    const std::size_t m = a.m();
    const std::size_t n = a.n();
    Vec w(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double bi = std::max(0.0, b[i]);
        w[i] = kind == Kind::Amplitude ? bi * bi : bi;
    }
    Vec sorted = w;
    const auto cap_at = static_cast<std::ptrdiff_t>(std::min(m - 1, static_cast<std::size_t>(0.95 * static_cast<double>(m))));
    std::nth_element(sorted.begin(), sorted.begin() + cap_at, sorted.end());
    const double cap = sorted[static_cast<std::size_t>(cap_at)];
    const auto mid = static_cast<std::ptrdiff_t>(m / 2);
    std::nth_element(sorted.begin(), sorted.begin() + mid, sorted.end());
    const double median = sorted[static_cast<std::size_t>(mid)];
    if (!(median > 0.0) || !(cap > 0.0)) throw NumericalError("spectral_init: observations are degenerate (zero)");

    Vec cov(n * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto row = a.row(i);
        const double wi = std::min(w[i], cap);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) cov[r * n + c] += wi * row[r] * row[c];
    }
    for (double& v : cov) v /= static_cast<double>(m);

    Vec v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = rng::normal(seed, 5, j);
    double nv = norm2(v);
    for (double& e : v) e /= nv;
    double eig = 0.0;
    bool converged = false;
    for (int it = 0; it < 500; ++it) {
        Vec next(n, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) next[r] += cov[r * n + c] * v[c];
        const double rayleigh = dot(next, v);
        nv = norm2(next);
        if (nv == 0.0) throw NumericalError("spectral_init: weighted covariance is zero");
        for (double& e : next) e /= nv;
        const bool settled = it > 0 && std::abs(rayleigh - eig) <= 1e-12 * std::abs(rayleigh);
        eig = rayleigh;
        v = std::move(next);
        if (settled) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NumericalError("spectral_init: power iteration did not converge in 500 iterations");
    // Median of |<a,x>|^2 over ||x||^2 is the chi-square(1) median.
    constexpr double kChi2Median = 0.45493642311957283;
    const double norm_sq = median / kChi2Median;
    return Signal(scaled(v, std::sqrt(norm_sq)));
}

namespace solver_detail {

struct Run {
    Vec best;
    double best_obj = std::numeric_limits<double>::infinity();
    int iterations = 0;
    Vec trace;
    bool diverged = false;
};

inline Run descend(const GaussianEnsemble& a, std::span<const double> b, Kind kind, Vec x,
                   const SolveOptions& opt) {
    Run run;
    Vec grad(a.n());
    const double scale = norm2(x) > 0.0 ? norm2(x) : 1.0;
    double step = opt.step_init * scale;
    run.trace.reserve(static_cast<std::size_t>(opt.max_iters));
    for (int t = 0; t < opt.max_iters; ++t) {
        const double obj = objective_and_subgradient(a, b, x, kind, grad);
        if (!std::isfinite(obj)) {
            run.diverged = true;
            break;
        }
        if (obj < run.best_obj) {
            run.best_obj = obj;
            run.best = x;
        }
        run.trace.push_back(run.best_obj);
        run.iterations = t + 1;
        const double gn = norm2(grad);
        if (run.best_obj <= opt.tol_obj || gn == 0.0 || step < opt.tol_step * scale) break;
        for (std::size_t j = 0; j < x.size(); ++j) x[j] -= step * grad[j] / gn;
        step *= opt.step_decay;
    }
    if (run.best.empty()) run.diverged = true;
    return run;
}

}  // namespace solver_detail

namespace solver_detail {

inline void finish(SolveReport& report, const GaussianEnsemble& a, std::span<const double> b, Kind kind,
                   const std::optional<Signal>& truth) {
    report.objective = objective(a, b, report.estimate, kind);
    if (truth) {
        report.dist1_to_truth = dist1(report.estimate, *truth);
        report.dist2_to_truth = dist2(report.estimate, *truth);
    }
}

inline void check_inputs(const GaussianEnsemble& a, std::span<const double> b, const SolveOptions& opt,
                         const std::optional<Signal>& truth) {
    opt.validate();
    if (b.size() != a.m()) throw DomainError("solve: dimension mismatch");
    if (truth && truth->n() != a.n()) throw DomainError("solve: truth has the wrong dimension");
}

}  // namespace solver_detail

/// A single descent from `start` (opt.restarts is ignored).
inline SolveReport solve_from(const GaussianEnsemble& a, std::span<const double> b, Kind kind, const Signal& start,
                              const SolveOptions& opt = {}, const std::optional<Signal>& truth = std::nullopt) {
    solver_detail::check_inputs(a, b, opt, truth);
    if (start.n() != a.n()) throw DomainError("solve_from: start has the wrong dimension");
    solver_detail::Run run = solver_detail::descend(a, b, kind, start.vec(), opt);
    if (run.diverged) throw NumericalError("solve_from: the run diverged");
    SolveReport report;
    report.estimate = Signal(std::move(run.best));
    report.iterations = run.iterations;
    report.objective_trace = std::move(run.trace);
    solver_detail::finish(report, a, b, kind, truth);
    return report;
}

/// Best of `restarts` descents: the first from the spectral initialization,
/// the rest from random directions of the same norm. The winner has the
/// lowest final objective (ties to the lower restart index).
inline SolveReport solve(const GaussianEnsemble& a, std::span<const double> b, Kind kind,
                         const SolveOptions& opt = {}, const std::optional<Signal>& truth = std::nullopt) {
    solver_detail::check_inputs(a, b, opt, truth);
    Vec init;
    try {
        init = spectral_init(a, b, kind, opt.seed).vec();
    } catch (const NumericalError&) {
        init.assign(a.n(), 0.0);
        init[0] = 1.0;
    }
    const double radius = norm2(init);

    SolveReport report;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < opt.restarts; ++r) {
        Vec start = init;
        if (r > 0) {
            const std::uint64_t seed = rng::derive_seed(opt.seed, static_cast<std::uint64_t>(r));
            for (std::size_t j = 0; j < start.size(); ++j) start[j] = rng::normal(seed, 6, j);
            start = scaled(start, radius / norm2(start));
        }
        solver_detail::Run run = solver_detail::descend(a, b, kind, std::move(start), opt);
        if (run.diverged) {
            ++report.diverged_runs;
            continue;
        }
        if (run.best_obj < best) {
            best = run.best_obj;
            report.estimate = Signal(std::move(run.best));
            report.iterations = run.iterations;
            report.restart_index = r;
            report.objective_trace = std::move(run.trace);
        }
    }
    if (report.diverged_runs == opt.restarts) throw NumericalError("solve: every restart diverged");
    solver_detail::finish(report, a, b, kind, truth);
    return report;
}

}  // namespace sharplad

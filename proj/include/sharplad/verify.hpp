#pragma once

// Empirical checks of the robustness margin, quantile sandwiches and
// stability corridors, plus Monte-Carlo samplers for the two distributions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "sharplad/balance.hpp"
#include "sharplad/common.hpp"
#include "sharplad/dist_amp.hpp"
#include "sharplad/dist_int.hpp"
#include "sharplad/linalg.hpp"
#include "sharplad/measure.hpp"
#include "sharplad/rng.hpp"

namespace sharplad {

struct RobMargin {
    Kind kind = Kind::Amplitude;
    double s = 0.0;
    Signal x;
    Signal y;
    double margin = 0.0;
    std::vector<std::size_t> worst_set;  ///< ascending indices of the worst S
};

/// Per-row discrepancies | |<a_i,x>|^k - |<a_i,y>|^k |.
inline Vec discrepancies(const GaussianEnsemble& a, const Signal& x, const Signal& y, Kind kind) {
    const Vec fx = forward(a, x, kind);
    const Vec fy = forward(a, y, kind);
    Vec v(fx.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(fx[i] - fy[i]);
    return v;
}

/// (1/m)(sum over the complement of S minus sum over S) / dist_k at the
/// worst S with |S| <= floor(s m). The worst S is the set of the largest
/// rows. Both sums run in ascending index order.
inline RobMargin worst_margin(const GaussianEnsemble& a, const Signal& x, const Signal& y, double s, Kind kind) {
    if (!(s >= 0.0 && s < 1.0)) throw DomainError("worst_margin: s must lie in [0,1)");
    if (x.n() != a.n() || y.n() != a.n()) throw DomainError("worst_margin: dimension mismatch");
    const double d = dist_k(kind, x, y);
    if (!(d > 0.0)) throw DomainError("worst_margin: x and y coincide up to sign");
    const Vec v = discrepancies(a, x, y, kind);
    RobMargin out;
    out.kind = kind;
    out.s = s;
    out.x = x;
    out.y = y;
    out.worst_set = top_k_indices(v, corruption_count(s, a.m()));
    std::vector<char> in_set(v.size(), 0);
    for (std::size_t i : out.worst_set) in_set[i] = 1;
    double kept = 0.0;
    double removed = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) (in_set[i] ? removed : kept) += v[i];
    out.margin = (kept - removed) / (static_cast<double>(a.m()) * d);
    return out;
}

namespace verify_detail {

inline Vec random_unit(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    Vec u(n);
    for (std::size_t j = 0; j < n; ++j) u[j] = rng::normal(seed, stream, j);
    const double nu = norm2(u);
    for (double& e : u) e /= nu;
    return u;
}

// Unit vector orthogonal to u, random otherwise.
inline Vec random_orthogonal(std::span<const double> u, std::uint64_t seed, std::uint64_t stream) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        Vec w = random_unit(u.size(), seed, stream + 16 * attempt);
        w = axpy(w, -dot(w, u), u);
        const double nw = norm2(w);
        if (nw > 1e-6) return scaled(w, 1.0 / nw);
        if (attempt > 64) throw NumericalError("random_orthogonal: could not leave the span of u");
    }
}

}  // namespace verify_detail

/// A pair (x, y) whose measurement discrepancy follows the distribution with
/// the given parameters: for amplitude <a,x> ~ N(0,1), <a,y> ~ N(0,alpha^2)
/// with correlation rho; for intensity x - y and x + y are unit vectors with
/// inner product rho.
inline std::pair<Signal, Signal> pair_for_params(Kind kind, double rho, double alpha, std::size_t n,
                                                 std::uint64_t seed) {
    if (n < 2) throw DomainError("pair_for_params: needs n >= 2");
    const Vec u = verify_detail::random_unit(n, seed, 7);
    const Vec w = verify_detail::random_orthogonal(u, seed, 8);
    const double c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    if (kind == Kind::Amplitude) {
        Vec y = axpy(scaled(u, rho * alpha), c * alpha, w);
        return {Signal(u), Signal(std::move(y))};
    }
    const Vec v = axpy(scaled(u, rho), c, w);
    Vec x(n), y(n);
    for (std::size_t j = 0; j < n; ++j) {
        x[j] = 0.5 * (u[j] + v[j]);
        y[j] = 0.5 * (v[j] - u[j]);
    }
    return {Signal(std::move(x)), Signal(std::move(y))};
}

/// Distribution parameters realized by a pair (x, y), as used to label
/// margins: amplitude (cos angle folded to [0,1], norm ratio <= 1), intensity
/// cos angle between x - y and x + y folded to [0,1].
inline BalanceArgmin params_of_pair(Kind kind, const Signal& x, const Signal& y) {
    if (kind == Kind::Amplitude) {
        const double nx = x.norm();
        const double ny = y.norm();
        const double big = std::max(nx, ny);
        const double small = std::min(nx, ny);
        const double alpha = big > 0.0 ? small / big : 0.0;
        const double rho = small > 0.0 ? std::min(1.0, std::abs(dot(x.values(), y.values())) / (nx * ny)) : 0.0;
        return {rho, alpha};
    }
    const Vec u = axpy(x.values(), -1.0, y.values());
    const Vec v = axpy(x.values(), 1.0, y.values());
    const double nu = norm2(u);
    const double nv = norm2(v);
    const double rho = nu > 0.0 && nv > 0.0 ? std::min(1.0, std::abs(dot(u, v)) / (nu * nv)) : 1.0;
    return {rho, std::nullopt};
}

struct MarginSample {
    BalanceArgmin params;
    bool stratified = false;
    double margin = 0.0;
};

struct EmpiricalMargin {
    double min_margin = std::numeric_limits<double>::infinity();
    std::optional<RobMargin> worst;
    BalanceArgmin worst_params;
    std::vector<MarginSample> samples;
};

namespace verify_detail {

// Target parameters for the stratified half: anchors first, then the 0.1
// grid over (rho, alpha) or rho, skipping the degenerate amplitude corner.
inline std::vector<BalanceArgmin> stratified_targets(Kind kind, const std::vector<BalanceArgmin>& anchors) {
    std::vector<BalanceArgmin> out = anchors;
    for (int i = 0; i <= 10; ++i) {
        const double rho = 0.1 * i;
        if (kind == Kind::Intensity) {
            out.push_back({rho, std::nullopt});
            continue;
        }
        for (int j = 0; j <= 10; ++j) {
            if (i == 10 && j == 10) continue;
            out.push_back({rho, 0.1 * j});
        }
    }
    return out;
}

struct PairDraw {
    Signal x;
    Signal y;
    bool stratified = false;
};

// Pair number `index` of a sampling run of `count` pairs: the first
// ceil(count/2) walk the stratified targets, the rest are i.i.d. Gaussian.
inline PairDraw draw_pair(Kind kind, std::size_t n, std::size_t index, std::size_t count, std::uint64_t seed,
                          const std::vector<BalanceArgmin>& targets) {
    const std::uint64_t pair_seed = rng::derive_seed(seed, index);
    const std::size_t stratified = (count + 1) / 2;
    if (index < stratified) {
        const BalanceArgmin& t = targets[index % targets.size()];
        auto [x, y] = pair_for_params(kind, t.rho, t.alpha.value_or(0.0), n, pair_seed);
        return {std::move(x), std::move(y), true};
    }
    Vec x(n), y(n);
    for (std::size_t j = 0; j < n; ++j) {
        x[j] = rng::normal(pair_seed, 9, j);
        y[j] = rng::normal(pair_seed, 10, j);
    }
    return {Signal(std::move(x)), Signal(std::move(y)), false};
}

}  // namespace verify_detail

/// Minimum of worst_margin over num_pairs sampled pairs. `anchors` are
/// parameter pairs visited before the stratified grid.
inline EmpiricalMargin empirical_min_margin(const GaussianEnsemble& a, double s, Kind kind, std::size_t num_pairs,
                                            std::uint64_t seed, const std::vector<BalanceArgmin>& anchors = {}) {
    if (num_pairs < 1) throw DomainError("empirical_min_margin: num_pairs must be at least 1");
    const auto targets = verify_detail::stratified_targets(kind, anchors);
    EmpiricalMargin out;
    for (std::size_t k = 0; k < num_pairs; ++k) {
        auto draw = verify_detail::draw_pair(kind, a.n(), k, num_pairs, seed, targets);
        if (!(dist_k(kind, draw.x, draw.y) > 0.0)) continue;
        RobMargin r = worst_margin(a, draw.x, draw.y, s, kind);
        const BalanceArgmin params = params_of_pair(kind, draw.x, draw.y);
        out.samples.push_back({params, draw.stratified, r.margin});
        if (r.margin < out.min_margin) {
            out.min_margin = r.margin;
            out.worst_params = params;
            out.worst = std::move(r);
        }
    }
    if (!out.worst) throw NumericalError("empirical_min_margin: every sampled pair was degenerate");
    return out;
}

struct DistHandle {
    std::function<double(double)> cdf;
    std::function<double(double)> quantile;
};

inline DistHandle handle_for(const AmpDistParams& p) {
    return {[p](double t) { return cdf_abs_diff(t, p); }, [p](double q) { return quantile_abs_diff(q, p); }};
}

inline DistHandle handle_for(const IntDistParams& p) {
    return {[p](double t) { return cdf_abs_prod(t, p); }, [p](double q) { return quantile_abs_prod(q, p); }};
}

struct DkwResult {
    bool holds = false;
    double lower = 0.0;      ///< F^{-1}(eta - eps)
    double empirical = 0.0;  ///< empirical eta-quantile
    double upper = 0.0;      ///< F^{-1}(eta + eps)
};

/// Tests F^{-1}(eta - eps) < Fhat^{-1}(eta) < F^{-1}(eta + eps). The
/// empirical quantile is the smallest sample x with Fhat(x) >= eta. Quantile
/// levels of 0 and 1 map to -inf and +inf.
inline DkwResult dkw_check(std::span<const double> samples, const DistHandle& dist, double eta, double eps) {
    if (samples.empty()) throw DomainError("dkw_check: no samples");
    if (!(eps >= 0.0) || !(eta - eps >= 0.0) || !(eta + eps <= 1.0) || !(eta > 0.0 && eta <= 1.0))
        throw DomainError("dkw_check: eta +/- eps must lie in [0,1]");
    auto level = [&](double q) {
        if (q <= 0.0) return -std::numeric_limits<double>::infinity();
        if (q >= 1.0) return std::numeric_limits<double>::infinity();
        return dist.quantile(q);
    };
    Vec sorted(samples.begin(), samples.end());
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(eta * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size()) - 1;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank), sorted.end());
    DkwResult out;
    out.empirical = sorted[rank];
    out.lower = level(eta - eps);
    out.upper = level(eta + eps);
    out.holds = out.lower < out.empirical && out.empirical < out.upper;
    return out;
}

struct StabilityReport {
    Kind kind = Kind::Amplitude;
    double lower = 0.0;
    double upper = 0.0;
    double slack = 0.0;
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio = -std::numeric_limits<double>::infinity();
    std::size_t pairs_checked = 0;
    std::size_t skipped = 0;
    bool passed = false;
};

/// Corridor limits of (1/m) || |Ax|^k - |Ay|^k ||_1 / dist_k(x, y).
inline std::pair<double, double> stability_corridor(Kind kind) {
    if (kind == Kind::Amplitude)
        return {specfn::kSqrt2OverPi * (2.0 - std::numbers::sqrt2), specfn::kSqrt2OverPi};
    return {2.0 / std::numbers::pi, 1.0};
}

inline double stability_ratio(const GaussianEnsemble& a, const Signal& x, const Signal& y, Kind kind) {
    return worst_margin(a, x, y, 0.0, kind).margin;
}

/// Checks every sampled pair's normalized discrepancy against the corridor
/// widened by slack. Pairs with dist_k = 0 are skipped.
inline StabilityReport stability_check(const GaussianEnsemble& a, std::size_t num_pairs, Kind kind, double slack,
                                       std::uint64_t seed = 0) {
    StabilityReport rep;
    rep.kind = kind;
    rep.slack = slack;
    std::tie(rep.lower, rep.upper) = stability_corridor(kind);
    const auto targets = verify_detail::stratified_targets(kind, {});
    for (std::size_t k = 0; k < num_pairs; ++k) {
        auto draw = verify_detail::draw_pair(kind, a.n(), k, num_pairs, seed, targets);
        if (!(dist_k(kind, draw.x, draw.y) > 0.0)) {
            ++rep.skipped;
            continue;
        }
        const double r = stability_ratio(a, draw.x, draw.y, kind);
        rep.min_ratio = std::min(rep.min_ratio, r);
        rep.max_ratio = std::max(rep.max_ratio, r);
        ++rep.pairs_checked;
    }
    rep.passed = rep.pairs_checked > 0 && rep.min_ratio >= rep.lower - slack && rep.max_ratio <= rep.upper + slack;
    return rep;
}

/// Samples of ||X| - |Y|| with X ~ N(0,1), Y ~ N(0, alpha^2), corr rho.
inline Vec mc_sample_abs_diff(const AmpDistParams& p, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw DomainError("mc_sample_abs_diff: n_samples must be at least 1");
    const double c = p.alpha * std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));
    Vec out(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double g1 = rng::normal(seed, 11, 2 * i);
        const double g2 = rng::normal(seed, 11, 2 * i + 1);
        const double x = g1;
        const double y = p.rho * p.alpha * g1 + c * g2;
        out[i] = std::abs(std::abs(x) - std::abs(y));
    }
    return out;
}

/// Samples of |XY| with X, Y standard normal, corr rho.
inline Vec mc_sample_abs_prod(const IntDistParams& p, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw DomainError("mc_sample_abs_prod: n_samples must be at least 1");
    const double c = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));
    Vec out(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double g1 = rng::normal(seed, 12, 2 * i);
        const double g2 = rng::normal(seed, 12, 2 * i + 1);
        out[i] = std::abs(g1 * (p.rho * g1 + c * g2));
    }
    return out;
}

}  // namespace sharplad

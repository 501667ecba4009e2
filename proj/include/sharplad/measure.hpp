#pragma once

// Gaussian measurement ensembles, amplitude/intensity forward maps, the
// sign-invariant metrics, and corrupted observations, including the
// adversarial outliers that make a decoy signal look better than the truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sharplad/balance.hpp"
#include "sharplad/common.hpp"
#include "sharplad/linalg.hpp"
#include "sharplad/rng.hpp"

namespace sharplad {

/// m x n matrix with i.i.d. N(0,1) entries, row-major. Entry (i, j) depends
/// only on (seed, i * n + j).
class GaussianEnsemble {
public:
    GaussianEnsemble(std::size_t m, std::size_t n, std::uint64_t seed, Vec data)
        : m_(m), n_(n), seed_(seed), data_(std::move(data)) {}

    std::size_t m() const { return m_; }
    std::size_t n() const { return n_; }
    std::uint64_t seed() const { return seed_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
    std::span<const double> data() const { return data_; }

    /// Linear measurements <a_i, x>.
    Vec apply(std::span<const double> x) const {
        if (x.size() != n_) throw DomainError("GaussianEnsemble::apply: dimension mismatch");
        Vec out(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            const double* a = data_.data() + i * n_;
            double s = 0.0;
            for (std::size_t j = 0; j < n_; ++j) s += a[j] * x[j];
            out[i] = s;
        }
        return out;
    }

    /// A restricted to the first `rows` rows.
    GaussianEnsemble head(std::size_t rows) const {
        rows = std::min(rows, m_);
        return {rows, n_, seed_, Vec(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(rows * n_))};
    }

private:
    std::size_t m_;
    std::size_t n_;
    std::uint64_t seed_;
    Vec data_;
};

inline GaussianEnsemble sample_ensemble(std::size_t m, std::size_t n, std::uint64_t seed) {
    if (m < 1 || n < 1) throw DomainError("sample_ensemble: m and n must be positive");
    if (static_cast<double>(m) * static_cast<double>(n) > 1e9) {
        throw DomainError("sample_ensemble: m * n exceeds 1e9 entries");
    }
    Vec data(m * n);
    for (std::size_t k = 0; k < data.size(); ++k) data[k] = rng::normal(seed, 1, k);
    return {m, n, seed, std::move(data)};
}

/// Standard Gaussian signal, as used for ground truths in experiments.
inline Signal sample_signal(std::size_t n, std::uint64_t seed) {
    Vec x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = rng::normal(seed, 2, j);
    return Signal(std::move(x));
}

/// |<a_i, x>| (amplitude) or <a_i, x>^2 (intensity).
inline Vec forward(const GaussianEnsemble& a, const Signal& x, Kind kind) {
    Vec out = a.apply(x.values());
    for (double& v : out) v = kind == Kind::Amplitude ? std::abs(v) : v * v;
    return out;
}

/// min(||x - y||, ||x + y||)
inline double dist1(const Signal& x, const Signal& y) {
    if (x.n() != y.n()) throw DomainError("dist1: dimension mismatch");
    return std::min(norm2(axpy(x.values(), -1.0, y.values())), norm2(axpy(x.values(), 1.0, y.values())));
}

/// ||x - y|| * ||x + y||
inline double dist2(const Signal& x, const Signal& y) {
    if (x.n() != y.n()) throw DomainError("dist2: dimension mismatch");
    return norm2(axpy(x.values(), -1.0, y.values())) * norm2(axpy(x.values(), 1.0, y.values()));
}

/// The metric matching the measurement kind.
inline double dist_k(Kind kind, const Signal& x, const Signal& y) {
    return kind == Kind::Amplitude ? dist1(x, y) : dist2(x, y);
}

/// Sign-invariant relative error min(||x - x0||, ||x + x0||) / ||x0||.
inline double relative_error(const Signal& x, const Signal& truth) { return dist1(x, truth) / truth.norm(); }

/// Number of corrupted entries for fraction s: floor(s m).
inline std::size_t corruption_count(double s, std::size_t m) {
    return static_cast<std::size_t>(std::floor(s * static_cast<double>(m) + 1e-9));
}

/// Indices of the k largest values, ties to the lower index, returned in
/// ascending index order.
inline std::vector<std::size_t> top_k_indices(std::span<const double> values, std::size_t k) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    k = std::min(k, order.size());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

/// Unit vector orthogonal to x0: Gram-Schmidt on the first standard basis
/// vector that is not parallel to x0, oriented by the sign of the first
/// nonzero entry of x0 so that flipping x0 flips the result.
inline Vec orthogonal_unit(const Signal& x0) {
    const double nrm2 = dot(x0.values(), x0.values());
    if (nrm2 == 0.0) throw DomainError("orthogonal_unit: x0 must be nonzero");
    std::size_t pivot = 0;
    while (x0[pivot] == 0.0) ++pivot;
    const double orientation = x0[pivot] > 0.0 ? 1.0 : -1.0;
    for (std::size_t k = 0; k < x0.n(); ++k) {
        Vec r = scaled(x0.values(), -x0[k] / nrm2);
        r[k] += 1.0;
        const double len = norm2(r);
        if (len > 1e-6) return scaled(r, orientation / len);
    }
    throw DomainError("orthogonal_unit: no orthogonal direction exists for n = 1");
}

struct AdversaryPlan {
    Kind kind = Kind::Amplitude;
    double fraction = 0.0;
    Signal x_star;
    std::vector<std::size_t> support;
    Vec z;  ///< full length m, zero off the support
    BalanceArgmin params_used;
};

/// Decoy signal for the counterexample construction.
///   amplitude: ||x*|| = alpha ||x0|| and cos(x*, x0) = rho.
///   intensity: x* orthogonal to x0 with ||x*|| = sqrt((1-rho)/(1+rho)) ||x0||,
///              so that <(x0-x*)/|.|, (x0+x*)/|.|> = rho.
inline Signal decoy_signal(const Signal& x0, Kind kind, const BalanceArgmin& params) {
    const double norm = x0.norm();
    if (norm == 0.0) throw DomainError("decoy_signal: x0 must be nonzero");
    const double rho = params.rho;
    if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("decoy_signal: rho must lie in [0,1]");
    if (kind == Kind::Amplitude) {
        if (!params.alpha) throw DomainError("decoy_signal: amplitude decoy needs alpha");
        const double alpha = *params.alpha;
        const double along = rho * alpha;
        const double across = std::sqrt(std::max(0.0, 1.0 - rho * rho)) * alpha * norm;
        Vec x = scaled(x0.values(), along);
        if (across != 0.0) x = axpy(x, across, orthogonal_unit(x0));
        return Signal(std::move(x));
    }
    const double ratio = std::sqrt((1.0 - rho) / (1.0 + rho));
    if (ratio == 0.0) return Signal(Vec(x0.n(), 0.0));
    return Signal(scaled(orthogonal_unit(x0), ratio * norm));
}

/// Outlier that replaces the floor(s m) measurements where the decoy and the
/// truth disagree most by the decoy's measurements.
inline AdversaryPlan build_adversary(const GaussianEnsemble& a, const Signal& x0, double s, Kind kind,
                                     const BalanceArgmin& params) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("build_adversary: s must lie in (0,1)");
    if (x0.n() != a.n()) throw DomainError("build_adversary: dimension mismatch");
    if (x0.norm() == 0.0) throw DomainError("build_adversary: x0 must be nonzero");
    const std::size_t k = corruption_count(s, a.m());
    if (k < 1) throw DomainError("build_adversary: s * m < 1 leaves nothing to corrupt");
    AdversaryPlan plan;
    plan.kind = kind;
    plan.fraction = s;
    plan.params_used = params;
    plan.x_star = decoy_signal(x0, kind, params);
    const Vec decoy = forward(a, plan.x_star, kind);
    const Vec truth = forward(a, x0, kind);
    Vec gap(a.m());
    for (std::size_t i = 0; i < gap.size(); ++i) gap[i] = std::abs(decoy[i] - truth[i]);
    plan.support = top_k_indices(gap, k);
    plan.z.assign(a.m(), 0.0);
    for (std::size_t i : plan.support) plan.z[i] = decoy[i] - truth[i];
    return plan;
}

struct NoiseSpec {
    enum class Type { None, Uniform, Gaussian };
    Type type = Type::None;
    double sigma = 0.0;
    std::uint64_t seed = 0;

    /// "none", "uniform:<sigma>" or "gaussian:<sigma>".
    static NoiseSpec parse(const std::string& text, std::uint64_t seed = 0) {
        NoiseSpec spec;
        spec.seed = seed;
        if (text.empty() || text == "none") return spec;
        const auto colon = text.find(':');
        const std::string name = text.substr(0, colon);
        if (colon == std::string::npos) throw DomainError("noise spec needs a level: " + text);
        spec.sigma = std::stod(text.substr(colon + 1));
        if (!(spec.sigma >= 0.0)) throw DomainError("noise level must be nonnegative: " + text);
        if (name == "uniform") {
            spec.type = Type::Uniform;
        } else if (name == "gaussian") {
            spec.type = Type::Gaussian;
        } else {
            throw DomainError("unknown noise type: " + name);
        }
        return spec;
    }

    std::string to_string() const {
        switch (type) {
            case Type::None: return "none";
            case Type::Uniform: return "uniform:" + std::to_string(sigma);
            case Type::Gaussian: return "gaussian:" + std::to_string(sigma);
        }
        return "none";
    }
};

/// Outliers on a uniformly random support with N(0, scale^2) values.
struct RandomOutlierSpec {
    double fraction = 0.0;
    double scale = 1.0;
    std::uint64_t seed = 0;
};

using OutlierSource = std::variant<std::monostate, AdversaryPlan, RandomOutlierSpec>;

struct CorruptedObservation {
    Kind kind = Kind::Amplitude;
    Vec b;
    Vec clean;
    Vec omega;
    Vec z;
    std::vector<std::size_t> support;
    double fraction = 0.0;
};

inline Vec sample_noise(const NoiseSpec& spec, std::size_t m) {
    Vec omega(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (spec.type == NoiseSpec::Type::Uniform) {
            omega[i] = spec.sigma * (2.0 * rng::uniform(spec.seed, 3, i) - 1.0);
        } else if (spec.type == NoiseSpec::Type::Gaussian) {
            omega[i] = spec.sigma * rng::normal(spec.seed, 3, i);
        }
    }
    return omega;
}

/// Assembles b = clean + omega + z and keeps the parts for auditing.
inline CorruptedObservation corrupt(const Vec& clean, Kind kind, const NoiseSpec& noise,
                                    const OutlierSource& outliers = {}) {
    const std::size_t m = clean.size();
    CorruptedObservation obs;
    obs.kind = kind;
    obs.clean = clean;
    obs.omega = sample_noise(noise, m);
    obs.z.assign(m, 0.0);
    if (const auto* plan = std::get_if<AdversaryPlan>(&outliers)) {
        if (plan->z.size() != m) throw DomainError("corrupt: outlier plan does not match the observation size");
        if (plan->kind != kind) throw DomainError("corrupt: outlier plan built for a different measurement kind");
        obs.z = plan->z;
        obs.support = plan->support;
        obs.fraction = plan->fraction;
    } else if (const auto* spec = std::get_if<RandomOutlierSpec>(&outliers)) {
        if (!(spec->fraction >= 0.0 && spec->fraction < 1.0)) throw DomainError("corrupt: outlier fraction must lie in [0,1)");
        const std::size_t k = corruption_count(spec->fraction, m);
        std::vector<std::size_t> perm(m);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng::Stream draws(spec->seed, 4);
        for (std::size_t i = 0; i < k; ++i) std::swap(perm[i], perm[i + draws.below(m - i)]);
        obs.support.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(obs.support.begin(), obs.support.end());
        for (std::size_t i : obs.support) obs.z[i] = spec->scale * draws.normal();
        obs.fraction = spec->fraction;
    }
    obs.b.resize(m);
    for (std::size_t i = 0; i < m; ++i) obs.b[i] = obs.clean[i] + obs.omega[i] + obs.z[i];
    return obs;
}

}  // namespace sharplad

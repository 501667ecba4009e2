// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sharplad/harness.hpp"

using namespace sharplad;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const double kSqrt2Pi = std::sqrt(2.0 / std::numbers::pi);

struct Verdict {
    bool passed;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Verdict()>& body) {
    const auto t0 = Clock::now();
    Verdict v{false, ""};
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.passed) ++failures;
    std::printf("%s [%d] %s (%.1f s): %s\n", v.passed ? "PASS" : "FAIL", id, title.c_str(), seconds_since(t0),
                v.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

ThresholdResult amp_threshold, int_threshold;

// [1] -----------------------------------------------------------------------
constexpr double kAmpThreshold = 0.2043, kIntThreshold = 0.1185, kThresholdTol = 0.002, kThresholdSeconds = 60.0;

Verdict sharp_thresholds() {
    auto t0 = Clock::now();
    amp_threshold = sharp_threshold(Kind::Amplitude);
    const double t_amp = seconds_since(t0);
    t0 = Clock::now();
    int_threshold = sharp_threshold(Kind::Intensity);
    const double t_int = seconds_since(t0);
    const bool ok = std::abs(amp_threshold.threshold - kAmpThreshold) <= kThresholdTol &&
                    std::abs(int_threshold.threshold - kIntThreshold) <= kThresholdTol && t_amp < kThresholdSeconds &&
                    t_int < kThresholdSeconds;
    return {ok, "amplitude " + fmt(amp_threshold.threshold) + " at (rho, alpha) = (" + fmt(amp_threshold.argmin.rho) +
                    ", " + fmt(amp_threshold.argmin.alpha.value_or(NAN)) + ") in " + fmt(t_amp) + " s; intensity " +
                    fmt(int_threshold.threshold) + " at rho = " + fmt(int_threshold.argmin.rho) + " in " + fmt(t_int) +
                    " s"};
}

// [2] -----------------------------------------------------------------------
constexpr double kAnchorTol = 1e-6;

Verdict endpoint_anchors() {
    const double m0 = min_balance(Kind::Amplitude, 0.0).value;
    const double m1 = min_balance(Kind::Amplitude, 1.0).value;
    const double j0 = min_balance(Kind::Intensity, 0.0).value;
    const double j1 = min_balance(Kind::Intensity, 1.0).value;
    const double e0 = std::abs(m0 - kSqrt2Pi * (2 - std::sqrt(2.0)));
    const double e1 = std::abs(m1 + kSqrt2Pi);
    const double e2 = std::abs(j0 - 2 / std::numbers::pi);
    const double e3 = std::abs(j1 + 1.0);
    const double worst = std::max({e0, e1, e2, e3});
    return {worst <= kAnchorTol, "M(0)=" + fmt(m0) + " M(1)=" + fmt(m1) + " J(0)=" + fmt(j0) + " J(1)=" + fmt(j1) +
                                     ", largest deviation " + fmt(worst)};
}

// [3] -----------------------------------------------------------------------
constexpr double kDensityTol = 1e-6;

Verdict density_suite() {
    double worst_norm = 0, worst_phi = 0, worst_moment = 0;
    for (int i = 0; i <= 10; ++i) {
        for (int j = 0; j <= 10; ++j) {
            if (i == 10 && j == 10) continue;
            const double rho = 0.1 * i, alpha = 0.1 * j;
            const AmpDistParams p(rho, alpha);
            worst_norm = std::max(worst_norm, std::abs(cdf_abs_diff(p.upper(), p) - 1.0));
            const double d1 = std::sqrt(1 + alpha * alpha - 2 * alpha * rho);
            const double phi = kSqrt2Pi *
                               (std::sqrt(1 + alpha * alpha + 2 * alpha * rho) + d1 - 1 - alpha) / d1;
            worst_phi = std::max(worst_phi, std::abs(balance_amplitude(p, 0.0).value - phi));
        }
    }
    std::vector<double> rhos;
    for (int i = 0; i <= 9; ++i) rhos.push_back(0.1 * i);
    rhos.push_back(0.99);
    rhos.push_back(1.0);
    for (double rho : rhos) {
        const IntDistParams p(rho);
        worst_norm = std::max(worst_norm, std::abs(cdf_abs_prod(p.upper(), p) - 1.0));
        const double mean = 2 / std::numbers::pi * (std::sqrt(1 - rho * rho) + rho * std::asin(rho));
        worst_moment = std::max(worst_moment, std::abs(partial_first_moment_int(kInfinity, p) - mean));
    }
    const bool ok = worst_norm <= kDensityTol && worst_phi <= kDensityTol && worst_moment <= kDensityTol;
    return {ok, "normalization " + fmt(worst_norm) + ", M(.,.,0) vs phi " + fmt(worst_phi) + ", E|XY| " +
                    fmt(worst_moment)};
}

// [4] -----------------------------------------------------------------------
constexpr std::size_t kBalanceSamples = 10'000'000, kDkwSamples = 1'000'000, kDkwReps = 200, kDkwMinHeld = 199;
constexpr double kStdErrs = 3.0, kDkwEps = 0.01, kDkwEta = 0.8;

Verdict oracle_equivalence() {
    std::mt19937_64 pick(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0), frac(0.02, 0.5);
    int agree = 0;
    double worst_z = 0;
    for (int t = 0; t < 10; ++t) {
        const double rho = unit(pick), alpha = unit(pick), s = frac(pick);
        const AmpDistParams p(rho, alpha);
        const auto samples = oracle::sample_abs_diff(rho, alpha, kBalanceSamples, 5000 + t);
        const auto mc = oracle::sorted_balance_with_se(samples, s, p.dist1());
        const double z = std::abs(balance_amplitude(p, s).value - mc.mean) / mc.se;
        worst_z = std::max(worst_z, z);
        agree += z <= kStdErrs ? 1 : 0;
    }
    const AmpDistParams dp(0.5, 0.8);
    const DistHandle handle = handle_for(dp);
    std::size_t held = 0;
    for (std::size_t r = 0; r < kDkwReps; ++r)
        held += dkw_check(mc_sample_abs_diff(dp, kDkwSamples, 9000 + r), handle, kDkwEta, kDkwEps).holds ? 1 : 0;
    return {agree == 10 && held >= kDkwMinHeld, std::to_string(agree) + "/10 balance triples within 3 SE (largest " +
                                                    fmt(worst_z) + " SE); DKW sandwich held " + std::to_string(held) +
                                                    "/" + std::to_string(kDkwReps)};
}

// [5] -----------------------------------------------------------------------
Verdict exact_subset() {
    int exact = 0;
    for (std::uint64_t inst = 0; inst < 100; ++inst) {
        const std::size_t m = 6 + inst % 11;  // 6..16
        const auto a = sample_ensemble(m, 3, 40000 + inst);
        const Signal x = sample_signal(3, 41000 + inst), y = sample_signal(3, 42000 + inst);
        const Kind kind = inst % 2 ? Kind::Intensity : Kind::Amplitude;
        const double s = 0.05 + 0.05 * static_cast<double>(inst % 8);
        const auto r = worst_margin(a, x, y, s, kind);
        const Vec v = discrepancies(a, x, y, kind);
        const std::size_t k = static_cast<std::size_t>(std::floor(s * static_cast<double>(m) + 1e-9));
        exact += r.margin == oracle::brute_force_margin(v, k, dist_k(kind, x, y)) ? 1 : 0;
    }
    return {exact == 100, std::to_string(exact) + "/100 instances equal the exhaustive minimum bit for bit"};
}

// [6] -----------------------------------------------------------------------
constexpr double kCorridorSlack = 0.05;

Verdict stability_corridors() {
    const auto a = sample_ensemble(5000, 5, 777);
    const auto amp = stability_check(a, 500, Kind::Amplitude, kCorridorSlack, 1);
    const auto in = stability_check(a, 500, Kind::Intensity, kCorridorSlack, 2);
    return {amp.passed && in.passed && amp.pairs_checked == 500 && in.pairs_checked == 500,
            "amplitude [" + fmt(amp.min_ratio) + ", " + fmt(amp.max_ratio) + "] within [" + fmt(amp.lower - kCorridorSlack) +
                ", " + fmt(amp.upper + kCorridorSlack) + "]; intensity [" + fmt(in.min_ratio) + ", " +
                fmt(in.max_ratio) + "] within [" + fmt(in.lower - kCorridorSlack) + ", " +
                fmt(in.upper + kCorridorSlack) + "]"};
}

// [7] -----------------------------------------------------------------------
constexpr double kRecovered = 1e-3, kFailed = 0.05, kTransitionSeconds = 600.0;

Verdict phase_transition() {
    const auto t0 = Clock::now();
    ExperimentConfig cfg;
    cfg.n = 5;
    cfg.m = 2500;
    cfg.seeds.clear();
    for (std::uint64_t s = 0; s < 20; ++s) cfg.seeds.push_back(s);
    cfg.s_grid = {0.05, 0.30, 0.05};
    const auto amp = run_phase_transition(cfg, Kind::Amplitude, amp_threshold);
    cfg.s_grid = {0.04, 0.20, 0.04};
    const auto in = run_phase_transition(cfg, Kind::Intensity, int_threshold);
    const double elapsed = seconds_since(t0);

    int bad_cells = 0;
    auto check = [&](const PhaseTransitionResult& r, double ok_upto, double fail_from) {
        for (const auto& c : r.cells) {
            if (!c.ok()) ++bad_cells;
            else if (c.s <= ok_upto + 1e-12 && !(c.relative_error <= kRecovered)) ++bad_cells;
            else if (c.s >= fail_from - 1e-12 && !(c.relative_error >= kFailed)) ++bad_cells;
        }
    };
    check(amp, 0.15, 0.25);
    check(in, 0.08, 0.16);
    int ordered = 0;
    for (std::size_t k = 0; k < cfg.seeds.size(); ++k) {
        const auto& a = amp.per_seed_transition[k];
        const auto& i = in.per_seed_transition[k];
        ordered += (a && i && *a > *i) ? 1 : 0;
    }
    std::string curve = "amplitude mean errors:";
    for (const auto& s : amp.summary) curve += " " + fmt(s.s) + ":" + fmt(s.mean);
    curve += "; intensity:";
    for (const auto& s : in.summary) curve += " " + fmt(s.s) + ":" + fmt(s.mean);
    return {bad_cells == 0 && ordered == 20 && elapsed <= kTransitionSeconds,
            std::to_string(bad_cells) + " cells outside their regime, amplitude transition above intensity in " +
                std::to_string(ordered) + "/20 seeds, " + fmt(elapsed) + " s; " + curve};
}

// [8] -----------------------------------------------------------------------
constexpr double kDecoyMargin = 0.05;
constexpr int kDecoyTrials = 100, kDecoyMinWins = 95;

Verdict counterexample() {
    std::string detail;
    bool ok = true;
    for (const auto* thr : {&amp_threshold, &int_threshold}) {
        const double s = thr->threshold + kDecoyMargin;
        int wins = 0;
        for (int t = 0; t < kDecoyTrials; ++t) {
            const JobSeeds js(10000 + t);
            const auto a = sample_ensemble(2500, 5, js.ensemble);
            const Signal x0 = sample_signal(5, js.signal);
            const auto plan = build_adversary(a, x0, s, thr->kind, thr->argmin);
            const auto obs = corrupt(forward(a, x0, thr->kind), thr->kind, NoiseSpec{}, plan);
            wins += objective(a, obs.b, plan.x_star, thr->kind) < objective(a, obs.b, x0, thr->kind) ? 1 : 0;
        }
        ok = ok && wins >= kDecoyMinWins;
        detail += (detail.empty() ? "" : "; ") + to_string(thr->kind) + " s=" + fmt(s) + " decoy wins " +
                  std::to_string(wins) + "/" + std::to_string(kDecoyTrials);
    }
    return {ok, detail};
}

// [9] -----------------------------------------------------------------------
constexpr double kGradTol = 1e-5, kNoiseFactor = 3.0;

Verdict solver_numerics() {
    double worst = 0;
    const auto a = sample_ensemble(2500, 5, 31337);
    const Signal x0 = sample_signal(5, 31338);
    for (Kind kind : {Kind::Amplitude, Kind::Intensity}) {
        const Vec b = forward(a, x0, kind);
        for (std::uint64_t t = 0; t < 20; ++t) {
            const Signal x = sample_signal(5, 32000 + t);
            const Vec g = subgradient(a, b, x, kind);
            const double h = 1e-7;
            for (std::size_t j = 0; j < 5; ++j) {
                Vec up = x.vec(), dn = x.vec();
                up[j] += h;
                dn[j] -= h;
                const double fd = (objective(a, b, Signal(up), kind) - objective(a, b, Signal(dn), kind)) / (2 * h);
                worst = std::max(worst, std::abs(g[j] - fd) / std::max(1.0, std::abs(fd)));
            }
        }
    }
    std::vector<double> ratio;
    for (double sigma : {0.001, 0.01}) {
        double err = 0, noise = 0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const JobSeeds js(50000 + seed);
            const auto aa = sample_ensemble(2500, 5, js.ensemble);
            const Signal truth = sample_signal(5, js.signal);
            const auto plan = build_adversary(aa, truth, 0.1, Kind::Amplitude, amp_threshold.argmin);
            NoiseSpec ns;
            ns.type = NoiseSpec::Type::Uniform;
            ns.sigma = sigma;
            ns.seed = js.noise;
            const auto obs = corrupt(forward(aa, truth, Kind::Amplitude), Kind::Amplitude, ns, plan);
            SolveOptions opt;
            opt.seed = seed;
            err += solve(aa, obs.b, Kind::Amplitude, opt, truth).dist1_to_truth.value();
            noise += norm1(obs.omega) / 2500.0;
        }
        ratio.push_back(err / noise);
    }
    const double spread = std::max(ratio[0], ratio[1]) / std::min(ratio[0], ratio[1]);
    return {worst <= kGradTol && spread <= kNoiseFactor,
            "largest subgradient deviation " + fmt(worst) + "; error per unit noise " + fmt(ratio[0]) + " vs " +
                fmt(ratio[1]) + " (factor " + fmt(spread) + ")"};
}

}  // namespace

int main() {
    report(1, "sharp thresholds", sharp_thresholds);
    report(2, "endpoint anchors", endpoint_anchors);
    report(3, "density suite", density_suite);
    report(4, "Monte-Carlo and DKW oracle equivalence", oracle_equivalence);
    report(5, "exact-subset margin oracle", exact_subset);
    report(6, "stability corridors", stability_corridors);
    report(7, "phase transition", phase_transition);
    report(8, "counterexample inequality", counterexample);
    report(9, "solver numerics", solver_numerics);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

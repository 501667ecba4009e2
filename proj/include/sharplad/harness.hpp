#pragma once

// Experiment orchestration: thresholds, the balance-point surface, phase
// transition curves and Gaussian width estimates, with CSV/JSON emission.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharplad/balance.hpp"
#include "sharplad/io.hpp"
#include "sharplad/measure.hpp"
#include "sharplad/solver.hpp"
#include "sharplad/verify.hpp"

namespace sharplad {

struct SGrid {
    double start = 0.0;
    double stop = 0.3;
    double step = 0.05;

    void validate() const {
        if (!(start >= 0.0 && stop <= 1.0 && start <= stop)) throw DomainError("s grid must satisfy 0 <= start <= stop <= 1");
        if (!(step > 0.0)) throw DomainError("s grid step must be positive");
    }

    /// start, start + step, ... up to stop inclusive (rounded to 1e-9).
    std::vector<double> values() const {
        validate();
        std::vector<double> out;
        const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long k = 0; k <= count; ++k) out.push_back(std::round((start + step * static_cast<double>(k)) * 1e9) / 1e9);
        return out;
    }
};

enum class Experiment { PhaseTransition, Threshold, Surface, VerifyRob, VerifyStability, Dkw, Width };

inline Experiment parse_experiment(std::string_view name) {
    static const std::map<std::string_view, Experiment> table{
        {"transition", Experiment::PhaseTransition}, {"phase_transition", Experiment::PhaseTransition},
        {"threshold", Experiment::Threshold},        {"surface", Experiment::Surface},
        {"verify-rob", Experiment::VerifyRob},       {"verify_rob", Experiment::VerifyRob},
        {"verify-stability", Experiment::VerifyStability}, {"verify_stability", Experiment::VerifyStability},
        {"dkw", Experiment::Dkw},                    {"width", Experiment::Width}};
    const auto it = table.find(name);
    if (it == table.end()) throw DomainError("unknown experiment: " + std::string(name));
    return it->second;
}

inline std::vector<Kind> parse_kinds(std::string_view text) {
    if (text == "both") return {Kind::Amplitude, Kind::Intensity};
    return {parse_kind(text)};
}

struct ExperimentConfig {
    Experiment experiment = Experiment::PhaseTransition;
    std::vector<Kind> kinds{Kind::Amplitude, Kind::Intensity};
    std::size_t n = 5;
    std::size_t m = 2500;
    SGrid s_grid;
    std::vector<std::uint64_t> seeds{0};
    NoiseSpec noise;
    std::filesystem::path output_dir;
    SolveOptions solver;
    bool deterministic = false;
    bool quick = false;
    double surface_step = 0.05;
    std::size_t pairs = 100;

    void validate() const {
        if (kinds.empty()) throw DomainError("config: no measurement kind selected");
        if (n < 1) throw DomainError("config: n must be at least 1");
        if (m < n) throw DomainError("config: m must be at least n");
        if (seeds.empty()) throw DomainError("config: at least one seed is required");
        s_grid.validate();
        solver.validate();
    }

    /// Fields present in `j` replace the current values.
    void merge_json(const nlohmann::json& j) {
        if (j.contains("experiment")) experiment = parse_experiment(j.at("experiment").get<std::string>());
        if (j.contains("kind")) kinds = parse_kinds(j.at("kind").get<std::string>());
        if (j.contains("n")) n = j.at("n").get<std::size_t>();
        if (j.contains("m")) m = j.at("m").get<std::size_t>();
        if (j.contains("s_start")) s_grid.start = j.at("s_start").get<double>();
        if (j.contains("s_stop")) s_grid.stop = j.at("s_stop").get<double>();
        if (j.contains("s_step")) s_grid.step = j.at("s_step").get<double>();
        if (j.contains("seeds")) {
            const auto& s = j.at("seeds");
            seeds.clear();
            if (s.is_number_integer()) {
                for (std::uint64_t k = 0; k < s.get<std::uint64_t>(); ++k) seeds.push_back(k);
            } else {
                seeds = s.get<std::vector<std::uint64_t>>();
            }
        }
        if (j.contains("noise")) noise = NoiseSpec::parse(j.at("noise").get<std::string>());
        if (j.contains("out")) output_dir = j.at("out").get<std::string>();
        if (j.contains("deterministic")) deterministic = j.at("deterministic").get<bool>();
        if (j.contains("quick")) quick = j.at("quick").get<bool>();
        if (j.contains("surface_step")) surface_step = j.at("surface_step").get<double>();
        if (j.contains("pairs")) pairs = j.at("pairs").get<std::size_t>();
        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            solver.max_iters = s.value("max_iters", solver.max_iters);
            solver.step_init = s.value("step_init", solver.step_init);
            solver.step_decay = s.value("step_decay", solver.step_decay);
            solver.restarts = s.value("restarts", solver.restarts);
            solver.tol_obj = s.value("tol_obj", solver.tol_obj);
            solver.tol_step = s.value("tol_step", solver.tol_step);
        }
    }
};

/// Per-job seeds derived from a run seed. The ensemble and the signal depend
/// only on the run seed, so every s and both kinds see the same instance.
struct JobSeeds {
    std::uint64_t ensemble;
    std::uint64_t signal;
    std::uint64_t noise;

    explicit JobSeeds(std::uint64_t seed)
        : ensemble(rng::derive_seed(seed, 1)), signal(rng::derive_seed(seed, 2)), noise(rng::derive_seed(seed, 3)) {}
};

// Thresholds ---------------------------------------------------------------

inline std::filesystem::path threshold_cache_path(const std::filesystem::path& dir) { return dir / "threshold.json"; }

/// Reads a cached ThresholdResult for `kind` from dir/threshold.json, or
/// computes it and adds it to the cache when dir is non-empty.
inline ThresholdResult load_or_compute_threshold(Kind kind, const std::filesystem::path& dir, bool deterministic = true) {
    nlohmann::json cache = nlohmann::json::object();
    const auto path = dir.empty() ? std::filesystem::path{} : threshold_cache_path(dir);
    if (!path.empty() && std::filesystem::exists(path)) {
        std::ifstream in(path);
        cache = nlohmann::json::parse(in);
        if (cache.contains(to_string(kind))) return io::threshold_from_json(cache.at(to_string(kind)));
    }
    ThresholdResult r = sharp_threshold(kind);
    if (!path.empty()) {
        std::filesystem::create_directories(dir);
        cache.erase("generated");
        cache[to_string(kind)] = io::to_json(r);
        io::write_json(path, cache, deterministic);
    }
    return r;
}

inline std::vector<ThresholdResult> run_threshold(const ExperimentConfig& cfg) {
    std::vector<ThresholdResult> out;
    nlohmann::json j = nlohmann::json::object();
    for (Kind kind : cfg.kinds) {
        out.push_back(sharp_threshold(kind));
        j[to_string(kind)] = io::to_json(out.back());
    }
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        io::write_json(threshold_cache_path(cfg.output_dir), j, cfg.deterministic);
    }
    return out;
}

// Surface ------------------------------------------------------------------

inline std::vector<SurfaceCell> run_surface(const ExperimentConfig& cfg, Kind kind) {
    auto cells = threshold_surface(kind, cfg.surface_step);
    if (cfg.output_dir.empty()) return cells;
    std::filesystem::create_directories(cfg.output_dir);
    const std::string stem = "surface_" + to_string(kind);
    const auto csv_path = cfg.output_dir / (stem + ".csv");
    {
        std::vector<std::string> header{"rho"};
        if (kind == Kind::Amplitude) header.push_back("alpha");
        header.push_back("s_balance");
        io::CsvWriter csv(csv_path, header, cfg.deterministic);
        for (const auto& c : cells) {
            std::vector<std::string> row{io::fmt(c.rho)};
            if (c.alpha) row.push_back(io::fmt(*c.alpha));
            row.push_back(c.s_balance ? io::fmt(*c.s_balance) : "");
            csv.row(row);
        }
    }
    std::ofstream gp(cfg.output_dir / (stem + ".gp"));
    gp << "set datafile separator ','\n"
       << "set datafile missing ''\n"
       << "set terminal pngcairo size 900,700\n"
       << "set output '" << stem << ".png'\n";
    if (kind == Kind::Amplitude) {
        gp << "set xlabel 'alpha'\nset ylabel 'rho'\nset cblabel 's'\n"
           << "set view map\nset dgrid3d " << static_cast<int>(std::lround(1.0 / cfg.surface_step)) + 1 << ","
           << static_cast<int>(std::lround(1.0 / cfg.surface_step)) + 1 << "\n"
           << "splot '" << stem << ".csv' using 2:1:3 with pm3d notitle\n";
    } else {
        gp << "set xlabel 'rho'\nset ylabel 's'\n"
           << "plot '" << stem << ".csv' using 1:2 with linespoints notitle\n";
    }
    return cells;
}

// Phase transition ---------------------------------------------------------

struct PhaseCell {
    double s = 0.0;
    std::uint64_t seed = 0;
    double relative_error = std::nan("");
    double objective = std::nan("");
    double truth_objective = std::nan("");
    std::optional<double> decoy_objective;
    int restart_index = 0;
    int iterations = 0;
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
    std::optional<double> decoy_gap() const {
        if (!decoy_objective) return std::nullopt;
        return *decoy_objective - truth_objective;
    }
};

struct PhaseSummary {
    double s = 0.0;
    double mean = std::nan("");
    double stddev = std::nan("");
    std::size_t failures = 0;
    std::vector<double> per_seed;  ///< in seed order, NaN where the cell failed
};

struct PhaseTransitionResult {
    Kind kind = Kind::Amplitude;
    ThresholdResult threshold;
    std::vector<PhaseCell> cells;
    std::vector<PhaseSummary> summary;
    /// First grid s with mean relative error above the success level.
    std::optional<double> transition;
    /// Same rule applied to each seed separately, in seed order.
    std::vector<std::optional<double>> per_seed_transition;
    double grid_step = 0.0;
};

inline constexpr double kSuccessLevel = 0.01;

/// Builds the instance of one (seed, s) cell and solves it.
inline PhaseCell run_phase_cell(const ExperimentConfig& cfg, Kind kind, double s, std::uint64_t seed,
                                const ThresholdResult& thr, std::ofstream* audit = nullptr) {
    PhaseCell cell;
    cell.s = s;
    cell.seed = seed;
    const JobSeeds js(seed);
    try {
        const GaussianEnsemble a = sample_ensemble(cfg.m, cfg.n, js.ensemble);
        const Signal x0 = sample_signal(cfg.n, js.signal);
        NoiseSpec noise = cfg.noise;
        noise.seed = js.noise;
        OutlierSource outliers;
        std::optional<Signal> decoy;
        if (corruption_count(s, cfg.m) >= 1) {
            AdversaryPlan plan = build_adversary(a, x0, s, kind, thr.argmin);
            if (audit) *audit << io::audit_record(plan, js.ensemble, js.signal).dump() << '\n';
            decoy = plan.x_star;
            outliers = std::move(plan);
        }
        const CorruptedObservation obs = corrupt(forward(a, x0, kind), kind, noise, outliers);
        SolveOptions opt = cfg.solver;
        opt.seed = seed;
        const SolveReport rep = solve(a, obs.b, kind, opt, x0);
        cell.relative_error = relative_error(rep.estimate, x0);
        cell.objective = rep.objective;
        cell.truth_objective = objective(a, obs.b, x0, kind);
        if (decoy) cell.decoy_objective = objective(a, obs.b, *decoy, kind);
        cell.restart_index = rep.restart_index;
        cell.iterations = rep.iterations;
    } catch (const std::exception& e) {
        cell.status = std::string("error: ") + e.what();
    }
    return cell;
}

inline std::optional<double> first_exceeding(const std::vector<double>& grid, const std::vector<double>& errors) {
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (errors[k] > kSuccessLevel) return grid[k];
    return std::nullopt;
}

inline PhaseTransitionResult run_phase_transition(const ExperimentConfig& cfg, Kind kind,
                                                  const std::optional<ThresholdResult>& cached = std::nullopt) {
    cfg.validate();
    PhaseTransitionResult res;
    res.kind = kind;
    res.grid_step = cfg.s_grid.step;
    res.threshold = cached ? *cached : load_or_compute_threshold(kind, cfg.output_dir, cfg.deterministic);
    if (res.threshold.kind != kind) throw DomainError("run_phase_transition: cached threshold is for the other kind");
    const auto grid = cfg.s_grid.values();
    const std::string stem = "transition_" + to_string(kind);

    std::optional<std::ofstream> audit;
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        audit.emplace(cfg.output_dir / (stem + "_audit.jsonl"), std::ios::trunc);
    }
    for (double s : grid)
        for (std::uint64_t seed : cfg.seeds)
            res.cells.push_back(run_phase_cell(cfg, kind, s, seed, res.threshold, audit ? &*audit : nullptr));

    const std::size_t ns = cfg.seeds.size();
    std::vector<std::vector<double>> by_seed(ns, std::vector<double>(grid.size()));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        PhaseSummary sum;
        sum.s = grid[k];
        double total = 0.0;
        double total_sq = 0.0;
        std::size_t count = 0;
        for (std::size_t j = 0; j < ns; ++j) {
            const PhaseCell& c = res.cells[k * ns + j];
            sum.per_seed.push_back(c.relative_error);
            by_seed[j][k] = c.ok() ? c.relative_error : std::numeric_limits<double>::infinity();
            if (!c.ok()) {
                ++sum.failures;
                continue;
            }
            total += c.relative_error;
            total_sq += c.relative_error * c.relative_error;
            ++count;
        }
        if (count > 0) {
            sum.mean = total / static_cast<double>(count);
            const double var = count > 1 ? (total_sq - total * sum.mean) / static_cast<double>(count - 1) : 0.0;
            sum.stddev = std::sqrt(std::max(0.0, var));
        }
        res.summary.push_back(sum);
    }
    std::vector<double> means;
    for (const auto& sum : res.summary) means.push_back(std::isnan(sum.mean) ? std::numeric_limits<double>::infinity() : sum.mean);
    res.transition = first_exceeding(grid, means);
    for (const auto& errs : by_seed) res.per_seed_transition.push_back(first_exceeding(grid, errs));

    if (!cfg.output_dir.empty()) {
        {
            io::CsvWriter csv(cfg.output_dir / (stem + "_cells.csv"),
                              {"s", "seed", "relative_error", "objective", "truth_objective", "decoy_objective",
                               "decoy_gap", "restart_index", "iterations", "status"},
                              cfg.deterministic);
            for (const auto& c : res.cells) {
                csv.row({io::fmt(c.s), std::to_string(c.seed), io::fmt(c.relative_error), io::fmt(c.objective),
                         io::fmt(c.truth_objective), c.decoy_objective ? io::fmt(*c.decoy_objective) : "",
                         c.decoy_gap() ? io::fmt(*c.decoy_gap()) : "", std::to_string(c.restart_index),
                         std::to_string(c.iterations), "\"" + c.status + "\""});
            }
        }
        std::vector<std::string> header{"s", "mean_relative_error", "std_relative_error", "failed_cells"};
        for (std::uint64_t seed : cfg.seeds) header.push_back("seed_" + std::to_string(seed));
        io::CsvWriter csv(cfg.output_dir / (stem + ".csv"), header, cfg.deterministic);
        for (const auto& sum : res.summary) {
            std::vector<std::string> row{io::fmt(sum.s), io::fmt(sum.mean), io::fmt(sum.stddev), std::to_string(sum.failures)};
            for (double e : sum.per_seed) row.push_back(io::fmt(e));
            csv.row(row);
        }
        nlohmann::json j{{"kind", to_string(kind)},
                         {"n", cfg.n},
                         {"m", cfg.m},
                         {"noise", cfg.noise.to_string()},
                         {"threshold", io::to_json(res.threshold)},
                         {"grid_step", res.grid_step},
                         {"success_level", kSuccessLevel}};
        j["transition"] = res.transition ? nlohmann::json(*res.transition) : nlohmann::json(nullptr);
        nlohmann::json per_seed = nlohmann::json::array();
        for (const auto& t : res.per_seed_transition) per_seed.push_back(t ? nlohmann::json(*t) : nlohmann::json(nullptr));
        j["per_seed_transition"] = per_seed;
        j["seeds"] = cfg.seeds;
        io::write_json(cfg.output_dir / (stem + ".json"), j, cfg.deterministic);
        std::ofstream gp(cfg.output_dir / (stem + ".gp"));
        gp << "set datafile separator ','\nset datafile commentschars '#'\n"
           << "set terminal pngcairo size 800,600\nset output '" << stem << ".png'\n"
           << "set xlabel 's'\nset ylabel 'relative error'\nset logscale y\n"
           << "plot '" << stem << ".csv' using 1:2 with linespoints title '" << to_string(kind) << "'\n";
    }
    return res;
}

// Gaussian width -----------------------------------------------------------

enum class WidthSet { FullSpace, Sparse };

struct WidthEstimate {
    WidthSet set_kind = WidthSet::FullSpace;
    std::size_t sparsity = 0;  ///< number of nonzeros for the sparse set
    std::size_t n = 0;
    std::size_t trials = 0;
    double value = 0.0;
};

/// Monte-Carlo mean of sup <g, x> over the unit sphere (= ||g||_2) or over
/// unit-norm vectors with `sparsity` nonzeros (= l2 norm of the top |g_i|).
inline WidthEstimate gaussian_width_estimate(WidthSet set, std::size_t n, std::size_t trials, std::uint64_t seed,
                                             std::size_t sparsity = 0) {
    if (trials < 100) throw DomainError("gaussian_width_estimate: trials must be at least 100");
    if (n < 1) throw DomainError("gaussian_width_estimate: n must be at least 1");
    if (set == WidthSet::Sparse && (sparsity < 1 || sparsity > n))
        throw DomainError("gaussian_width_estimate: sparsity must lie in [1, n]");
    WidthEstimate est{set, set == WidthSet::Sparse ? sparsity : n, n, trials, 0.0};
    double total = 0.0;
    Vec g(n);
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t j = 0; j < n; ++j) g[j] = std::abs(rng::normal(seed, 13, t * n + j));
        if (set == WidthSet::Sparse && sparsity < n) {
            std::nth_element(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(sparsity), g.end(), std::greater<>());
            total += norm2(std::span<const double>(g.data(), sparsity));
        } else {
            total += norm2(g);
        }
    }
    est.value = total / static_cast<double>(trials);
    return est;
}


// Verification suites ------------------------------------------------------

struct CheckOutcome {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Minimum empirical margin per (kind, seed, s). Expected sign: positive for
/// s <= s* - gap, negative for s >= s* + gap; cells in between are reported
/// without a check.
inline std::vector<CheckOutcome> run_verify_rob(const ExperimentConfig& cfg, double gap = 0.05) {
    cfg.validate();
    std::vector<CheckOutcome> out;
    std::optional<io::CsvWriter> csv;
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        csv.emplace(cfg.output_dir / "verify_rob.csv",
                    std::vector<std::string>{"kind", "seed", "s", "rho", "alpha", "stratified", "margin"},
                    cfg.deterministic);
    }
    for (Kind kind : cfg.kinds) {
        const ThresholdResult thr = load_or_compute_threshold(kind, cfg.output_dir, cfg.deterministic);
        for (std::uint64_t seed : cfg.seeds) {
            const GaussianEnsemble a = sample_ensemble(cfg.m, cfg.n, JobSeeds(seed).ensemble);
            for (double s : cfg.s_grid.values()) {
                if (s >= 1.0) continue;
                const EmpiricalMargin em = empirical_min_margin(a, s, kind, cfg.pairs, seed, {thr.argmin});
                if (csv)
                    for (const auto& smp : em.samples)
                        csv->row({to_string(kind), std::to_string(seed), io::fmt(s), io::fmt(smp.params.rho),
                                  smp.params.alpha ? io::fmt(*smp.params.alpha) : "", smp.stratified ? "1" : "0",
                                  io::fmt(smp.margin)});
                std::optional<bool> ok;
                if (s <= thr.threshold - gap) ok = em.min_margin > 0.0;
                if (s >= thr.threshold + gap) ok = em.min_margin < 0.0;
                if (!ok) continue;
                out.push_back({"rob " + to_string(kind) + " seed=" + std::to_string(seed) + " s=" + io::fmt(s), *ok,
                               "min margin " + io::fmt(em.min_margin)});
            }
        }
    }
    return out;
}

inline std::vector<CheckOutcome> run_verify_stability(const ExperimentConfig& cfg, double slack = 0.05) {
    cfg.validate();
    std::vector<CheckOutcome> out;
    for (Kind kind : cfg.kinds) {
        for (std::uint64_t seed : cfg.seeds) {
            const GaussianEnsemble a = sample_ensemble(cfg.m, cfg.n, JobSeeds(seed).ensemble);
            const StabilityReport r = stability_check(a, cfg.pairs, kind, slack, seed);
            out.push_back({"stability " + to_string(kind) + " seed=" + std::to_string(seed), r.passed,
                           "ratios in [" + io::fmt(r.min_ratio) + ", " + io::fmt(r.max_ratio) + "], corridor [" +
                               io::fmt(r.lower - slack) + ", " + io::fmt(r.upper + slack) + "]"});
        }
    }
    return out;
}

struct DkwConfig {
    double rho = 0.5;
    double alpha = 0.8;
    std::size_t samples = 1000000;
    double eta = 0.8;
    double eps = 0.01;
    std::size_t repetitions = 200;
};

/// Repeats the DKW sandwich test with fresh samples. Passes when the number
/// of violations is at most repetitions / 200.
inline std::vector<CheckOutcome> run_dkw(const ExperimentConfig& cfg, const DkwConfig& d) {
    std::vector<CheckOutcome> out;
    for (Kind kind : cfg.kinds) {
        std::size_t held = 0;
        DkwResult last;
        for (std::size_t r = 0; r < d.repetitions; ++r) {
            const std::uint64_t seed = rng::derive_seed(cfg.seeds.front(), r);
            if (kind == Kind::Amplitude) {
                const AmpDistParams p(d.rho, d.alpha);
                last = dkw_check(mc_sample_abs_diff(p, d.samples, seed), handle_for(p), d.eta, d.eps);
            } else {
                const IntDistParams p(d.rho);
                last = dkw_check(mc_sample_abs_prod(p, d.samples, seed), handle_for(p), d.eta, d.eps);
            }
            held += last.holds ? 1 : 0;
        }
        const std::size_t allowed = d.repetitions / 200;
        out.push_back({"dkw " + to_string(kind), d.repetitions - held <= allowed,
                       std::to_string(held) + "/" + std::to_string(d.repetitions) + " sandwiches held"});
    }
    return out;
}

}  // namespace sharplad

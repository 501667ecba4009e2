// sharplad: thresholds, surfaces, phase transitions and verification suites.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sharplad/harness.hpp"

namespace {

using sharplad::ExperimentConfig;
using nlohmann::json;

enum Exit { kOk = 0, kUsage = 1, kNumerical = 2, kAcceptance = 3 };

struct Flags {
    std::string kind = "both";
    std::size_t n = 5;
    std::size_t m = 0;  // 0 means 500 n (100 n under --quick)
    double s_start = 0.0;
    double s_stop = 0.3;
    double s_step = 0.05;
    std::size_t seeds = 1;
    std::string noise = "none";
    std::string out;
    bool quick = false;
    bool deterministic = false;
    std::string config;
    double surface_step = 0.05;
    std::size_t pairs = 100;
    int restarts = 0;
    int max_iters = 0;
    sharplad::DkwConfig dkw;
    std::string width_set = "full";
    std::size_t sparsity = 1;
    std::size_t trials = 1000;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--kind", f.kind, "amplitude, intensity or both")
        ->check(CLI::IsMember({"amplitude", "intensity", "both"}));
    sub->add_option("--n", f.n, "signal dimension")->check(CLI::PositiveNumber);
    sub->add_option("--m", f.m, "number of measurements (default 500 n)");
    sub->add_option("--s-start", f.s_start, "first corruption fraction");
    sub->add_option("--s-stop", f.s_stop, "last corruption fraction");
    sub->add_option("--s-step", f.s_step, "fraction step");
    sub->add_option("--seeds", f.seeds, "number of seeds (0, 1, ...)")->check(CLI::PositiveNumber);
    sub->add_option("--noise", f.noise, "none, uniform:<sigma> or gaussian:<sigma>");
    sub->add_option("--out", f.out, "output directory");
    sub->add_flag("--quick", f.quick, "m = 100 n");
    sub->add_flag("--deterministic", f.deterministic, "omit timestamps so reruns are byte-identical");
    sub->add_option("--config", f.config, "JSON file whose fields override the flags");
}

ExperimentConfig build_config(const Flags& f, sharplad::Experiment ex) {
    ExperimentConfig cfg;
    cfg.experiment = ex;
    cfg.kinds = sharplad::parse_kinds(f.kind);
    cfg.n = f.n;
    cfg.quick = f.quick;
    cfg.m = f.m > 0 ? f.m : (f.quick ? 100 : 500) * f.n;
    cfg.s_grid = {f.s_start, f.s_stop, f.s_step};
    cfg.seeds.clear();
    for (std::size_t k = 0; k < f.seeds; ++k) cfg.seeds.push_back(k);
    cfg.noise = sharplad::NoiseSpec::parse(f.noise);
    cfg.output_dir = f.out;
    cfg.deterministic = f.deterministic;
    cfg.surface_step = f.surface_step;
    cfg.pairs = f.pairs;
    if (f.restarts > 0) cfg.solver.restarts = f.restarts;
    if (f.max_iters > 0) cfg.solver.max_iters = f.max_iters;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw sharplad::DomainError("cannot read config " + f.config);
        cfg.merge_json(json::parse(in));
    }
    cfg.validate();
    return cfg;
}

int report_checks(const std::vector<sharplad::CheckOutcome>& checks) {
    bool all = true;
    for (const auto& c : checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        all = all && c.passed;
    }
    return all ? kOk : kAcceptance;
}

int run(sharplad::Experiment ex, const Flags& f) {
    using sharplad::Experiment;
    const ExperimentConfig cfg = build_config(f, ex);
    switch (ex) {
        case Experiment::Threshold: {
            json j = json::object();
            for (const auto& r : sharplad::run_threshold(cfg)) j[sharplad::to_string(r.kind)] = sharplad::io::to_json(r);
            std::cout << j.dump(2) << '\n';
            return kOk;
        }
        case Experiment::Surface:
            for (auto kind : cfg.kinds) {
                const auto cells = sharplad::run_surface(cfg, kind);
                double lowest = 1.0;
                for (const auto& c : cells)
                    if (c.s_balance) lowest = std::min(lowest, *c.s_balance);
                std::cout << sharplad::to_string(kind) << ": " << cells.size() << " cells, minimum balance point "
                          << sharplad::io::fmt(lowest) << '\n';
            }
            return kOk;
        case Experiment::PhaseTransition: {
            std::vector<sharplad::PhaseTransitionResult> results;
            for (auto kind : cfg.kinds) {
                results.push_back(sharplad::run_phase_transition(cfg, kind));
                const auto& r = results.back();
                std::cout << sharplad::to_string(kind) << " (threshold " << sharplad::io::fmt(r.threshold.threshold) << ")\n";
                for (const auto& s : r.summary)
                    std::cout << "  s=" << sharplad::io::fmt(s.s) << "  mean relative error " << sharplad::io::fmt(s.mean)
                              << "  std " << sharplad::io::fmt(s.stddev) << '\n';
                std::cout << "  transition: " << (r.transition ? sharplad::io::fmt(*r.transition) : "none on grid") << '\n';
            }
            return kOk;
        }
        case Experiment::VerifyRob: return report_checks(sharplad::run_verify_rob(cfg));
        case Experiment::VerifyStability: return report_checks(sharplad::run_verify_stability(cfg));
        case Experiment::Dkw: return report_checks(sharplad::run_dkw(cfg, f.dkw));
        case Experiment::Width: {
            const bool sparse = f.width_set == "sparse";
            const auto est = sharplad::gaussian_width_estimate(
                sparse ? sharplad::WidthSet::Sparse : sharplad::WidthSet::FullSpace, cfg.n, f.trials, cfg.seeds.front(),
                f.sparsity);
            json j{{"set", f.width_set}, {"n", est.n}, {"sparsity", est.sparsity}, {"trials", est.trials},
                   {"value", est.value}};
            if (!cfg.output_dir.empty()) {
                std::filesystem::create_directories(cfg.output_dir);
                sharplad::io::write_json(cfg.output_dir / "width.json", j, cfg.deterministic);
            }
            std::cout << j.dump(2) << '\n';
            return kOk;
        }
    }
    return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
    using sharplad::Experiment;
    CLI::App app{"Sharp corruption thresholds for robust phase retrieval"};
    app.require_subcommand(1);
    Flags f;
    Experiment chosen = Experiment::Threshold;

    auto* threshold = app.add_subcommand("threshold", "sharp thresholds and their minimizing parameters");
    auto* surface = app.add_subcommand("surface", "balance point over the parameter grid");
    surface->add_option("--grid-step", f.surface_step, "grid spacing in (0, 0.25]");
    auto* transition = app.add_subcommand("transition", "relative error against the corruption fraction");
    transition->add_option("--restarts", f.restarts, "solver restarts");
    transition->add_option("--max-iters", f.max_iters, "solver iterations per restart");
    auto* rob = app.add_subcommand("verify-rob", "empirical worst-case margins");
    rob->add_option("--pairs", f.pairs, "signal pairs per cell");
    auto* stability = app.add_subcommand("verify-stability", "normalized discrepancy corridors");
    stability->add_option("--pairs", f.pairs, "signal pairs per seed");
    auto* dkw = app.add_subcommand("dkw", "quantile sandwich repetitions");
    dkw->add_option("--rho", f.dkw.rho, "correlation");
    dkw->add_option("--alpha", f.dkw.alpha, "norm ratio (amplitude)");
    dkw->add_option("--samples", f.dkw.samples, "samples per repetition");
    dkw->add_option("--eta", f.dkw.eta, "quantile level");
    dkw->add_option("--eps", f.dkw.eps, "band half-width");
    dkw->add_option("--reps", f.dkw.repetitions, "repetitions");
    auto* width = app.add_subcommand("width", "Monte-Carlo Gaussian width");
    width->add_option("--set", f.width_set, "full or sparse")->check(CLI::IsMember({"full", "sparse"}));
    width->add_option("--sparsity", f.sparsity, "nonzeros for the sparse set");
    width->add_option("--trials", f.trials, "Monte-Carlo trials");

    const std::pair<CLI::App*, Experiment> subs[] = {
        {threshold, Experiment::Threshold},   {surface, Experiment::Surface},
        {transition, Experiment::PhaseTransition}, {rob, Experiment::VerifyRob},
        {stability, Experiment::VerifyStability}, {dkw, Experiment::Dkw},
        {width, Experiment::Width}};
    for (const auto& [sub, ex] : subs) {
        add_common(sub, f);
        sub->callback([&chosen, ex = ex] { chosen = ex; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    try {
        return run(chosen, f);
    } catch (const sharplad::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const sharplad::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
}

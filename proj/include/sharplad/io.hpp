#pragma once

// JSON and CSV encodings of results, plans and observations.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharplad/balance.hpp"
#include "sharplad/measure.hpp"
#include "sharplad/solver.hpp"

namespace sharplad::io {

using nlohmann::json;

inline json to_json(const BalanceArgmin& p) {
    json j{{"rho", p.rho}};
    j["alpha"] = p.alpha ? json(*p.alpha) : json(nullptr);
    return j;
}

inline BalanceArgmin argmin_from_json(const json& j) {
    BalanceArgmin p;
    p.rho = j.at("rho").get<double>();
    if (j.contains("alpha") && !j.at("alpha").is_null()) p.alpha = j.at("alpha").get<double>();
    return p;
}

inline json to_json(const ThresholdResult& r) {
    return json{{"kind", to_string(r.kind)},
                {"threshold", r.threshold},
                {"argmin", to_json(r.argmin)},
                {"tolerance", r.tolerance},
                {"grid_resolution", r.grid_resolution},
                {"min_balance_at_threshold", r.min_balance_at_threshold}};
}

inline ThresholdResult threshold_from_json(const json& j) {
    ThresholdResult r;
    r.kind = parse_kind(j.at("kind").get<std::string>());
    r.threshold = j.at("threshold").get<double>();
    r.argmin = argmin_from_json(j.at("argmin"));
    r.tolerance = j.at("tolerance").get<double>();
    r.grid_resolution = j.at("grid_resolution").get<double>();
    r.min_balance_at_threshold = j.value("min_balance_at_threshold", 0.0);
    return r;
}

/// Keeps at most `points` entries, always including the first and last.
inline Vec downsample(const Vec& trace, std::size_t points) {
    if (trace.size() <= points || points < 2) return trace;
    Vec out;
    out.reserve(points);
    const double stride = static_cast<double>(trace.size() - 1) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k)
        out.push_back(trace[static_cast<std::size_t>(std::llround(stride * static_cast<double>(k)))]);
    return out;
}

inline json to_json(const SolveReport& r) {
    json j{{"estimate", r.estimate.vec()},
           {"objective", r.objective},
           {"iterations", r.iterations},
           {"restart_index", r.restart_index},
           {"diverged_runs", r.diverged_runs},
           {"objective_trace", downsample(r.objective_trace, 200)}};
    j["dist1_to_truth"] = r.dist1_to_truth ? json(*r.dist1_to_truth) : json(nullptr);
    j["dist2_to_truth"] = r.dist2_to_truth ? json(*r.dist2_to_truth) : json(nullptr);
    return j;
}

/// One audit record: enough to replay an adversarial observation.
inline json audit_record(const AdversaryPlan& plan, std::uint64_t ensemble_seed, std::uint64_t signal_seed) {
    return json{{"kind", to_string(plan.kind)},
                {"ensemble_seed", ensemble_seed},
                {"signal_seed", signal_seed},
                {"s", plan.fraction},
                {"support", plan.support},
                {"decoy", plan.x_star.vec()},
                {"params", to_json(plan.params_used)}};
}

inline void append_jsonl(const std::filesystem::path& path, const json& record) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << record.dump() << '\n';
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

/// Shortest text that reads back to the same double.
inline std::string fmt(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(17) << v;
    double back = 0.0;
    for (int digits = 6; digits < 17; ++digits) {
        std::ostringstream trial;
        trial.imbue(std::locale::classic());
        trial << std::setprecision(digits) << v;
        std::istringstream(trial.str()) >> back;
        if (back == v) return trial.str();
    }
    return os.str();
}

/// CSV writer with a header row and an optional leading timestamp comment.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header, bool deterministic)
        : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path.string());
        if (!deterministic) out_ << "# generated " << utc_timestamp() << '\n';
        row(header);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, json j, bool deterministic) {
    if (!deterministic) j["generated"] = utc_timestamp();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace sharplad::io

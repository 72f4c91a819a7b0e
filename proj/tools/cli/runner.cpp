// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0

#include "cli/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <sstream>

#include "reflectmc/paths.hpp"
#include "reflectmc/stopping.hpp"
#include "reflectmc/verify.hpp"

namespace reflectmc::cli {

namespace {

using Json = nlohmann::ordered_json;

StoppingRule make_rule(const ExperimentConfig& c) {
    if (c.rule == "never") return never_rule();
    if (c.rule == "immediate") return immediate_rule();
    if (c.rule == "first-hitting") return first_hitting_rule(*c.level);
    return final_value_peek_rule();
}

CausalEvent make_event(const ExperimentConfig& c) {
    if (c.event == "above") return above_level_event(*c.level);
    if (c.event == "running-max") return running_max_event(*c.level);
    if (c.event == "sure") return sure_event();
    return final_value_event();
}

IncrementFunctional make_functional(const ExperimentConfig& c) {
    if (c.functional == "clamped-linear") return clamped_linear_functional(c.coeffs, *c.bound);
    return cosine_functional(c.coeffs);
}

Json metrics_json(const TestReport& report) {
    Json out = Json::object();
    for (const auto& [name, value] : report.metrics) out[name] = value;
    return out;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

struct Outcome {
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    Json metrics = Json::object();
    Json extra = Json::object();
};

Outcome from_report(const TestReport& r) { return {r.statistic, r.threshold, r.pass, metrics_json(r), Json::object()}; }

Outcome run_dyadic(const ExperimentConfig& c, const GridHandle& grid) {
    const auto reports = dyadic_convergence_study(grid, make_rule(c), LinearFunctionalSpec(c.times, c.coeffs),
                                                  c.dyadic_levels, c.paths, c.seed, c.z);
    Outcome out;
    out.threshold = c.z;
    out.pass = true;
    std::size_t passed = 0;
    Json levels = Json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const TestReport& r = reports[i];
        out.statistic = std::max(out.statistic, r.statistic);
        out.pass = out.pass && r.pass;
        passed += r.pass ? 1 : 0;
        Json level = Json::object();
        level["j"] = c.dyadic_levels[i];
        level["statistic"] = r.statistic;
        level["threshold"] = r.threshold;
        level["pass"] = r.pass;
        level["metrics"] = metrics_json(r);
        levels.push_back(std::move(level));
    }
    out.metrics["levels_passed"] = passed;
    out.metrics["levels_total"] = reports.size();
    out.extra["levels"] = std::move(levels);
    return out;
}

Outcome run_audit(const ExperimentConfig& c, const GridHandle& grid) {
    const StoppingRule rule = make_rule(c);
    std::size_t failures = 0;
    Json counterexample;
    for (std::size_t i = 0; i < c.paths; ++i) {
        const StreamSpec stream{c.seed, i};
        const SamplePath path = generate_path(grid, stream);
        const AuditReport audit = causality_audit(rule, path, stream, *c.trials);
        if (audit.passed) continue;
        if (failures == 0) {
            const auto& cx = *audit.counterexample;
            counterexample = Json::object();
            counterexample["path_index"] = i;
            counterexample["trial"] = cx.trial;
            counterexample["cut_index"] = cx.cut_index;
            counterexample["cut_time"] = (*grid)[cx.cut_index];
            counterexample["original"] = to_string(cx.original);
            counterexample["perturbed"] = to_string(cx.perturbed);
        }
        ++failures;
    }
    Outcome out;
    out.statistic = static_cast<double>(failures);
    out.threshold = 0.0;
    out.pass = failures == 0;
    out.metrics["paths_audited"] = c.paths;
    out.metrics["trials_per_path"] = *c.trials;
    out.metrics["failing_paths"] = failures;
    if (failures > 0) out.extra["counterexample"] = std::move(counterexample);
    return out;
}

Outcome dispatch(const ExperimentConfig& c) {
    const GridHandle grid = share(uniform_grid(c.horizon, c.steps));
    switch (c.experiment) {
        case ExperimentKind::reflection_char:
            return from_report(reflection_char_test(grid, make_rule(c), LinearFunctionalSpec(c.times, c.coeffs),
                                                    c.paths, c.seed, c.z));
        case ExperimentKind::hitting_cdf:
            return from_report(hitting_time_cdf_test(*c.level, *c.time, grid, c.paths, c.seed, *c.mode, c.z));
        case ExperimentKind::running_max:
            return from_report(running_max_ks_test(*c.time, grid, c.paths, c.seed, *c.mode, *c.ks_threshold));
        case ExperimentKind::independence:
            return from_report(increment_independence_test(grid, *c.split_time, c.future_times,
                                                           make_functional(c), make_event(c), c.paths,
                                                           c.seed, c.z));
        case ExperimentKind::dyadic_study:
            return run_dyadic(c, grid);
        case ExperimentKind::causality_audit:
            return run_audit(c, grid);
    }
    throw std::logic_error("unhandled experiment kind");
}

std::string csv_number(const Json& value) {
    if (value.is_null()) return "inf";
    if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
    if (value.is_number_float()) return format_double(value.get<double>());
    if (value.is_string()) return value.get<std::string>();
    return value.dump();
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome = dispatch(config);
    const auto stop = std::chrono::steady_clock::now();

    Json report = Json::object();
    report["experiment"] = std::string(to_string(config.experiment));
    report["config"] = config_to_json(config);
    report["statistic"] = outcome.statistic;
    report["threshold"] = outcome.threshold;
    report["pass"] = outcome.pass;
    report["n"] = config.paths;
    report["seed"] = config.seed;
    report["metrics"] = std::move(outcome.metrics);
    for (auto& [key, value] : outcome.extra.items()) report[key] = value;
    report["elapsed_ms"] = std::chrono::duration<double, std::milli>(stop - start).count();
    report["timestamp"] = utc_timestamp();
    return {std::move(report), outcome.pass};
}

Json strip_volatile(Json report) {
    report.erase("elapsed_ms");
    report.erase("timestamp");
    return report;
}

std::string render_report(const Json& report, OutputFormat format) {
    if (format == OutputFormat::json) return report.dump(2) + "\n";

    std::ostringstream out;
    for (const auto& [key, value] : report.at("config").items()) {
        std::string text;
        if (value.is_array()) {
            for (std::size_t i = 0; i < value.size(); ++i) text += (i ? "," : "") + csv_number(value[i]);
        } else {
            text = csv_number(value);
        }
        out << "# " << key << " = " << text << "\n";
    }

    // One row for the whole run, or one per dyadic level.
    std::vector<std::pair<std::string, const Json*>> rows;
    if (report.contains("levels")) {
        for (const auto& level : report.at("levels")) rows.emplace_back("j=" + level.at("j").dump(), &level);
    } else {
        rows.emplace_back("all", &report);
    }
    std::vector<std::string> metric_keys;
    for (const auto& [key, value] : rows.front().second->at("metrics").items()) metric_keys.push_back(key);

    out << "experiment,row,statistic,threshold,pass,n,seed";
    for (const auto& key : metric_keys) out << "," << key;
    out << ",elapsed_ms,timestamp\n";
    for (const auto& [label, row] : rows) {
        out << report.at("experiment").get<std::string>() << "," << label << "," << csv_number(row->at("statistic"))
            << "," << csv_number(row->at("threshold")) << "," << csv_number(row->at("pass")) << ","
            << report.at("n").dump() << "," << report.at("seed").dump();
        for (const auto& key : metric_keys) out << "," << csv_number(row->at("metrics").at(key));
        out << "," << csv_number(report.at("elapsed_ms")) << "," << report.at("timestamp").get<std::string>() << "\n";
    }
    return out.str();
}

std::string summarize(const Json& report) {
    std::ostringstream out;
    out << report.at("experiment").get<std::string>() << ": " << (report.at("pass").get<bool>() ? "PASS" : "FAIL")
        << " statistic=" << csv_number(report.at("statistic")) << " threshold=" << csv_number(report.at("threshold"))
        << " n=" << report.at("n").dump() << " seed=" << report.at("seed").dump();
    return out.str();
}

std::string default_output_path(const ExperimentConfig& config) {
    const char* dir = std::getenv(kOutputDirEnv);
    if (dir == nullptr || *dir == '\0') return {};
    std::string path(dir);
    if (path.back() != '/') path += '/';
    return path + std::string(to_string(config.experiment)) + "_" + std::to_string(config.seed) + "." +
           std::string(to_string(config.format));
}

}  // namespace reflectmc::cli

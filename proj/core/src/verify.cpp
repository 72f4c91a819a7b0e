// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0

#include "reflectmc/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "reflectmc/normal.hpp"
#include "reflectmc/parallel.hpp"
#include "reflectmc/statistics.hpp"

namespace reflectmc {

namespace {

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

std::string format_number(double value) {
    std::ostringstream out;
    out.precision(17);
    out << value;
    return out.str();
}

std::string format_list(std::span<const double> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ",";
        out += format_number(values[i]);
    }
    return out;
}

ConfigEcho grid_echo(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed) {
    return {{"horizon", format_number(grid.horizon())},
            {"steps", std::to_string(grid.size() - 1)},
            {"paths", std::to_string(n_paths)},
            {"seed", std::to_string(seed)}};
}

std::size_t require_grid_index(const TimeGrid& grid, double t, const char* what) {
    const auto idx = grid.index_of(t);
    if (!idx) {
        throw std::invalid_argument(std::string(what) + " " + format_number(t) +
                                    " is not a grid time");
    }
    return *idx;
}

}  // namespace

double TestReport::metric(std::string_view key) const {
    for (const auto& [name, value] : metrics) {
        if (name == key) {
            return value;
        }
    }
    throw std::out_of_range("TestReport: no metric '" + std::string(key) + "'");
}

TestReport make_report(std::string name, double statistic, double threshold,
                       std::size_t sample_size, ConfigEcho config,
                       std::vector<std::pair<std::string, double>> metrics) {
    TestReport report;
    report.name = std::move(name);
    report.statistic = statistic;
    report.threshold = threshold;
    report.pass = statistic <= threshold;
    report.sample_size = sample_size;
    report.config = std::move(config);
    report.metrics = std::move(metrics);
    return report;
}

double z_score(double difference, double std_error) noexcept {
    const double magnitude = std::fabs(difference);
    if (magnitude == 0.0) {
        return 0.0;
    }
    if (std_error == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return magnitude / std_error;
}

// ---------------------------------------------------------------------------

double functional_variance(const LinearFunctionalSpec& spec) {
    const auto t = spec.times();
    const auto l = spec.coeffs();
    CompensatedSum variance;
    for (std::size_t j = 0; j < spec.size(); ++j) {
        for (std::size_t k = 0; k < spec.size(); ++k) {
            variance.add(l[j] * l[k] * std::min(t[j], t[k]));
        }
    }
    return variance.value();
}

double analytic_char_fn(const LinearFunctionalSpec& spec) {
    return std::exp(-0.5 * functional_variance(spec));
}

std::vector<double> reflected_functional_samples(const GridHandle& grid, const StoppingRule& rule,
                                                 const LinearFunctionalSpec& spec,
                                                 std::size_t n_paths, std::uint64_t seed) {
    const ResolvedFunctional functional = resolve(*grid, spec);
    std::vector<double> samples(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        const SamplePath path = generate_path(grid, StreamSpec{seed, i});
        const StopDecision stop = evaluate_rule(rule, path);
        samples[i] = linear_functional(reflect(path, stop), functional);
    });
    return samples;
}

TestReport reflection_char_test(const GridHandle& grid, const StoppingRule& rule,
                                const LinearFunctionalSpec& spec, std::size_t n_paths,
                                std::uint64_t seed, double z) {
    if (n_paths < 1000) {
        throw std::invalid_argument("reflection_char_test: n_paths must be at least 1000");
    }
    if (!(z > 0.0)) {
        throw std::invalid_argument("reflection_char_test: z must be positive");
    }
    const std::vector<double> samples =
        reflected_functional_samples(grid, rule, spec, n_paths, seed);
    const CharFnEstimate phi = empirical_char_fn(samples);
    const double target = analytic_char_fn(spec);

    const double statistic = std::max(z_score(phi.re - target, phi.se_re), z_score(phi.im, phi.se_im));
    ConfigEcho config = grid_echo(*grid, n_paths, seed);
    config.emplace_back("rule", rule.name());
    config.emplace_back("times", format_list(spec.times()));
    config.emplace_back("coeffs", format_list(spec.coeffs()));
    config.emplace_back("z", format_number(z));
    return make_report("reflection-char", statistic, z, n_paths, std::move(config),
                       {{"estimate_re", phi.re},
                        {"estimate_im", phi.im},
                        {"se_re", phi.se_re},
                        {"se_im", phi.se_im},
                        {"analytic", target},
                        {"distance", std::hypot(phi.re - target, phi.im)}});
}

// ---------------------------------------------------------------------------

std::string_view to_string(MonitoringMode mode) noexcept {
    return mode == MonitoringMode::raw ? "raw" : "bridge-corrected";
}

MonitoringMode parse_monitoring_mode(std::string_view text) {
    if (text == "raw") return MonitoringMode::raw;
    if (text == "bridge-corrected") return MonitoringMode::bridge_corrected;
    throw std::invalid_argument("unknown monitoring mode '" + std::string(text) +
                                "' (expected raw or bridge-corrected)");
}

double hitting_probability(double level, double t) noexcept {
    return 2.0 * normal_cdf(-level / std::sqrt(t));
}

double bridge_crossing_probability(double a, double b, double level, double dt) noexcept {
    if (a >= level || b >= level) {
        return 1.0;
    }
    return std::exp(-2.0 * (level - a) * (level - b) / dt);
}

double crossing_probability(const SamplePath& path, double level, std::size_t end_index,
                            MonitoringMode mode) {
    if (end_index >= path.size()) {
        throw std::out_of_range("crossing_probability: end index outside path");
    }
    for (std::size_t k = 0; k <= end_index; ++k) {
        if (path[k] >= level) {
            return 1.0;
        }
    }
    if (mode == MonitoringMode::raw) {
        return 0.0;
    }
    // log of the no-crossing probability, accumulated for accuracy.
    double log_survival = 0.0;
    for (std::size_t k = 0; k < end_index; ++k) {
        const double p = bridge_crossing_probability(path[k], path[k + 1], level, path.grid().spacing(k));
        log_survival += std::log1p(-p);
    }
    return -std::expm1(log_survival);
}

double raw_monitoring_bias(double level, double t, double max_dt) noexcept {
    return hitting_probability(level, t) -
           hitting_probability(level + kDiscreteMonitoringShift * std::sqrt(max_dt), t);
}

TestReport hitting_time_cdf_test(double level, double t, const GridHandle& grid,
                                 std::size_t n_paths, std::uint64_t seed, MonitoringMode mode,
                                 double z) {
    if (!(level > 0.0) || !std::isfinite(level)) {
        throw std::invalid_argument("hitting_time_cdf_test: level must be positive");
    }
    if (n_paths < 2) {
        throw std::invalid_argument("hitting_time_cdf_test: need at least 2 paths");
    }
    const std::size_t end = require_grid_index(*grid, t, "hitting_time_cdf_test: t");
    if (end == 0) {
        throw std::invalid_argument("hitting_time_cdf_test: t must be positive");
    }

    std::vector<double> contributions(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        const SamplePath path = generate_path(grid, StreamSpec{seed, i});
        contributions[i] = crossing_probability(path, level, end, mode);
    });
    const MeanEstimate empirical = estimate_mean(contributions);
    const double analytic = hitting_probability(level, t);
    const double binomial_se = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(n_paths));
    double max_dt = 0.0;
    for (std::size_t k = 0; k < end; ++k) {
        max_dt = std::max(max_dt, grid->spacing(k));
    }
    const double allowance = mode == MonitoringMode::raw ? raw_monitoring_bias(level, t, max_dt) : 0.0;

    ConfigEcho config = grid_echo(*grid, n_paths, seed);
    config.emplace_back("level", format_number(level));
    config.emplace_back("time", format_number(t));
    config.emplace_back("mode", std::string(to_string(mode)));
    config.emplace_back("z", format_number(z));
    return make_report("hitting-cdf", std::fabs(empirical.mean - analytic),
                       z * binomial_se + allowance, n_paths, std::move(config),
                       {{"empirical", empirical.mean},
                        {"analytic", analytic},
                        {"binomial_se", binomial_se},
                        {"sample_se", empirical.std_error},
                        {"bias_allowance", allowance}});
}

double running_max_cdf(double x, double t) noexcept {
    if (!(x > 0.0)) {
        return 0.0;
    }
    // 2 Phi(y) - 1 = erf(y / sqrt 2)
    return std::erf(x / std::sqrt(2.0 * t));
}

double sample_bridge_maximum(double a, double b, double dt, double u) noexcept {
    const double gap = b - a;
    return 0.5 * (a + b + std::sqrt(gap * gap - 2.0 * dt * std::log(u)));
}

double path_maximum(const SamplePath& path, std::size_t end_index, MonitoringMode mode,
                    RandomStream& bridge_draws) {
    if (end_index >= path.size()) {
        throw std::out_of_range("path_maximum: end index outside path");
    }
    double maximum = path[0];
    if (mode == MonitoringMode::raw) {
        for (std::size_t k = 1; k <= end_index; ++k) {
            maximum = std::max(maximum, path[k]);
        }
        return maximum;
    }
    for (std::size_t k = 0; k < end_index; ++k) {
        const double bridge_max =
            sample_bridge_maximum(path[k], path[k + 1], path.grid().spacing(k), bridge_draws.uniform());
        maximum = std::max(maximum, bridge_max);
    }
    return maximum;
}

double calibrated_ks_threshold(std::size_t n) noexcept {
    return 1.5 * kKsNullQuantile99 / std::sqrt(static_cast<double>(n));
}

double raw_running_max_allowance(double t, double max_dt) noexcept {
    // The CDF is concave on [0, inf), so a shift is largest at x = 0.
    return running_max_cdf(kDiscreteMonitoringShift * std::sqrt(max_dt), t);
}

TestReport running_max_ks_test(double t, const GridHandle& grid, std::size_t n_paths,
                               std::uint64_t seed, MonitoringMode mode, double ks_threshold) {
    if (n_paths < 1) {
        throw std::invalid_argument("running_max_ks_test: need at least 1 path");
    }
    if (!(ks_threshold > 0.0)) {
        throw std::invalid_argument("running_max_ks_test: threshold must be positive");
    }
    const std::size_t end = require_grid_index(*grid, t, "running_max_ks_test: t");
    if (end == 0) {
        throw std::invalid_argument("running_max_ks_test: t must be positive");
    }

    std::vector<double> maxima(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        const StreamSpec stream{seed, i};
        const SamplePath path = generate_path(grid, stream);
        RandomStream bridge_draws(stream, kBridgeLane);
        maxima[i] = path_maximum(path, end, mode, bridge_draws);
    });
    const double ks = ks_statistic(maxima, [t](double x) { return running_max_cdf(x, t); });

    double max_dt = 0.0;
    for (std::size_t k = 0; k < end; ++k) {
        max_dt = std::max(max_dt, grid->spacing(k));
    }
    const double allowance = mode == MonitoringMode::raw ? raw_running_max_allowance(t, max_dt) : 0.0;

    ConfigEcho config = grid_echo(*grid, n_paths, seed);
    config.emplace_back("time", format_number(t));
    config.emplace_back("mode", std::string(to_string(mode)));
    config.emplace_back("ks_threshold", format_number(ks_threshold));
    return make_report("running-max", ks, ks_threshold + allowance, n_paths, std::move(config),
                       {{"ks", ks}, {"ks_threshold", ks_threshold}, {"raw_allowance", allowance}});
}

TestReport running_max_ks_test(double t, const GridHandle& grid, std::size_t n_paths,
                               std::uint64_t seed, MonitoringMode mode) {
    return running_max_ks_test(t, grid, n_paths, seed, mode, calibrated_ks_threshold(n_paths));
}

// ---------------------------------------------------------------------------

namespace {

double weighted_sum(std::span<const double> coeffs, std::span<const double> increments) {
    if (coeffs.size() != increments.size()) {
        throw std::invalid_argument("increment functional: expected " +
                                    std::to_string(coeffs.size()) + " increments, got " +
                                    std::to_string(increments.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        sum += coeffs[i] * increments[i];
    }
    return sum;
}

}  // namespace

IncrementFunctional clamped_linear_functional(std::vector<double> coeffs, double bound) {
    if (!(bound > 0.0)) {
        throw std::invalid_argument("clamped_linear_functional: bound must be positive");
    }
    std::string name = "clamped-linear(" + format_list(coeffs) + "; " + format_number(bound) + ")";
    return {std::move(name), [coeffs = std::move(coeffs), bound](std::span<const double> dB) {
                return std::clamp(weighted_sum(coeffs, dB), -bound, bound);
            }};
}

IncrementFunctional cosine_functional(std::vector<double> coeffs) {
    std::string name = "cosine(" + format_list(coeffs) + ")";
    return {std::move(name), [coeffs = std::move(coeffs)](std::span<const double> dB) {
                return std::cos(weighted_sum(coeffs, dB));
            }};
}

IncrementFunctional constant_functional(double value) {
    return {"constant(" + format_number(value) + ")",
            [value](std::span<const double>) { return value; }};
}

CausalEvent above_level_event(double level) {
    return {"above(" + format_number(level) + ")",
            [level](const SamplePath& path, std::size_t s) { return path[s] > level; }};
}

CausalEvent running_max_event(double level) {
    return {"running-max-above(" + format_number(level) + ")",
            [level](const SamplePath& path, std::size_t s) {
                for (std::size_t k = 0; k <= s; ++k) {
                    if (path[k] >= level) return true;
                }
                return false;
            }};
}

CausalEvent sure_event() {
    return {"sure", [](const SamplePath&, std::size_t) { return true; }};
}

CausalEvent final_value_event() {
    return {"final-value-positive",
            [](const SamplePath& path, std::size_t) { return path[path.size() - 1] > 0.0; }};
}

StoppingRule event_rule(CausalEvent event, std::size_t s_index) {
    auto holds = event.holds;
    return StoppingRule("event(" + event.name + " @ " + std::to_string(s_index) + ")",
                        [holds, s_index](const SamplePath& path, std::size_t k) {
                            return k >= s_index && holds(path, s_index);
                        });
}

TestReport increment_independence_test(const GridHandle& grid, double s,
                                       const std::vector<double>& future_times,
                                       const IncrementFunctional& f, const CausalEvent& event,
                                       std::size_t n_paths, std::uint64_t seed, double z) {
    if (n_paths < 2) {
        throw std::invalid_argument("increment_independence_test: need at least 2 paths");
    }
    if (future_times.empty()) {
        throw std::invalid_argument("increment_independence_test: no future times");
    }
    const std::size_t s_index = require_grid_index(*grid, s, "increment_independence_test: s");
    std::vector<std::size_t> future;
    for (double t : future_times) {
        if (!(t > s)) {
            throw std::invalid_argument("increment_independence_test: future time " +
                                        format_number(t) + " is not after s");
        }
        future.push_back(require_grid_index(*grid, t, "increment_independence_test: future time"));
    }

    // Audit the event on a few independent paths before trusting it.
    constexpr std::size_t kAuditPaths = 16;
    constexpr std::size_t kAuditTrials = 16;
    const StoppingRule as_rule = event_rule(event, s_index);
    for (std::size_t i = 0; i < kAuditPaths; ++i) {
        const StreamSpec stream{seed ^ 0xA5A5A5A5A5A5A5A5ull, i};
        const SamplePath path = generate_path(grid, stream);
        const AuditReport audit = causality_audit(as_rule, path, stream, kAuditTrials);
        if (!audit.passed) {
            const auto& cx = *audit.counterexample;
            throw CausalityError("event '" + event.name + "' depends on values after s: resampling after index " +
                                 std::to_string(cx.cut_index) + " changed the decision from " +
                                 to_string(cx.original) + " to " + to_string(cx.perturbed));
        }
    }

    std::vector<double> joint(n_paths), v(n_paths), indicator(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        const SamplePath path = generate_path(grid, StreamSpec{seed, i});
        std::vector<double> increments(future.size());
        for (std::size_t m = 0; m < future.size(); ++m) {
            increments[m] = path[future[m]] - path[s_index];
        }
        const double value = f.evaluate(increments);
        const double in_event = event.holds(path, s_index) ? 1.0 : 0.0;
        v[i] = value;
        indicator[i] = in_event;
        joint[i] = value * in_event;
    });

    const double n = static_cast<double>(n_paths);
    const double mean_joint = chunked_sum(joint) / n;
    const double mean_v = chunked_sum(v) / n;
    const double p = chunked_sum(indicator) / n;
    const double difference = mean_joint - mean_v * p;

    // Delta method: gradient of (mu_W, mu_V, p) -> mu_W - mu_V p.
    const std::array<double, 3> gradient{1.0, -p, -mean_v};
    const std::array<const std::vector<double>*, 3> columns{&joint, &v, &indicator};
    const std::array<double, 3> means{mean_joint, mean_v, p};
    std::vector<double> projected(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        double g = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            g += gradient[c] * ((*columns[c])[i] - means[c]);
        }
        projected[i] = g * g;
    }
    const double variance = chunked_sum(projected) / (n - 1.0);
    const double se = std::sqrt(variance / n);

    ConfigEcho config = grid_echo(*grid, n_paths, seed);
    config.emplace_back("split_time", format_number(s));
    config.emplace_back("future_times", format_list(future_times));
    config.emplace_back("functional", f.name);
    config.emplace_back("event", event.name);
    config.emplace_back("z", format_number(z));
    return make_report("independence", z_score(difference, se), z, n_paths, std::move(config),
                       {{"difference", difference},
                        {"se", se},
                        {"mean_v_times_indicator", mean_joint},
                        {"mean_v", mean_v},
                        {"event_probability", p}});
}

// ---------------------------------------------------------------------------

void check_dyadic_compatible(const TimeGrid& grid, std::span<const int> j_values) {
    const auto times = grid.times();
    for (int j : j_values) {
        // Every realizable stopping time (a grid time, or infinity) must round
        // to a grid time or past the horizon.
        auto check = [&](double t) {
            const double rounded = dyadic_approximation(t, j);
            if (rounded <= grid.horizon() && !grid.index_of(rounded)) {
                throw std::invalid_argument("grid does not resolve dyadic level " + std::to_string(j) +
                                            ": " + format_number(t) + " rounds to " +
                                            format_number(rounded) + ", which is not a grid time");
            }
        };
        for (double t : times) {
            check(t);
        }
        check(std::numeric_limits<double>::infinity());
    }
}

std::vector<TestReport> dyadic_convergence_study(const GridHandle& grid, const StoppingRule& rule,
                                                 const LinearFunctionalSpec& spec,
                                                 std::span<const int> j_values,
                                                 std::size_t n_paths, std::uint64_t seed, double z) {
    check_dyadic_compatible(*grid, j_values);
    std::vector<TestReport> reports;
    reports.reserve(j_values.size());
    for (int j : j_values) {
        TestReport report =
            reflection_char_test(grid, dyadic_rounded_rule(rule, j), spec, n_paths, seed, z);
        report.name = "dyadic-study[j=" + std::to_string(j) + "]";
        report.metrics.emplace_back("level", static_cast<double>(j));
        reports.push_back(std::move(report));
    }
    return reports;
}

}  // namespace reflectmc

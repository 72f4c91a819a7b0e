// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Statistical verification that reflected Brownian motion is again a
// standard Brownian motion: characteristic-function tests against the exact
// Gaussian value, the first-passage and running-maximum laws, conditional
// independence of future increments, and dyadic rounding of stopping times.
//
// Every test simulates path i from StreamSpec{seed, i}, so results are a pure
// function of the arguments regardless of thread count.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reflectmc/paths.hpp"
#include "reflectmc/reflection.hpp"
#include "reflectmc/stopping.hpp"

namespace reflectmc {

/// Outcome of one statistical check. pass <=> statistic <= threshold.
struct TestReport {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::size_t sample_size = 0;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::pair<std::string, double>> metrics;

    /// Value of a named metric; throws std::out_of_range if absent.
    double metric(std::string_view key) const;
};

TestReport make_report(std::string name, double statistic, double threshold,
                       std::size_t sample_size,
                       std::vector<std::pair<std::string, std::string>> config,
                       std::vector<std::pair<std::string, double>> metrics);

/// Default confidence multiplier for z-tests.
inline constexpr double kDefaultZ = 4.0;

/// |difference| / se, with 0/0 read as 0 and x/0 as +infinity.
double z_score(double difference, double std_error) noexcept;

// ---------------------------------------------------------------------------
// Characteristic functions

/// sum_{j,k} l_j l_k min(t_j, t_k).
double functional_variance(const LinearFunctionalSpec& spec);

/// exp(-variance / 2): E[exp(iX)] for the Gaussian X = sum_j l_j B(t_j).
double analytic_char_fn(const LinearFunctionalSpec& spec);

/// X^T samples: path i from {seed, i}, stopped by `rule`, reflected, then
/// evaluated with `spec`. Throws std::invalid_argument if a spec time is off
/// the grid.
std::vector<double> reflected_functional_samples(const GridHandle& grid, const StoppingRule& rule,
                                                 const LinearFunctionalSpec& spec,
                                                 std::size_t n_paths, std::uint64_t seed);

/// Passes iff |re - analytic| <= z se_re and |im| <= z se_im for the
/// empirical characteristic function of X^T. The statistic is the larger of
/// the two z-scores and the threshold is z. Requires n_paths >= 1000.
TestReport reflection_char_test(const GridHandle& grid, const StoppingRule& rule,
                                const LinearFunctionalSpec& spec, std::size_t n_paths,
                                std::uint64_t seed, double z = kDefaultZ);

// ---------------------------------------------------------------------------
// First passage and running maximum

enum class MonitoringMode { raw, bridge_corrected };

std::string_view to_string(MonitoringMode mode) noexcept;
/// Accepts "raw" and "bridge-corrected"; throws std::invalid_argument.
MonitoringMode parse_monitoring_mode(std::string_view text);

/// P(tau_x <= t) = 2 P(B_t >= x) for x > 0.
double hitting_probability(double level, double t) noexcept;

/// Probability that a Brownian bridge from a to b over a step of width dt
/// reaches `level`: 1 if either endpoint is at or above it, otherwise
/// exp(-2 (level - a)(level - b) / dt).
double bridge_crossing_probability(double a, double b, double level, double dt) noexcept;

/// Per-path crossing probability of an upward `level` on [0, times[end_index]].
/// Raw mode: indicator of a grid crossing. Bridge-corrected mode: 1 if the
/// grid crosses, else 1 - prod_k (1 - p_k) over the bridge probabilities.
double crossing_probability(const SamplePath& path, double level, std::size_t end_index,
                            MonitoringMode mode);

/// Offset beta sqrt(dt) by which discrete monitoring effectively raises a
/// barrier, beta = -zeta(1/2) / sqrt(2 pi) (Broadie, Glasserman and Kou).
inline constexpr double kDiscreteMonitoringShift = 0.5825971579390106;

/// Predicted undershoot of raw grid monitoring:
/// hitting_probability(x, t) - hitting_probability(x + beta sqrt(max_dt), t).
double raw_monitoring_bias(double level, double t, double max_dt) noexcept;

/// Estimates P(tau_x <= t) and compares with 2(1 - Phi(x / sqrt t)).
/// Passes iff |empirical - analytic| <= z * sqrt(p(1-p)/n) + allowance, where
/// p is the analytic value and allowance = raw_monitoring_bias in raw mode,
/// 0 in bridge-corrected mode. Throws std::invalid_argument if t is not a
/// grid time or x <= 0.
TestReport hitting_time_cdf_test(double level, double t, const GridHandle& grid,
                                 std::size_t n_paths, std::uint64_t seed, MonitoringMode mode,
                                 double z = kDefaultZ);

/// P(max_{s<=t} B_s <= x) = 2 Phi(x / sqrt t) - 1 for x >= 0, else 0.
double running_max_cdf(double x, double t) noexcept;

/// Exact draw of the maximum of a Brownian bridge from a to b over width dt,
/// by inverting its CDF at u in (0, 1).
double sample_bridge_maximum(double a, double b, double dt, double u) noexcept;

/// Maximum of the path on [0, times[end_index]]. Raw: grid maximum.
/// Bridge-corrected: maximum of exact per-increment bridge maxima, one
/// uniform from `bridge_draws` per increment.
double path_maximum(const SamplePath& path, std::size_t end_index, MonitoringMode mode,
                    RandomStream& bridge_draws);

/// 99th percentile of sqrt(n) * D_n for the one-sample KS distance under
/// the null, frozen from the null-calibration oracle
/// (tests/oracles/ks_null_calibration.cpp, n = 1e5, 2000 replications).
inline constexpr double kKsNullQuantile99 = 1.6503;

/// 1.5 * kKsNullQuantile99 / sqrt(n).
double calibrated_ks_threshold(std::size_t n) noexcept;

/// sup_x |F(x + beta sqrt(max_dt)) - F(x)| for the running-max law: the KS
/// widening allowed for raw grid maxima.
double raw_running_max_allowance(double t, double max_dt) noexcept;

/// KS distance between per-path maxima on [0, t] and 2 Phi(x / sqrt t) - 1.
/// Passes iff KS <= ks_threshold (+ raw_running_max_allowance in raw mode).
/// Throws std::invalid_argument if t is not a grid time.
TestReport running_max_ks_test(double t, const GridHandle& grid, std::size_t n_paths,
                               std::uint64_t seed, MonitoringMode mode, double ks_threshold);
TestReport running_max_ks_test(double t, const GridHandle& grid, std::size_t n_paths,
                               std::uint64_t seed, MonitoringMode mode);

// ---------------------------------------------------------------------------
// Independence of future increments

/// Bounded test function of the increments B(t_i) - B(s).
struct IncrementFunctional {
    std::string name;
    std::function<double(std::span<const double>)> evaluate;
};

/// clamp(sum_i c_i dB_i, -bound, bound).
IncrementFunctional clamped_linear_functional(std::vector<double> coeffs, double bound = 1.0);
/// cos(sum_i c_i dB_i).
IncrementFunctional cosine_functional(std::vector<double> coeffs);
IncrementFunctional constant_functional(double value);

/// Event determined by the path up to grid index s_index.
struct CausalEvent {
    std::string name;
    std::function<bool(const SamplePath&, std::size_t s_index)> holds;
};

/// {B_s > level}.
CausalEvent above_level_event(double level = 0.0);
/// {max_{u <= s} B_u >= level}.
CausalEvent running_max_event(double level);
/// The sure event.
CausalEvent sure_event();
/// Anti-causal fixture: {B at the grid horizon > 0}.
CausalEvent final_value_event();

/// Stopping rule "stop at s_index if the event holds, otherwise never".
/// Causal iff the event is.
StoppingRule event_rule(CausalEvent event, std::size_t s_index);

/// Thrown when an event or rule fails its causality audit.
class CausalityError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Estimates E[V 1_A] - E[V] P(A) with V = f(B(t_1) - B(s), ...) and passes
/// iff it is within z delta-method standard errors of 0. The event is audited
/// for causality first (CausalityError on failure). Throws
/// std::invalid_argument if s or a future time is off the grid or
/// s >= min(future_times).
TestReport increment_independence_test(const GridHandle& grid, double s,
                                       const std::vector<double>& future_times,
                                       const IncrementFunctional& f, const CausalEvent& event,
                                       std::size_t n_paths, std::uint64_t seed,
                                       double z = kDefaultZ);

// ---------------------------------------------------------------------------
// Dyadic rounding of stopping times

/// Throws std::invalid_argument unless, for every requested j, each grid time
/// and +infinity round (dyadic_approximation) to a grid time or to a time
/// past the horizon. A uniform grid whose spacing divides 2^-j qualifies, as
/// does any grid of dyadic times at a level <= j.
void check_dyadic_compatible(const TimeGrid& grid, std::span<const int> j_values);

/// For each j: reflect at the dyadic rounding (level j) of the rule's
/// stopping time and run the characteristic-function test. All levels use
/// the same seed, so differences between levels come from rounding alone.
std::vector<TestReport> dyadic_convergence_study(const GridHandle& grid, const StoppingRule& rule,
                                                 const LinearFunctionalSpec& spec,
                                                 std::span<const int> j_values,
                                                 std::size_t n_paths, std::uint64_t seed,
                                                 double z = kDefaultZ);

}  // namespace reflectmc

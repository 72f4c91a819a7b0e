// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "reflectmc/normal.hpp"
#include "reflectmc/statistics.hpp"
#include "reflectmc/verify.hpp"
#include "support/test_support.hpp"

namespace reflectmc {
namespace {

using testing::Generator;
using testing::make_path;

// Reference values: 40-digit mpmath evaluations of exp(-v/2) and 2(1 - Phi(x)).
constexpr double kExpMinusHalf = 0.6065306597126334236;
constexpr double kExpMinusTwoAndHalf = 0.08208499862389879517;
constexpr double kExpMinusThreeEighths = 0.68728927879097219855;
constexpr double kHitHalfAtOne = 0.61707507745197379272;
constexpr double kHitOneAtOne = 0.31731050786291410283;
constexpr double kHitEightAtOne = 1.2441921148543568247e-15;

// ---------------------------------------------------------------------------
// Analytic characteristic function

TEST(AnalyticCharFn, KnownValues) {
    EXPECT_NEAR(analytic_char_fn(LinearFunctionalSpec({1.0}, {1.0})), kExpMinusHalf, 1e-15);
    EXPECT_NEAR(analytic_char_fn(LinearFunctionalSpec({1.0, 2.0}, {1.0, 1.0})), kExpMinusTwoAndHalf, 1e-15);
    EXPECT_EQ(analytic_char_fn(LinearFunctionalSpec({0.5, 1.0}, {0.0, 0.0})), 1.0);
    const LinearFunctionalSpec acceptance({0.25, 0.5, 1.0}, {1.0, -1.0, 1.0});
    EXPECT_NEAR(functional_variance(acceptance), 0.75, 1e-15);
    EXPECT_NEAR(analytic_char_fn(acceptance), kExpMinusThreeEighths, 1e-15);
}

// Brute-force oracle: simulate the Gaussian vector with std::normal_distribution
// and average cos(X); compare with the closed form within 4 standard errors.
double cos_mean_by_simulation(const LinearFunctionalSpec& spec, std::size_t n, double& se) {
    std::mt19937_64 engine(20240601);
    std::normal_distribution<double> normal;
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        double b = 0.0, previous = 0.0, x = 0.0;
        for (std::size_t j = 0; j < spec.size(); ++j) {
            b += std::sqrt(spec.times()[j] - previous) * normal(engine);
            previous = spec.times()[j];
            x += spec.coeffs()[j] * b;
        }
        values[i] = std::cos(x);
    }
    const MeanEstimate m = estimate_mean(values);
    se = m.std_error;
    return m.mean;
}

TEST(AnalyticCharFn, AgreesWithIndependentSimulation) {
    for (const auto& spec : {LinearFunctionalSpec({1.0, 2.0}, {1.0, 1.0}),
                             LinearFunctionalSpec({0.25, 0.5, 1.0}, {1.0, -1.0, 1.0})}) {
        double se = 0.0;
        const double estimate = cos_mean_by_simulation(spec, 200000, se);
        EXPECT_NEAR(estimate, analytic_char_fn(spec), 4.0 * se);
    }
}

TEST(AnalyticCharFn, StructuralProperties) {
    Generator gen(9);
    auto grid = share(uniform_grid(1.0, 64));
    for (int trial = 0; trial < 200; ++trial) {
        const LinearFunctionalSpec spec = gen.functional_on(*grid, 8);
        const double phi = analytic_char_fn(spec);
        ASSERT_GT(phi, 0.0);
        ASSERT_LE(phi, 1.0);
        // Even in the coefficients, and a single term reduces to exp(-l^2 t / 2).
        ASSERT_NEAR(analytic_char_fn(spec.scaled(-1.0)), phi, 1e-15);
        const double t = spec.times()[0];
        const double l = spec.coeffs()[0];
        ASSERT_NEAR(analytic_char_fn(LinearFunctionalSpec({t}, {l})), std::exp(-0.5 * l * l * t), 1e-15);
    }
}

// ---------------------------------------------------------------------------
// Reflection characteristic-function test

TEST(ReflectionCharTest, NeverRuleMatchesUnreflectedLaw) {
    auto grid = share(uniform_grid(1.0, 64));
    const TestReport report =
        reflection_char_test(grid, never_rule(), LinearFunctionalSpec({1.0}, {1.0}), 20000, 5);
    EXPECT_TRUE(report.pass) << report.statistic;
    EXPECT_EQ(report.threshold, kDefaultZ);
    EXPECT_EQ(report.sample_size, 20000u);
    EXPECT_NEAR(report.metric("analytic"), kExpMinusHalf, 1e-15);
}

TEST(ReflectionCharTest, HittingRuleThreeTermSpec) {
    auto grid = share(uniform_grid(1.0, 256));
    const LinearFunctionalSpec spec({0.25, 0.5, 1.0}, {1.0, -1.0, 1.0});
    const TestReport report = reflection_char_test(grid, first_hitting_rule(0.3), spec, 20000, 11);
    EXPECT_TRUE(report.pass) << report.statistic;
    EXPECT_NEAR(report.metric("analytic"), kExpMinusThreeEighths, 1e-15);
    EXPECT_LE(std::fabs(report.metric("estimate_re") - kExpMinusThreeEighths), 4.0 * report.metric("se_re"));
    EXPECT_LE(std::fabs(report.metric("estimate_im")), 4.0 * report.metric("se_im"));
}

TEST(ReflectionCharTest, ZeroFunctionalGivesExactlyOne) {
    auto grid = share(uniform_grid(1.0, 16));
    const TestReport report = reflection_char_test(grid, first_hitting_rule(0.2),
                                                   LinearFunctionalSpec({0.5, 1.0}, {0.0, 0.0}), 1000, 1);
    EXPECT_EQ(report.metric("estimate_re"), 1.0);
    EXPECT_EQ(report.metric("estimate_im"), 0.0);
    EXPECT_EQ(report.statistic, 0.0);
    EXPECT_TRUE(report.pass);
}

// Reflecting at time 0 whenever B_1 > 0 gives X^T = -|B_1|, whose imaginary
// part is far from 0; the test must notice.
TEST(ReflectionCharTest, DetectsAntiCausalReflection) {
    auto grid = share(uniform_grid(1.0, 16));
    const TestReport report =
        reflection_char_test(grid, final_value_peek_rule(), LinearFunctionalSpec({1.0}, {1.0}), 20000, 3);
    EXPECT_FALSE(report.pass);
    EXPECT_LT(report.metric("estimate_im"), -0.5);
}

TEST(ReflectionCharTest, ArgumentErrors) {
    auto grid = share(uniform_grid(1.0, 16));
    const LinearFunctionalSpec spec({1.0}, {1.0});
    EXPECT_THROW(reflection_char_test(grid, never_rule(), spec, 999, 1), std::invalid_argument);
    EXPECT_THROW(reflection_char_test(grid, never_rule(), spec, 1000, 1, 0.0), std::invalid_argument);
    EXPECT_THROW(reflection_char_test(grid, never_rule(), LinearFunctionalSpec({0.3}, {1.0}), 1000, 1),
                 std::invalid_argument);
}

TEST(ReflectionCharTest, ConfigEchoAndDeterminism) {
    auto grid = share(uniform_grid(1.0, 32));
    const LinearFunctionalSpec spec({0.5}, {2.0});
    const TestReport a = reflection_char_test(grid, first_hitting_rule(0.1), spec, 2000, 42);
    const TestReport b = reflection_char_test(grid, first_hitting_rule(0.1), spec, 2000, 42);
    EXPECT_EQ(a.statistic, b.statistic);
    EXPECT_EQ(a.metrics, b.metrics);
    EXPECT_EQ(a.config, b.config);
    const std::vector<std::pair<std::string, std::string>> expected{
        {"horizon", "1"}, {"steps", "32"},         {"paths", "2000"}, {"seed", "42"},
        {"rule", first_hitting_rule(0.1).name()}, {"times", "0.5"},  {"coeffs", "2"}, {"z", "4"}};
    EXPECT_EQ(a.config, expected);
}

// X^T and X (an independent sample) have the same law: the two-sample KS
// distance stays below the 0.9999 asymptotic Kolmogorov quantile.
TEST(ReflectionCharTest, ReflectedAndOriginalSamplesAgreeInLaw) {
    auto grid = share(uniform_grid(1.0, 128));
    const LinearFunctionalSpec spec({0.25, 0.75, 1.0}, {0.5, 1.0, -2.0});
    constexpr std::size_t n = 20000;
    const auto reflected = reflected_functional_samples(grid, first_hitting_rule(0.25), spec, n, 100);
    const auto original = reflected_functional_samples(grid, never_rule(), spec, n, 200);
    const double d = ks_two_sample(reflected, original);
    EXPECT_LT(d, kolmogorov_quantile(0.9999) * std::sqrt(2.0 / n));
}

// ---------------------------------------------------------------------------
// Hitting times

TEST(HittingProbability, KnownValues) {
    EXPECT_NEAR(hitting_probability(0.5, 1.0), kHitHalfAtOne, 1e-15);
    EXPECT_NEAR(hitting_probability(1.0, 1.0), kHitOneAtOne, 1e-15);
    EXPECT_NEAR(hitting_probability(8.0, 1.0), kHitEightAtOne, 1e-28);
    EXPECT_NEAR(hitting_probability(1.0, 4.0), 2.0 * (1.0 - normal_cdf(0.5)), 1e-15);
}

TEST(BridgeCrossing, Basics) {
    EXPECT_EQ(bridge_crossing_probability(0.6, 0.0, 0.5, 0.1), 1.0);
    EXPECT_EQ(bridge_crossing_probability(0.0, 0.5, 0.5, 0.1), 1.0);
    EXPECT_NEAR(bridge_crossing_probability(0.0, 0.0, 0.5, 0.5), std::exp(-1.0), 1e-15);
    EXPECT_LT(bridge_crossing_probability(0.0, 0.0, 0.5, 0.01), bridge_crossing_probability(0.0, 0.0, 0.5, 0.1));
}

TEST(CrossingProbability, GridCrossingIsCertain) {
    const SamplePath path = make_path({0.0, 0.2, 0.7, 0.1});
    EXPECT_EQ(crossing_probability(path, 0.5, 3, MonitoringMode::raw), 1.0);
    EXPECT_EQ(crossing_probability(path, 0.5, 3, MonitoringMode::bridge_corrected), 1.0);
    EXPECT_EQ(crossing_probability(path, 0.5, 1, MonitoringMode::raw), 0.0);
    EXPECT_GT(crossing_probability(path, 0.5, 1, MonitoringMode::bridge_corrected), 0.0);
    EXPECT_THROW(crossing_probability(path, 0.5, 4, MonitoringMode::raw), std::out_of_range);
}

TEST(CrossingProbability, BridgeAtLeastRawOnEveryPath) {
    auto grid = share(uniform_grid(1.0, 64));
    for (std::uint64_t i = 0; i < 500; ++i) {
        const SamplePath path = generate_path(grid, StreamSpec{6, i});
        const double raw = crossing_probability(path, 0.5, 64, MonitoringMode::raw);
        const double bridge = crossing_probability(path, 0.5, 64, MonitoringMode::bridge_corrected);
        ASSERT_GE(bridge, raw);
        ASSERT_LE(bridge, 1.0);
    }
}

TEST(HittingCdfTest, BridgeCorrectedPasses) {
    auto grid = share(uniform_grid(1.0, 256));
    const TestReport report =
        hitting_time_cdf_test(0.5, 1.0, grid, 20000, 8, MonitoringMode::bridge_corrected);
    EXPECT_TRUE(report.pass) << report.statistic << " > " << report.threshold;
    EXPECT_EQ(report.metric("bias_allowance"), 0.0);
    EXPECT_NEAR(report.metric("analytic"), kHitHalfAtOne, 1e-15);
}

// Raw grid monitoring misses excursions between grid points: the estimate
// falls below the analytic value by more than 4 binomial errors, and the test
// passes only because of the discrete-monitoring allowance.
TEST(HittingCdfTest, RawModeUndershootsAndNeedsAllowance) {
    auto grid = share(uniform_grid(1.0, 256));
    const TestReport report = hitting_time_cdf_test(0.5, 1.0, grid, 20000, 8, MonitoringMode::raw);
    EXPECT_LT(report.metric("empirical"), report.metric("analytic"));
    EXPECT_GT(report.statistic, kDefaultZ * report.metric("binomial_se"));
    EXPECT_GT(report.metric("bias_allowance"), 0.0);
    EXPECT_TRUE(report.pass) << report.statistic << " > " << report.threshold;
}

TEST(HittingCdfTest, FarLevelGivesTinyProbability) {
    auto grid = share(uniform_grid(1.0, 64));
    const TestReport report =
        hitting_time_cdf_test(8.0, 1.0, grid, 2000, 1, MonitoringMode::bridge_corrected);
    EXPECT_NEAR(report.metric("analytic"), kHitEightAtOne, 1e-28);
    EXPECT_LT(report.metric("empirical"), 1e-10);
}

TEST(HittingCdfTest, ArgumentErrors) {
    auto grid = share(uniform_grid(1.0, 8));
    EXPECT_THROW(hitting_time_cdf_test(0.0, 1.0, grid, 100, 1, MonitoringMode::raw), std::invalid_argument);
    EXPECT_THROW(hitting_time_cdf_test(0.5, 0.3, grid, 100, 1, MonitoringMode::raw), std::invalid_argument);
    EXPECT_THROW(hitting_time_cdf_test(0.5, 0.0, grid, 100, 1, MonitoringMode::raw), std::invalid_argument);
    EXPECT_THROW(parse_monitoring_mode("bridge"), std::invalid_argument);
    EXPECT_EQ(parse_monitoring_mode(to_string(MonitoringMode::bridge_corrected)), MonitoringMode::bridge_corrected);
}

// ---------------------------------------------------------------------------
// Running maximum

TEST(RunningMaxCdf, Values) {
    EXPECT_EQ(running_max_cdf(0.0, 1.0), 0.0);
    EXPECT_EQ(running_max_cdf(-1.0, 1.0), 0.0);
    EXPECT_NEAR(running_max_cdf(0.6744897501960817432, 1.0), 0.5, 1e-15);
    EXPECT_NEAR(running_max_cdf(0.6744897501960817432 * 2.0, 4.0), 0.5, 1e-15);
    EXPECT_NEAR(running_max_cdf(1.0, 1.0), 1.0 - kHitOneAtOne, 1e-15);
}

// The sampled bridge maximum m solves P(M >= m) = exp(-2(m-a)(m-b)/dt) = u
// and is never below either endpoint.
TEST(SampleBridgeMaximum, InvertsTheCrossingLaw) {
    Generator gen(77);
    for (int trial = 0; trial < 2000; ++trial) {
        const double a = gen.uniform(-1.0, 1.0);
        const double b = gen.uniform(-1.0, 1.0);
        const double dt = gen.uniform(1e-4, 0.5);
        const double u = gen.uniform(1e-12, 1.0);
        const double m = sample_bridge_maximum(a, b, dt, u);
        ASSERT_GE(m, std::max(a, b));
        ASSERT_NEAR(std::exp(-2.0 * (m - a) * (m - b) / dt), u, 1e-9);
    }
}

TEST(PathMaximum, BridgeAtLeastGridMaximum) {
    auto grid = share(uniform_grid(1.0, 64));
    for (std::uint64_t i = 0; i < 300; ++i) {
        const SamplePath path = generate_path(grid, StreamSpec{2, i});
        RandomStream draws(StreamSpec{2, i}, kBridgeLane);
        const double raw = path_maximum(path, 64, MonitoringMode::raw, draws);
        const double bridge = path_maximum(path, 64, MonitoringMode::bridge_corrected, draws);
        ASSERT_GE(bridge, raw);
        ASSERT_GE(raw, 0.0);
    }
}

TEST(RunningMaxKsTest, BridgeCorrectedPassesCalibratedThreshold) {
    auto grid = share(uniform_grid(1.0, 256));
    const TestReport report = running_max_ks_test(1.0, grid, 20000, 4, MonitoringMode::bridge_corrected);
    EXPECT_TRUE(report.pass) << report.statistic << " > " << report.threshold;
    EXPECT_EQ(report.threshold, calibrated_ks_threshold(20000));
}

TEST(RunningMaxKsTest, RawModeIsVisiblyBiasedButWithinAllowance) {
    auto grid = share(uniform_grid(1.0, 256));
    const TestReport report = running_max_ks_test(1.0, grid, 20000, 4, MonitoringMode::raw);
    EXPECT_GT(report.metric("ks"), calibrated_ks_threshold(20000));
    EXPECT_TRUE(report.pass) << report.statistic << " > " << report.threshold;
}

TEST(RunningMaxKsTest, ThresholdValues) {
    EXPECT_NEAR(calibrated_ks_threshold(100000), 0.0078281, 1e-6);
    auto grid = share(uniform_grid(1.0, 8));
    EXPECT_THROW(running_max_ks_test(0.3, grid, 100, 1, MonitoringMode::raw), std::invalid_argument);
    EXPECT_THROW(running_max_ks_test(1.0, grid, 100, 1, MonitoringMode::raw, 0.0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Increment independence

TEST(IndependenceTest, ConstantFunctionalGivesExactZero) {
    auto grid = share(uniform_grid(1.0, 32));
    const TestReport report = increment_independence_test(grid, 0.5, {0.75, 1.0}, constant_functional(1.0),
                                                          above_level_event(0.0), 5000, 3);
    EXPECT_EQ(report.metric("difference"), 0.0);
    EXPECT_EQ(report.statistic, 0.0);
    EXPECT_TRUE(report.pass);
}

TEST(IndependenceTest, SureEventGivesExactZero) {
    auto grid = share(uniform_grid(1.0, 32));
    const TestReport report = increment_independence_test(
        grid, 0.5, {1.0}, clamped_linear_functional({1.0}), sure_event(), 5000, 3);
    EXPECT_EQ(report.metric("difference"), 0.0);
    EXPECT_EQ(report.metric("event_probability"), 1.0);
    EXPECT_TRUE(report.pass);
}

TEST(IndependenceTest, ClampedIncrementsAndHalfSpaceEvent) {
    auto grid = share(uniform_grid(1.0, 64));
    const TestReport report = increment_independence_test(
        grid, 0.5, {0.75, 1.0}, clamped_linear_functional({1.0, 1.0}), above_level_event(0.0), 20000, 17);
    EXPECT_TRUE(report.pass) << report.statistic;
    EXPECT_NEAR(report.metric("event_probability"), 0.5, 0.02);
}

TEST(IndependenceTest, CosineAndRunningMaxEvent) {
    auto grid = share(uniform_grid(2.0, 64));
    const TestReport report = increment_independence_test(
        grid, 1.0, {1.5, 2.0}, cosine_functional({1.0, -0.5}), running_max_event(0.5), 20000, 23);
    EXPECT_TRUE(report.pass) << report.statistic;
}

TEST(IndependenceTest, AntiCausalEventIsRejected) {
    auto grid = share(uniform_grid(1.0, 32));
    EXPECT_THROW(increment_independence_test(grid, 0.5, {1.0}, clamped_linear_functional({1.0}),
                                             final_value_event(), 5000, 3),
                 CausalityError);
}

TEST(IndependenceTest, ArgumentErrors) {
    auto grid = share(uniform_grid(1.0, 8));
    const auto f = clamped_linear_functional({1.0});
    EXPECT_THROW(increment_independence_test(grid, 0.3, {1.0}, f, sure_event(), 100, 1), std::invalid_argument);
    EXPECT_THROW(increment_independence_test(grid, 0.5, {0.5}, f, sure_event(), 100, 1), std::invalid_argument);
    EXPECT_THROW(increment_independence_test(grid, 0.5, {}, f, sure_event(), 100, 1), std::invalid_argument);
    EXPECT_THROW(clamped_linear_functional({1.0}, 0.0), std::invalid_argument);
    // Functional arity must match the number of future times.
    EXPECT_THROW(increment_independence_test(grid, 0.5, {0.75, 1.0}, f, sure_event(), 100, 1),
                 std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Dyadic rounding

TEST(DyadicCompatibility, RejectsGridsThatCannotResolveTheLevel) {
    const std::vector<int> one{1};
    EXPECT_THROW(check_dyadic_compatible(uniform_grid(1.0, 3), one), std::invalid_argument);
    const std::vector<int> levels{1, 2, 3, 4, 5, 6, 12};
    EXPECT_NO_THROW(check_dyadic_compatible(uniform_grid(1.0, 1024), levels));
    // Dyadic grid times are fixed points at every finer level.
    EXPECT_NO_THROW(check_dyadic_compatible(uniform_grid(1.0, 8), levels));
    // Horizon 3 with unit steps: infinity rounds to 2, a grid time.
    EXPECT_NO_THROW(check_dyadic_compatible(uniform_grid(3.0, 3), one));
    const std::vector<int> bad{0};
    EXPECT_THROW(check_dyadic_compatible(uniform_grid(1.0, 8), bad), std::invalid_argument);
}

TEST(DyadicRoundedRule, FineLevelsReproduceTheBaseRule) {
    auto grid = share(uniform_grid(1.0, 1024));
    const StoppingRule base = first_hitting_rule(0.4);
    const StoppingRule fine = dyadic_rounded_rule(base, 12);
    const StoppingRule quarter = dyadic_rounded_rule(fixed_index_rule(256), 2);
    for (std::uint64_t i = 0; i < 200; ++i) {
        const SamplePath path = generate_path(grid, StreamSpec{70, i});
        ASSERT_EQ(evaluate_rule(fine, path), evaluate_rule(base, path));
        ASSERT_EQ(evaluate_rule(quarter, path), StopDecision::at(256));
    }
}

TEST(DyadicConvergenceStudy, PassesAtEveryLevel) {
    auto grid = share(uniform_grid(1.0, 64));
    const std::vector<int> levels{1, 2, 3};
    const auto reports = dyadic_convergence_study(grid, first_hitting_rule(0.4),
                                                  LinearFunctionalSpec({0.5, 1.0}, {1.0, 1.0}), levels, 10000, 9);
    ASSERT_EQ(reports.size(), 3u);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        EXPECT_TRUE(reports[i].pass) << reports[i].name << " " << reports[i].statistic;
        EXPECT_EQ(reports[i].name, "dyadic-study[j=" + std::to_string(levels[i]) + "]");
        EXPECT_EQ(reports[i].metric("level"), levels[i]);
    }
}

TEST(DyadicConvergenceStudy, IncompatibleGridIsAnError) {
    auto grid = share(uniform_grid(1.0, 3));
    const std::vector<int> levels{1};
    EXPECT_THROW(dyadic_convergence_study(grid, first_hitting_rule(0.4), LinearFunctionalSpec({1.0}, {1.0}),
                                          levels, 1000, 1),
                 std::invalid_argument);
}

TEST(ZScore, Conventions) {
    EXPECT_EQ(z_score(0.0, 0.0), 0.0);
    EXPECT_TRUE(std::isinf(z_score(1.0, 0.0)));
    EXPECT_EQ(z_score(-2.0, 0.5), 4.0);
}

}  // namespace
}  // namespace reflectmc

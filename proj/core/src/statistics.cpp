// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0

#include "reflectmc/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace reflectmc {

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
        compensation_ += (sum_ - t) + x;
    } else {
        compensation_ += (x - t) + sum_;
    }
    sum_ = t;
}

double chunked_sum(std::span<const double> values) noexcept {
    CompensatedSum total;
    for (std::size_t begin = 0; begin < values.size(); begin += kReductionChunk) {
        const std::size_t end = std::min(values.size(), begin + kReductionChunk);
        CompensatedSum chunk;
        for (std::size_t i = begin; i < end; ++i) {
            chunk.add(values[i]);
        }
        total.add(chunk.value());
    }
    return total.value();
}

namespace {

// Mean and unbiased sample variance, two passes, both chunked.
std::pair<double, double> mean_and_variance(std::span<const double> values) {
    const double n = static_cast<double>(values.size());
    const double mean = chunked_sum(values) / n;
    std::vector<double> squares(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - mean;
        squares[i] = d * d;
    }
    const double variance = chunked_sum(squares) / (n - 1.0);
    return {mean, variance};
}

}  // namespace

MeanEstimate estimate_mean(std::span<const double> values) {
    if (values.size() < 2) {
        throw std::invalid_argument("estimate_mean: need at least 2 values");
    }
    const auto [mean, variance] = mean_and_variance(values);
    return MeanEstimate{mean, std::sqrt(variance / static_cast<double>(values.size())),
                        values.size()};
}

CharFnEstimate empirical_char_fn(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw std::invalid_argument("empirical_char_fn: need at least 2 samples");
    }
    std::vector<double> cosines(samples.size());
    std::vector<double> sines(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        cosines[i] = std::cos(samples[i]);
        sines[i] = std::sin(samples[i]);
    }
    const MeanEstimate re = estimate_mean(cosines);
    const MeanEstimate im = estimate_mean(sines);
    return CharFnEstimate{re.mean, im.mean, samples.size(), re.std_error, im.std_error};
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) {
        throw std::invalid_argument("ks_statistic: empty sample");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double distance = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        const double upper = static_cast<double>(i + 1) / n;
        const double lower = static_cast<double>(i) / n;
        distance = std::max({distance, std::fabs(upper - f), std::fabs(lower - f)});
    }
    return distance;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("ks_two_sample: empty sample");
    }
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double distance = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        distance = std::max(distance, std::fabs(static_cast<double>(i) / nx -
                                                static_cast<double>(j) / ny));
    }
    return distance;
}

double kolmogorov_cdf(double x) noexcept {
    if (x <= 0.0) {
        return 0.0;
    }
    if (x < 1.0) {
        // sqrt(2 pi)/x sum_k exp(-(2k-1)^2 pi^2 / (8 x^2)); converges fast for small x.
        double sum = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double m = 2.0 * k - 1.0;
            sum += std::exp(-m * m * std::numbers::pi * std::numbers::pi / (8.0 * x * x));
        }
        return std::sqrt(2.0 * std::numbers::pi) / x * sum;
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-17) break;
    }
    return 1.0 - 2.0 * sum;
}

double kolmogorov_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("kolmogorov_quantile: p must lie in (0, 1)");
    }
    double lo = 0.0;
    double hi = 10.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (kolmogorov_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace reflectmc

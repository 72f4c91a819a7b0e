// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Reproducible estimators: compensated, fixed-chunk-order summation, mean and
// standard-error estimates, empirical characteristic functions and
// Kolmogorov-Smirnov distances.

#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace reflectmc {

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
  public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + compensation_; }

  private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

/// Chunk size for all reductions. Results depend on it, never on threading.
inline constexpr std::size_t kReductionChunk = 4096;

/// Sum of `values` accumulated chunk by chunk in index order, each chunk with
/// a CompensatedSum and the chunk totals again compensated.
double chunked_sum(std::span<const double> values) noexcept;

struct MeanEstimate {
    double mean = 0.0;
    /// Sample standard deviation (n - 1 denominator) over sqrt(n).
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Throws std::invalid_argument for fewer than 2 values.
MeanEstimate estimate_mean(std::span<const double> values);

/// Empirical estimate of E[exp(iX)].
struct CharFnEstimate {
    double re = 0.0;
    double im = 0.0;
    std::size_t n = 0;
    double se_re = 0.0;
    double se_im = 0.0;

    double modulus_squared() const noexcept { return re * re + im * im; }
};

/// re = mean cos(x), im = mean sin(x), standard errors from the sample
/// standard deviations. Throws std::invalid_argument for fewer than 2 samples.
CharFnEstimate empirical_char_fn(std::span<const double> samples);

/// One-sample KS distance sup_i max(|i/n - F(x_i)|, |(i-1)/n - F(x_i)|) over
/// the sorted samples. Throws std::invalid_argument on empty input.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Two-sample KS distance between empirical CDFs. Throws on empty input.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Asymptotic Kolmogorov distribution P(K <= x), K = lim sqrt(n) D_n.
double kolmogorov_cdf(double x) noexcept;

/// Inverse of kolmogorov_cdf by bisection, p in (0, 1).
double kolmogorov_quantile(double p);

}  // namespace reflectmc

// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace reflectmc {

/// Standard normal quantile Φ^{-1}(p) for p in (0, 1).
///
/// Wichura's AS241 (PPND16) rational approximation, accurate to about one
/// part in 1e16. Returns ∓infinity at p = 0 / p = 1 and NaN outside [0, 1].
double normal_quantile(double p) noexcept;

/// Standard normal CDF Φ(x), evaluated through erfc so both tails keep
/// full relative precision.
double normal_cdf(double x) noexcept;

/// Standard normal density.
double normal_pdf(double x) noexcept;

}  // namespace reflectmc

// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Reflection of a path at a stopping index, linear path functionals, and the
// pivot decomposition X = Y + Z / X^T = Y - Z.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "reflectmc/paths.hpp"
#include "reflectmc/stopping.hpp"

namespace reflectmc {

/// X = sum_j coeffs[j] * B(times[j]).
class LinearFunctionalSpec {
  public:
    /// Throws std::invalid_argument unless n >= 1, lengths match, every value
    /// is finite and times are strictly increasing and positive.
    LinearFunctionalSpec(std::vector<double> times, std::vector<double> coeffs);

    std::span<const double> times() const noexcept { return times_; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    std::size_t size() const noexcept { return times_.size(); }

    /// Same times, coefficients multiplied by `factor`.
    LinearFunctionalSpec scaled(double factor) const;

  private:
    std::vector<double> times_;
    std::vector<double> coeffs_;
};

/// A functional bound to the grid indices of its times.
struct ResolvedFunctional {
    std::vector<std::size_t> indices;
    std::vector<double> coeffs;
};

/// Throws std::invalid_argument if a spec time is not a grid time.
ResolvedFunctional resolve(const TimeGrid& grid, const LinearFunctionalSpec& spec);

/// Pivot decomposition at grid index `pivot_index` (time a).
///   k_r = number of functional times <= a
///   y   = sum_{j<=k_r} l_j B(t_j) + (sum_{j>k_r} l_j) B(a)
///   z   = sum_{j>k_r} l_j (B(t_j) - B(a))
struct YZPair {
    double y = 0.0;
    double z = 0.0;
    std::size_t pivot_index = 0;
    std::size_t k_r = 0;
};

/// B^T: values unchanged up to and including the stop index, mirrored about
/// the stopped value afterwards. Never returns the path unchanged.
/// Throws std::out_of_range if the stop index is outside the path.
SamplePath reflect(const SamplePath& path, const StopDecision& stop);

double linear_functional(const SamplePath& path, const LinearFunctionalSpec& spec);
double linear_functional(const SamplePath& path, const ResolvedFunctional& functional);

/// Throws std::out_of_range for a pivot outside the path and
/// std::invalid_argument if a spec time is off-grid.
YZPair yz_decomposition(const SamplePath& path, std::size_t pivot_index,
                        const LinearFunctionalSpec& spec);
YZPair yz_decomposition(const SamplePath& path, std::size_t pivot_index,
                        const ResolvedFunctional& functional);

/// |a - b| in units of ulp(scale). Used for the pathwise identities, where
/// the rounding error of the sums is proportional to the largest term rather
/// than to the (possibly cancelled) result.
double ulp_distance(double a, double b, double scale) noexcept;

/// Largest magnitude participating in the X, Y and Z sums at the given pivot.
double identity_scale(const SamplePath& path, const ResolvedFunctional& functional,
                      const YZPair& yz) noexcept;

}  // namespace reflectmc

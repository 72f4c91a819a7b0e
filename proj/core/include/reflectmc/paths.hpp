// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Time grids and standard Brownian motion sample paths.

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "reflectmc/rng.hpp"

namespace reflectmc {

/// Strictly increasing sampling times starting at 0.
class TimeGrid {
  public:
    /// Throws std::invalid_argument unless times is nonempty, starts at 0,
    /// is finite and strictly increasing.
    explicit TimeGrid(std::vector<double> times);

    std::span<const double> times() const noexcept { return times_; }
    double operator[](std::size_t k) const noexcept { return times_[k]; }
    std::size_t size() const noexcept { return times_.size(); }
    double horizon() const noexcept { return times_.back(); }

    /// Width of the k-th increment, times[k+1] - times[k].
    double spacing(std::size_t k) const noexcept { return times_[k + 1] - times_[k]; }
    /// sqrt(spacing(k)); cached because path generation needs it per step.
    double increment_scale(std::size_t k) const noexcept { return scales_[k]; }
    double max_spacing() const noexcept;

    /// Grid index whose time matches `t` up to a relative tolerance of
    /// 1e-12 of the horizon, or nullopt.
    std::optional<std::size_t> index_of(double t) const noexcept;

    /// Smallest index whose time is >= t (same tolerance); size() if none.
    std::size_t first_index_at_or_after(double t) const noexcept;

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) { return a.times_ == b.times_; }

  private:
    double tolerance() const noexcept;

    std::vector<double> times_;
    std::vector<double> scales_;
};

using GridHandle = std::shared_ptr<const TimeGrid>;

/// times[k] = k * horizon / steps, k = 0..steps.
/// Throws std::invalid_argument for horizon <= 0 (or non-finite) or steps == 0.
TimeGrid uniform_grid(double horizon, std::size_t steps);

inline GridHandle share(TimeGrid grid) { return std::make_shared<const TimeGrid>(std::move(grid)); }

/// One realized Brownian trajectory on a grid, pinned at 0.
class SamplePath {
  public:
    /// Throws std::invalid_argument on a null grid, a length mismatch, or
    /// values[0] != 0.
    SamplePath(GridHandle grid, std::vector<double> values);

    const TimeGrid& grid() const noexcept { return *grid_; }
    const GridHandle& grid_handle() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }
    std::size_t size() const noexcept { return values_.size(); }
    double time(std::size_t k) const noexcept { return (*grid_)[k]; }

    /// Grid and values both equal (bitwise for values).
    friend bool operator==(const SamplePath& a, const SamplePath& b);

  private:
    GridHandle grid_;
    std::vector<double> values_;
};

/// Generated path values live on the lattice 2^-36 * Z. Sums and
/// differences of lattice values are exact in binary64 while every operand
/// and result stays below 2^17 in magnitude, so reflecting about a path
/// value (v -> 2c - v) is exact and bitwise invertible.
inline constexpr int kLatticeExponent = 36;
double snap_to_lattice(double value) noexcept;

/// Standard Brownian motion on `grid`, driven by lane 0 of `stream`.
/// Draw k feeds the increment over [times[k], times[k+1]].
SamplePath generate_path(const GridHandle& grid, StreamSpec stream);

/// Continue the Brownian evolution from values[from] to the end of the
/// grid using fresh increments from `stream`. values[0..from] are kept.
void resample_after(std::span<double> values, const TimeGrid& grid, std::size_t from,
                    RandomStream& stream);

}  // namespace reflectmc

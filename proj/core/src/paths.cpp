// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0

#include "reflectmc/paths.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace reflectmc {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.empty()) {
        throw std::invalid_argument("TimeGrid: empty grid");
    }
    if (times_.front() != 0.0) {
        throw std::invalid_argument("TimeGrid: first time must be 0");
    }
    for (std::size_t k = 0; k < times_.size(); ++k) {
        if (!std::isfinite(times_[k])) {
            throw std::invalid_argument("TimeGrid: non-finite time at index " + std::to_string(k));
        }
        if (k > 0 && !(times_[k] > times_[k - 1])) {
            throw std::invalid_argument("TimeGrid: times not strictly increasing at index " +
                                        std::to_string(k));
        }
    }
    scales_.reserve(times_.size() - 1);
    for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
        scales_.push_back(std::sqrt(spacing(k)));
    }
}

double TimeGrid::max_spacing() const noexcept {
    double widest = 0.0;
    for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
        widest = std::max(widest, spacing(k));
    }
    return widest;
}

double TimeGrid::tolerance() const noexcept {
    return 1e-12 * std::max(1.0, horizon());
}

std::optional<std::size_t> TimeGrid::index_of(double t) const noexcept {
    const std::size_t k = first_index_at_or_after(t);
    if (k < times_.size() && std::fabs(times_[k] - t) <= tolerance()) {
        return k;
    }
    return std::nullopt;
}

std::size_t TimeGrid::first_index_at_or_after(double t) const noexcept {
    const double tol = tolerance();
    auto it = std::lower_bound(times_.begin(), times_.end(), t - tol);
    return static_cast<std::size_t>(it - times_.begin());
}

TimeGrid uniform_grid(double horizon, std::size_t steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("uniform_grid: horizon must be positive and finite");
    }
    if (steps == 0) {
        throw std::invalid_argument("uniform_grid: steps must be at least 1");
    }
    std::vector<double> times(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        times[k] = static_cast<double>(k) * horizon / static_cast<double>(steps);
    }
    times[steps] = horizon;
    return TimeGrid(std::move(times));
}

SamplePath::SamplePath(GridHandle grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) {
        throw std::invalid_argument("SamplePath: null grid");
    }
    if (values_.size() != grid_->size()) {
        throw std::invalid_argument("SamplePath: " + std::to_string(values_.size()) +
                                    " values for a grid of " + std::to_string(grid_->size()));
    }
    if (values_.front() != 0.0) {
        throw std::invalid_argument("SamplePath: values[0] must be 0");
    }
}

bool operator==(const SamplePath& a, const SamplePath& b) {
    if (a.grid_ != b.grid_ && !(*a.grid_ == *b.grid_)) {
        return false;
    }
    return std::equal(a.values_.begin(), a.values_.end(), b.values_.begin(), b.values_.end(),
                      [](double x, double y) { return std::bit_cast<std::uint64_t>(x) ==
                                                      std::bit_cast<std::uint64_t>(y); });
}

double snap_to_lattice(double value) noexcept {
    // Power-of-two scalings are exact.
    static const double scale = std::ldexp(1.0, kLatticeExponent);
    static const double inverse = std::ldexp(1.0, -kLatticeExponent);
    return std::nearbyint(value * scale) * inverse;
}

void resample_after(std::span<double> values, const TimeGrid& grid, std::size_t from,
                    RandomStream& stream) {
    for (std::size_t k = from; k + 1 < values.size(); ++k) {
        values[k + 1] = snap_to_lattice(values[k] + grid.increment_scale(k) * standard_normal(stream));
    }
}

SamplePath generate_path(const GridHandle& grid, StreamSpec stream) {
    if (!grid) {
        throw std::invalid_argument("generate_path: null grid");
    }
    std::vector<double> values(grid->size(), 0.0);
    RandomStream draws(stream, kPathLane);
    resample_after(values, *grid, 0, draws);
    return SamplePath(grid, std::move(values));
}

}  // namespace reflectmc

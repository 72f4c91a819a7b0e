// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures for the unit tests. Random inputs for property tests come
// from std::mt19937_64 so they never share a generator with the code under
// test.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "reflectmc/paths.hpp"
#include "reflectmc/reflection.hpp"

namespace reflectmc::testing {

/// Path with the given values on the uniform grid over [0, 1].
inline SamplePath make_path(std::vector<double> values) {
    auto grid = share(uniform_grid(1.0, values.size() - 1));
    return SamplePath(grid, std::move(values));
}

/// Path with the given values on an explicit grid.
inline SamplePath make_path(std::vector<double> times, std::vector<double> values) {
    return SamplePath(share(TimeGrid(std::move(times))), std::move(values));
}

class Generator {
  public:
    explicit Generator(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    std::size_t index(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
    }
    double normal() { return std::normal_distribution<double>()(engine_); }

    /// Random functional on grid times: 1..max_terms distinct indices in
    /// [1, grid.size()-1], coefficients in [-3, 3].
    LinearFunctionalSpec functional_on(const TimeGrid& grid, std::size_t max_terms) {
        const std::size_t last = grid.size() - 1;
        const std::size_t terms = index(1, std::min(max_terms, last));
        std::vector<std::size_t> picks;
        while (picks.size() < terms) {
            const std::size_t k = index(1, last);
            if (std::find(picks.begin(), picks.end(), k) == picks.end()) picks.push_back(k);
        }
        std::sort(picks.begin(), picks.end());
        std::vector<double> times, coeffs;
        for (std::size_t k : picks) {
            times.push_back(grid[k]);
            coeffs.push_back(uniform(-3.0, 3.0));
        }
        return LinearFunctionalSpec(std::move(times), std::move(coeffs));
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace reflectmc::testing

// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0

#include "reflectmc/reflection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "reflectmc/statistics.hpp"

namespace reflectmc {

LinearFunctionalSpec::LinearFunctionalSpec(std::vector<double> times, std::vector<double> coeffs)
    : times_(std::move(times)), coeffs_(std::move(coeffs)) {
    if (times_.empty()) {
        throw std::invalid_argument("LinearFunctionalSpec: at least one time required");
    }
    if (times_.size() != coeffs_.size()) {
        throw std::invalid_argument("LinearFunctionalSpec: " + std::to_string(times_.size()) +
                                    " times but " + std::to_string(coeffs_.size()) + " coeffs");
    }
    for (std::size_t j = 0; j < times_.size(); ++j) {
        if (!std::isfinite(times_[j]) || !std::isfinite(coeffs_[j])) {
            throw std::invalid_argument("LinearFunctionalSpec: non-finite entry");
        }
        if (!(times_[j] > 0.0)) {
            throw std::invalid_argument("LinearFunctionalSpec: times must be positive");
        }
        if (j > 0 && !(times_[j] > times_[j - 1])) {
            throw std::invalid_argument("LinearFunctionalSpec: times must be strictly increasing");
        }
    }
}

LinearFunctionalSpec LinearFunctionalSpec::scaled(double factor) const {
    std::vector<double> coeffs = coeffs_;
    for (double& c : coeffs) {
        c *= factor;
    }
    return LinearFunctionalSpec(times_, std::move(coeffs));
}

ResolvedFunctional resolve(const TimeGrid& grid, const LinearFunctionalSpec& spec) {
    ResolvedFunctional out;
    out.indices.reserve(spec.size());
    for (double t : spec.times()) {
        const auto idx = grid.index_of(t);
        if (!idx) {
            throw std::invalid_argument("functional time " + std::to_string(t) +
                                        " is not a grid time");
        }
        out.indices.push_back(*idx);
    }
    out.coeffs.assign(spec.coeffs().begin(), spec.coeffs().end());
    return out;
}

SamplePath reflect(const SamplePath& path, const StopDecision& stop) {
    if (stop.is_never()) {
        return path;
    }
    const std::size_t s = stop.index();
    if (s >= path.size()) {
        throw std::out_of_range("reflect: stop index " + std::to_string(s) +
                                " outside path of length " + std::to_string(path.size()));
    }
    std::vector<double> values(path.values().begin(), path.values().end());
    const double twice_pivot = 2.0 * values[s];
    for (std::size_t k = s + 1; k < values.size(); ++k) {
        values[k] = twice_pivot - values[k];
    }
    return SamplePath(path.grid_handle(), std::move(values));
}

double linear_functional(const SamplePath& path, const ResolvedFunctional& functional) {
    CompensatedSum sum;
    for (std::size_t j = 0; j < functional.indices.size(); ++j) {
        sum.add(functional.coeffs[j] * path[functional.indices[j]]);
    }
    return sum.value();
}

double linear_functional(const SamplePath& path, const LinearFunctionalSpec& spec) {
    return linear_functional(path, resolve(path.grid(), spec));
}

YZPair yz_decomposition(const SamplePath& path, std::size_t pivot_index,
                        const ResolvedFunctional& functional) {
    if (pivot_index >= path.size()) {
        throw std::out_of_range("yz_decomposition: pivot index out of range");
    }
    const double pivot_value = path[pivot_index];
    const std::size_t n = functional.indices.size();

    // Functional times are increasing, so those <= the pivot form a prefix.
    std::size_t k_r = 0;
    while (k_r < n && functional.indices[k_r] <= pivot_index) {
        ++k_r;
    }

    // Compensated sums keep the rounding error of X, Y and Z near one ulp of
    // the largest term regardless of how many terms there are.
    CompensatedSum y;
    for (std::size_t j = 0; j < k_r; ++j) {
        y.add(functional.coeffs[j] * path[functional.indices[j]]);
    }
    CompensatedSum tail_weight;
    CompensatedSum z;
    for (std::size_t j = k_r; j < n; ++j) {
        tail_weight.add(functional.coeffs[j]);
        z.add(functional.coeffs[j] * (path[functional.indices[j]] - pivot_value));
    }
    y.add(tail_weight.value() * pivot_value);
    return YZPair{y.value(), z.value(), pivot_index, k_r};
}

YZPair yz_decomposition(const SamplePath& path, std::size_t pivot_index,
                        const LinearFunctionalSpec& spec) {
    return yz_decomposition(path, pivot_index, resolve(path.grid(), spec));
}

double ulp_distance(double a, double b, double scale) noexcept {
    const double magnitude = std::max({std::fabs(scale), std::fabs(a), std::fabs(b)});
    if (magnitude == 0.0) {
        return a == b ? 0.0 : std::numeric_limits<double>::infinity();
    }
    const double ulp = std::nextafter(magnitude, std::numeric_limits<double>::infinity()) - magnitude;
    return std::fabs(a - b) / ulp;
}

double identity_scale(const SamplePath& path, const ResolvedFunctional& functional,
                      const YZPair& yz) noexcept {
    double scale = std::max(std::fabs(yz.y), std::fabs(yz.z));
    double tail_weight = 0.0;
    for (std::size_t j = 0; j < functional.indices.size(); ++j) {
        scale = std::max(scale, std::fabs(functional.coeffs[j] * path[functional.indices[j]]));
        if (j >= yz.k_r) {
            tail_weight += functional.coeffs[j];
            scale = std::max(scale, std::fabs(functional.coeffs[j] * path[yz.pivot_index]));
        }
    }
    return std::max(scale, std::fabs(tail_weight * path[yz.pivot_index]));
}

}  // namespace reflectmc

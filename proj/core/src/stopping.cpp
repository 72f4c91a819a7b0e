// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0

#include "reflectmc/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace reflectmc {

std::size_t StopDecision::index() const {
    if (!index_) {
        throw std::logic_error("StopDecision: Never has no index");
    }
    return *index_;
}

std::string to_string(const StopDecision& decision) {
    return decision.is_never() ? std::string("never") : std::to_string(decision.index());
}

StoppingRule::StoppingRule(std::string name, Predicate stops_by, Scanner scanner)
    : name_(std::move(name)), stops_by_(std::move(stops_by)), scanner_(std::move(scanner)) {
    if (!stops_by_) {
        throw std::invalid_argument("StoppingRule: predicate required");
    }
}

StopDecision evaluate_rule(const StoppingRule& rule, const SamplePath& path) {
    return rule.has_scanner() ? rule.scan(path) : evaluate_rule_linear(rule, path);
}

StopDecision evaluate_rule_linear(const StoppingRule& rule, const SamplePath& path) {
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (rule.stops_by(path, k)) {
            return StopDecision::at(k);
        }
    }
    return StopDecision::never();
}

StopDecision evaluate_rule_bisect(const StoppingRule& rule, const SamplePath& path) {
    const std::size_t n = path.size();
    if (!rule.stops_by(path, n - 1)) {
        return StopDecision::never();
    }
    // Invariant: answer in [lo, hi], stops_by(hi) is true.
    std::size_t lo = 0;
    std::size_t hi = n - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (rule.stops_by(path, mid)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return StopDecision::at(lo);
}

namespace {

bool crosses(double value, double level) noexcept {
    return level >= 0.0 ? value >= level : value <= level;
}

}  // namespace

StoppingRule first_hitting_rule(double level) {
    std::ostringstream name;
    name << "first-hitting(" << level << ")";
    auto predicate = [level](const SamplePath& path, std::size_t k) {
        for (std::size_t i = 0; i <= k && i < path.size(); ++i) {
            if (crosses(path[i], level)) {
                return true;
            }
        }
        return false;
    };
    auto scanner = [level](const SamplePath& path) {
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (crosses(path[i], level)) {
                return StopDecision::at(i);
            }
        }
        return StopDecision::never();
    };
    return StoppingRule(name.str(), predicate, scanner);
}

StoppingRule immediate_rule() {
    return StoppingRule(
        "immediate", [](const SamplePath&, std::size_t) { return true; },
        [](const SamplePath&) { return StopDecision::at(0); });
}

StoppingRule never_rule() {
    return StoppingRule(
        "never", [](const SamplePath&, std::size_t) { return false; },
        [](const SamplePath&) { return StopDecision::never(); });
}

StoppingRule fixed_index_rule(std::size_t index) {
    return StoppingRule(
        "fixed-index(" + std::to_string(index) + ")",
        [index](const SamplePath&, std::size_t k) { return k >= index; },
        [index](const SamplePath& path) {
            return index < path.size() ? StopDecision::at(index) : StopDecision::never();
        });
}

StoppingRule final_value_peek_rule() {
    return StoppingRule("final-value-peek", [](const SamplePath& path, std::size_t) {
        return path[path.size() - 1] > 0.0;
    });
}

double dyadic_approximation(double t, int j) {
    if (!(t >= 0.0)) {
        throw std::invalid_argument("dyadic_approximation: t must be nonnegative");
    }
    if (j < 1 || j > 500) {
        throw std::invalid_argument("dyadic_approximation: level j must lie in [1, 500]");
    }
    const double cap = std::ldexp(1.0, j);
    if (t > cap) {
        return cap;
    }
    if (t == 0.0) {
        return 0.0;
    }
    // Scaling by a power of two is exact, so ceil picks the exact bucket.
    const double k = std::ceil(std::ldexp(t, j));
    return std::ldexp(k, -j);
}

StoppingRule dyadic_rounded_rule(StoppingRule base, int j) {
    // Validate j eagerly.
    (void)dyadic_approximation(0.0, j);
    auto rounded_index = [base, j](const SamplePath& path) -> std::size_t {
        const StopDecision d = evaluate_rule(base, path);
        const double t =
            d.is_never() ? std::numeric_limits<double>::infinity() : path.time(d.index());
        return path.grid().first_index_at_or_after(dyadic_approximation(t, j));
    };
    std::string name = "dyadic(" + base.name() + ", j=" + std::to_string(j) + ")";
    return StoppingRule(
        std::move(name),
        [rounded_index](const SamplePath& path, std::size_t k) { return rounded_index(path) <= k; },
        [rounded_index](const SamplePath& path) {
            const std::size_t idx = rounded_index(path);
            return idx < path.size() ? StopDecision::at(idx) : StopDecision::never();
        });
}

AuditReport causality_audit(const StoppingRule& rule, const SamplePath& path,
                            StreamSpec perturbation, std::size_t trials) {
    if (trials == 0) {
        throw std::invalid_argument("causality_audit: trials must be at least 1");
    }
    const std::size_t n = path.size();
    const StopDecision original = evaluate_rule(rule, path);
    RandomStream draws(perturbation, kAuditLane);

    AuditReport report;
    std::vector<double> values(path.values().begin(), path.values().end());
    for (std::size_t trial = 0; trial < trials; ++trial) {
        report.trials = trial + 1;
        std::size_t cut;
        if (original.is_never()) {
            if (n < 2) {
                continue;
            }
            cut = static_cast<std::size_t>(draws.uniform() * static_cast<double>(n - 1));
            cut = std::min(cut, n - 2);
        } else {
            cut = original.index();
        }
        if (cut + 1 >= n) {
            continue;
        }
        std::copy(path.values().begin(), path.values().end(), values.begin());
        resample_after(values, path.grid(), cut, draws);
        SamplePath perturbed(path.grid_handle(), values);
        const StopDecision again = evaluate_rule(rule, perturbed);

        const bool before = original.stopped_by(cut);
        const bool after = again.stopped_by(cut);
        if (before != after || (before && original.index() != again.index())) {
            report.passed = false;
            report.counterexample =
                CausalityCounterexample{trial, cut, original, again, std::move(perturbed)};
            return report;
        }
    }
    return report;
}

}  // namespace reflectmc

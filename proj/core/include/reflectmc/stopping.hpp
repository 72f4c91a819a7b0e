// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Stopping rules on discrete paths.
//
// A rule answers "has the path stopped at or before grid index k?". For the
// answer to describe a stopping time it must be
//   - monotone: once yes at k, yes at every later index, and
//   - causal:   unchanged by any modification of values[k+1..].
// Neither property can be enforced by the type system (the predicate sees
// the whole path so that anti-causal fixtures are expressible);
// causality_audit checks the second one empirically.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include "reflectmc/paths.hpp"
#include "reflectmc/rng.hpp"

namespace reflectmc {

/// Realized stopping outcome: a grid index, or Never (T = infinity).
class StopDecision {
  public:
    static StopDecision never() noexcept { return StopDecision{}; }
    static StopDecision at(std::size_t index) noexcept { return StopDecision{index}; }

    bool is_never() const noexcept { return !index_.has_value(); }
    /// Throws std::logic_error for Never.
    std::size_t index() const;
    const std::optional<std::size_t>& maybe_index() const noexcept { return index_; }

    /// True iff the decision is an index <= k.
    bool stopped_by(std::size_t k) const noexcept { return index_ && *index_ <= k; }

    friend bool operator==(const StopDecision&, const StopDecision&) = default;

  private:
    StopDecision() = default;
    explicit StopDecision(std::size_t index) : index_(index) {}

    std::optional<std::size_t> index_;
};

std::string to_string(const StopDecision& decision);

class StoppingRule {
  public:
    /// stops_by(path, k): has the rule stopped at or before index k?
    using Predicate = std::function<bool(const SamplePath&, std::size_t)>;
    /// Optional fast path returning the minimal yes-index directly. Must
    /// agree with a left-to-right scan of the predicate.
    using Scanner = std::function<StopDecision(const SamplePath&)>;

    StoppingRule(std::string name, Predicate stops_by, Scanner scanner = {});

    const std::string& name() const noexcept { return name_; }
    bool stops_by(const SamplePath& path, std::size_t k) const { return stops_by_(path, k); }
    bool has_scanner() const noexcept { return static_cast<bool>(scanner_); }
    StopDecision scan(const SamplePath& path) const { return scanner_(path); }

  private:
    std::string name_;
    Predicate stops_by_;
    Scanner scanner_;
};

/// Smallest index at which the rule answers yes, or Never. Uses the rule's
/// scanner when present, otherwise scans the predicate left to right.
StopDecision evaluate_rule(const StoppingRule& rule, const SamplePath& path);

/// Left-to-right predicate scan, ignoring any scanner.
StopDecision evaluate_rule_linear(const StoppingRule& rule, const SamplePath& path);

/// Bisection over the predicate; relies on monotonicity.
StopDecision evaluate_rule_bisect(const StoppingRule& rule, const SamplePath& path);

/// First grid index at which the path reaches or crosses `level`:
/// values[k] >= level for level >= 0, values[k] <= level for level < 0.
StoppingRule first_hitting_rule(double level);

/// Constant-yes rule: stops at index 0.
StoppingRule immediate_rule();

/// Constant-no rule: never stops.
StoppingRule never_rule();

/// Stops at the deterministic grid index `index` (Never if beyond the path).
StoppingRule fixed_index_rule(std::size_t index);

/// Deliberately anti-causal fixture: stops at 0 iff the final path value is
/// positive, otherwise never. Used to exercise causality_audit.
StoppingRule final_value_peek_rule();

/// Dyadic upper approximation of a stopping time.
///
/// Returns 2^j when t > 2^j (including t = +infinity), 0 when t = 0, and
/// otherwise k 2^-j for the k >= 1 with (k-1) 2^-j < t <= k 2^-j.
/// Throws std::invalid_argument for negative/NaN t or j outside [1, 500].
double dyadic_approximation(double t, int j);

/// Rule stopping at the first grid index whose time is >= the dyadic
/// approximation (level j) of `base`'s stopping time. Never if that time
/// lies beyond the grid horizon. Causal whenever `base` is.
StoppingRule dyadic_rounded_rule(StoppingRule base, int j);

struct CausalityCounterexample {
    std::size_t trial = 0;
    /// Values after this index were resampled.
    std::size_t cut_index = 0;
    StopDecision original = StopDecision::never();
    StopDecision perturbed = StopDecision::never();
    SamplePath perturbed_path;
};

struct AuditReport {
    bool passed = true;
    std::size_t trials = 0;
    std::optional<CausalityCounterexample> counterexample;
};

/// Future-insensitivity check of a rule on one path.
///
/// Each trial picks a cut index (the decided stop index; for Never, a
/// uniformly drawn index), resamples the path strictly after the cut with
/// fresh Brownian increments, and re-evaluates. The trial fails if the
/// answer to "stopped by the cut?" or the stop index itself (when stopped
/// by the cut) changes. Throws std::invalid_argument for trials == 0.
AuditReport causality_audit(const StoppingRule& rule, const SamplePath& path,
                            StreamSpec perturbation, std::size_t trials);

}  // namespace reflectmc

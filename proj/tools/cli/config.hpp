// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: a flat "key = value" document, one entry per
// line, '#' starts a comment. Lists are comma separated. Parsing is strict:
// unknown keys, duplicate keys and keys the chosen experiment does not use
// are all errors. Only z (4) and format (json) have defaults.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "reflectmc/verify.hpp"

namespace reflectmc::cli {

enum class ExperimentKind {
    reflection_char,
    hitting_cdf,
    running_max,
    independence,
    dyadic_study,
    causality_audit,
};

enum class OutputFormat { json, csv };

std::string_view to_string(ExperimentKind kind) noexcept;
std::string_view to_string(OutputFormat format) noexcept;

/// Validation failure. `source` is "line N", a command-line flag, or
/// "report" for configs read back from a report; `field` is the key.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string source, std::string field, const std::string& message);

    const std::string& source() const noexcept { return source_; }
    const std::string& field() const noexcept { return field_; }

  private:
    std::string source_;
    std::string field_;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::reflection_char;
    double horizon = 0.0;
    std::size_t steps = 0;
    std::size_t paths = 0;
    std::uint64_t seed = 0;

    std::string rule;                  // never | immediate | first-hitting | final-value-peek
    std::optional<double> level;       // rule, hitting or event level
    std::vector<double> times;         // functional times
    std::vector<double> coeffs;        // functional or increment coefficients
    std::optional<MonitoringMode> mode;
    std::optional<double> time;        // hitting-cdf, running-max
    std::optional<double> ks_threshold;
    std::optional<double> split_time;
    std::vector<double> future_times;
    std::string functional;            // clamped-linear | cosine
    std::optional<double> bound;
    std::string event;                 // above | running-max | sure | final-value
    std::vector<int> dyadic_levels;
    std::optional<std::size_t> trials;

    double z = kDefaultZ;
    OutputFormat format = OutputFormat::json;
};

/// Raw entry before typing: value text plus where it came from.
struct RawEntry {
    std::string value;
    std::string source;
};
using RawEntries = std::map<std::string, RawEntry, std::less<>>;

/// Splits a document into entries. Throws ConfigError on syntax errors and
/// duplicate keys.
RawEntries tokenize_config(std::string_view text);

/// Types and validates entries.
ExperimentConfig build_config(const RawEntries& entries);

/// tokenize_config + build_config.
ExperimentConfig parse_config(std::string_view text);

/// Reads and parses a file; ConfigError (source "file") if unreadable.
ExperimentConfig load_config_file(const std::string& path, const RawEntries& overrides = {});

/// Resolved config in canonical key order; numbers are JSON numbers, lists
/// JSON arrays.
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

/// Inverse of config_to_json, through the same validation as the text form.
ExperimentConfig config_from_json(const nlohmann::ordered_json& object);

/// Canonical text form; parse_config(config_to_text(c)) reproduces c.
std::string config_to_text(const ExperimentConfig& config);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace reflectmc::cli

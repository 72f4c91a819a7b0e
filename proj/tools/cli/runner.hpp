// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Runs one configured experiment and renders its report.
//
// Report schema (JSON, keys in this order):
//   experiment   string
//   config       resolved config, every key (see config_to_json)
//   statistic    number, or null when infinite
//   threshold    number
//   pass         bool, statistic <= threshold
//   n            number of paths
//   seed         master seed
//   metrics      object of named numbers
//   levels       dyadic-study only: one entry per level
//   counterexample  causality-audit only, when a rule fails
//   elapsed_ms   wall-clock run time
//   timestamp    UTC time the run finished, ISO 8601
// Everything except elapsed_ms and timestamp is a function of the config.

#pragma once

#include <string>

#include <json.hpp>

#include "cli/config.hpp"

namespace reflectmc::cli {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "REFLECTMC_OUTPUT_DIR";

struct RunResult {
    nlohmann::ordered_json report;
    bool pass = false;
};

/// Executes the experiment. Throws reflectmc::CausalityError when an
/// independence event fails its audit.
RunResult run_experiment(const ExperimentConfig& config);

/// Report with the wall-clock fields removed.
nlohmann::ordered_json strip_volatile(nlohmann::ordered_json report);

/// JSON text (2-space indent, trailing newline) or CSV with the config as
/// leading '#' comments and one row per level for dyadic studies.
std::string render_report(const nlohmann::ordered_json& report, OutputFormat format);

/// One-line human summary.
std::string summarize(const nlohmann::ordered_json& report);

/// Default output path from kOutputDirEnv, or empty when unset:
/// <dir>/<experiment>_<seed>.<json|csv>.
std::string default_output_path(const ExperimentConfig& config);

}  // namespace reflectmc::cli

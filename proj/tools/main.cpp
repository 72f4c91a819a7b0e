// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/config.hpp"
#include "cli/runner.hpp"

namespace {

using namespace reflectmc::cli;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

int execute(const ExperimentConfig& config, const std::string& out_flag) {
    const RunResult result = run_experiment(config);
    const std::string text = render_report(result.report, config.format);
    const std::string path = out_flag.empty() ? default_output_path(config) : out_flag;
    if (path.empty()) {
        std::cout << text;
    } else {
        std::ofstream file(path, std::ios::binary);
        if (!file || !(file << text)) {
            std::cerr << "reflectmc: cannot write report to " << path << "\n";
            return kExitUsage;
        }
        std::cerr << "report written to " << path << "\n";
    }
    std::cerr << summarize(result.report) << "\n";
    return result.pass ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reflected Brownian motion experiments with statistical verification."};
    app.require_subcommand(1);

    std::string config_path, report_path, out, seed, paths, format;

    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", config_path, "key = value config file")->required();
    run->add_option("--seed", seed, "Master seed (unsigned 64-bit), overrides the config");
    run->add_option("--paths", paths, "Number of paths, overrides the config");
    run->add_option("--out", out, "Report file (default: $REFLECTMC_OUTPUT_DIR/<experiment>_<seed>.<ext>, else stdout)");
    run->add_option("--format", format, "Report format, overrides the config")->check(CLI::IsMember({"json", "csv"}));

    auto* replay = app.add_subcommand("replay", "Re-run the config embedded in a JSON report");
    replay->add_option("report", report_path, "JSON report written by 'run'")->required();
    replay->add_option("--out", out, "Report file (same default as run)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (run->parsed()) {
            RawEntries overrides;
            if (!seed.empty()) overrides["seed"] = {seed, "--seed"};
            if (!paths.empty()) overrides["paths"] = {paths, "--paths"};
            if (!format.empty()) overrides["format"] = {format, "--format"};
            return execute(load_config_file(config_path, overrides), out);
        }
        std::ifstream file(report_path, std::ios::binary);
        if (!file) {
            std::cerr << "reflectmc: cannot open report " << report_path << "\n";
            return kExitUsage;
        }
        nlohmann::ordered_json report;
        try {
            report = nlohmann::ordered_json::parse(file);
        } catch (const nlohmann::json::parse_error& e) {
            std::cerr << "reflectmc: " << report_path << " is not valid JSON: " << e.what() << "\n";
            return kExitUsage;
        }
        if (!report.contains("config")) {
            std::cerr << "reflectmc: " << report_path << " has no embedded config\n";
            return kExitUsage;
        }
        return execute(config_from_json(report.at("config")), out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const reflectmc::CausalityError& e) {
        std::cerr << "causality audit failed: " << e.what() << "\n";
        return kExitFail;
    }
}

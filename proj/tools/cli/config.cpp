// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0

#include "cli/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "reflectmc/paths.hpp"

namespace reflectmc::cli {

namespace {

// Canonical order for reports and the text form.
constexpr std::array<std::string_view, 21> kKnownKeys{
    "experiment", "horizon",     "steps",      "paths",        "seed",
    "rule",       "level",       "times",      "coeffs",       "mode",
    "time",       "ks_threshold", "split_time", "future_times", "functional",
    "bound",      "event",       "dyadic_levels", "trials",    "z",
    "format",
};

bool is_known(std::string_view key) {
    return std::find(kKnownKeys.begin(), kKnownKeys.end(), key) != kKnownKeys.end();
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> items;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        items.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.size() - start : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return items;
}

ExperimentKind parse_kind(std::string_view text, const std::string& source) {
    if (text == "reflection-char") return ExperimentKind::reflection_char;
    if (text == "hitting-cdf") return ExperimentKind::hitting_cdf;
    if (text == "running-max") return ExperimentKind::running_max;
    if (text == "independence") return ExperimentKind::independence;
    if (text == "dyadic-study") return ExperimentKind::dyadic_study;
    if (text == "causality-audit") return ExperimentKind::causality_audit;
    throw ConfigError(source, "experiment",
                      "unknown experiment '" + std::string(text) +
                          "' (expected reflection-char, hitting-cdf, running-max, independence, "
                          "dyadic-study or causality-audit)");
}

// Typed access to the entry map with diagnostics naming the field.
class Reader {
  public:
    explicit Reader(const RawEntries& entries) : entries_(entries) {}

    bool has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

    const RawEntry& entry(std::string_view key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) {
            throw ConfigError("config", std::string(key), "missing required key");
        }
        return it->second;
    }

    [[noreturn]] void fail(std::string_view key, const std::string& message) const {
        const auto it = entries_.find(key);
        throw ConfigError(it == entries_.end() ? "config" : it->second.source, std::string(key), message);
    }

    std::string text(std::string_view key) const { return entry(key).value; }

    double real(std::string_view key) const { return to_real(key, entry(key).value); }

    std::uint64_t whole(std::string_view key) const { return to_whole(key, entry(key).value); }

    std::vector<double> reals(std::string_view key) const {
        std::vector<double> out;
        for (auto item : split_list(entry(key).value)) out.push_back(to_real(key, item));
        return out;
    }

    std::vector<int> levels(std::string_view key) const {
        std::vector<int> out;
        for (auto item : split_list(entry(key).value)) {
            const std::uint64_t v = to_whole(key, item);
            if (v < 1 || v > 500) fail(key, "levels must lie in [1, 500]");
            out.push_back(static_cast<int>(v));
        }
        return out;
    }

  private:
    double to_real(std::string_view key, std::string_view s) const {
        double value = 0.0;
        const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
            fail(key, "expected a number, got '" + std::string(s) + "'");
        }
        if (!std::isfinite(value)) fail(key, "must be finite");
        return value;
    }

    std::uint64_t to_whole(std::string_view key, std::string_view s) const {
        std::uint64_t value = 0;
        const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
            fail(key, "expected an unsigned integer, got '" + std::string(s) + "'");
        }
        return value;
    }

    const RawEntries& entries_;
};

void require_on_grid(const Reader& in, const TimeGrid& grid, std::string_view key, double t) {
    if (!(t > 0.0)) in.fail(key, "time " + format_double(t) + " must be positive");
    if (!grid.index_of(t)) {
        in.fail(key, "time " + format_double(t) + " is not on the grid (horizon " +
                         format_double(grid.horizon()) + ", " + std::to_string(grid.size() - 1) + " steps)");
    }
}

void require_increasing(const Reader& in, std::string_view key, const std::vector<double>& values) {
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1])) in.fail(key, "times must be strictly increasing");
    }
}

}  // namespace

std::string_view to_string(ExperimentKind kind) noexcept {
    switch (kind) {
        case ExperimentKind::reflection_char: return "reflection-char";
        case ExperimentKind::hitting_cdf: return "hitting-cdf";
        case ExperimentKind::running_max: return "running-max";
        case ExperimentKind::independence: return "independence";
        case ExperimentKind::dyadic_study: return "dyadic-study";
        case ExperimentKind::causality_audit: return "causality-audit";
    }
    return "unknown";
}

std::string_view to_string(OutputFormat format) noexcept {
    return format == OutputFormat::json ? "json" : "csv";
}

ConfigError::ConfigError(std::string source, std::string field, const std::string& message)
    : std::runtime_error(source + ": " + field + ": " + message),
      source_(std::move(source)),
      field_(std::move(field)) {}

std::string format_double(double value) {
    std::array<char, 32> buffer{};
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return std::string(buffer.data(), result.ptr);
}

RawEntries tokenize_config(std::string_view text) {
    RawEntries entries;
    std::size_t line_number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto newline = text.find('\n', start);
        std::string_view line =
            text.substr(start, newline == std::string_view::npos ? text.size() - start : newline - start);
        start = newline == std::string_view::npos ? text.size() + 1 : newline + 1;
        ++line_number;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::string source = "line " + std::to_string(line_number);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(source, std::string(line), "expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError(source, "", "missing key before '='");
        if (value.empty()) throw ConfigError(source, key, "missing value");
        if (!is_known(key)) throw ConfigError(source, key, "unknown key '" + key + "'");
        if (const auto it = entries.find(key); it != entries.end()) {
            throw ConfigError(source, key, "duplicate key (first set on " + it->second.source + ")");
        }
        entries.emplace(key, RawEntry{value, source});
    }
    return entries;
}

ExperimentConfig build_config(const RawEntries& entries) {
    const Reader in(entries);
    for (const auto& [key, entry] : entries) {
        if (!is_known(key)) throw ConfigError(entry.source, key, "unknown key '" + key + "'");
    }

    ExperimentConfig c;
    c.experiment = parse_kind(in.text("experiment"), in.entry("experiment").source);
    const ExperimentKind kind = c.experiment;
    for (std::string_view key : {"horizon", "steps", "paths", "seed"}) (void)in.entry(key);

    // Which keys this experiment reads, given the discrete choices.
    std::set<std::string, std::less<>> used{"experiment", "horizon", "steps", "paths", "seed", "z", "format"};
    std::set<std::string, std::less<>> optional{"z", "format"};
    const bool has_rule = kind == ExperimentKind::reflection_char || kind == ExperimentKind::dyadic_study ||
                          kind == ExperimentKind::causality_audit;
    if (has_rule) {
        used.insert("rule");
        c.rule = in.text("rule");
        if (c.rule != "never" && c.rule != "immediate" && c.rule != "first-hitting" &&
            c.rule != "final-value-peek") {
            in.fail("rule", "unknown rule '" + c.rule +
                                "' (expected never, immediate, first-hitting or final-value-peek)");
        }
        if (c.rule == "first-hitting") used.insert("level");
    }
    if (kind == ExperimentKind::reflection_char || kind == ExperimentKind::dyadic_study) {
        used.insert({"times", "coeffs"});
    }
    if (kind == ExperimentKind::dyadic_study) used.insert("dyadic_levels");
    if (kind == ExperimentKind::causality_audit) used.insert("trials");
    if (kind == ExperimentKind::hitting_cdf) used.insert({"level", "time", "mode"});
    if (kind == ExperimentKind::running_max) used.insert({"time", "mode", "ks_threshold"});
    if (kind == ExperimentKind::independence) {
        used.insert({"split_time", "future_times", "functional", "coeffs", "event"});
        c.functional = in.text("functional");
        if (c.functional == "clamped-linear") {
            used.insert("bound");
        } else if (c.functional != "cosine") {
            in.fail("functional", "unknown functional '" + c.functional + "' (expected clamped-linear or cosine)");
        }
        c.event = in.text("event");
        if (c.event == "above" || c.event == "running-max") {
            used.insert("level");
        } else if (c.event != "sure" && c.event != "final-value") {
            in.fail("event", "unknown event '" + c.event + "' (expected above, running-max, sure or final-value)");
        }
    }

    for (const auto& [key, entry] : entries) {
        if (!used.contains(key)) {
            throw ConfigError(entry.source, key,
                              "key does not apply to experiment " + std::string(to_string(kind)));
        }
    }
    for (std::string_view key : kKnownKeys) {
        if (used.contains(key) && !optional.contains(key)) (void)in.entry(key);
    }

    c.horizon = in.real("horizon");
    if (!(c.horizon > 0.0)) in.fail("horizon", "must be positive");
    c.steps = in.whole("steps");
    if (c.steps < 1) in.fail("steps", "must be at least 1");
    c.paths = in.whole("paths");
    std::size_t min_paths = 1;
    if (kind == ExperimentKind::reflection_char || kind == ExperimentKind::dyadic_study) min_paths = 1000;
    if (kind == ExperimentKind::hitting_cdf || kind == ExperimentKind::independence) min_paths = 2;
    if (c.paths < min_paths) in.fail("paths", "must be at least " + std::to_string(min_paths));
    c.seed = in.whole("seed");
    if (in.has("z")) {
        c.z = in.real("z");
        if (!(c.z > 0.0)) in.fail("z", "must be positive");
    }
    if (in.has("format")) {
        const std::string f = in.text("format");
        if (f == "json") {
            c.format = OutputFormat::json;
        } else if (f == "csv") {
            c.format = OutputFormat::csv;
        } else {
            in.fail("format", "expected json or csv");
        }
    }

    const TimeGrid grid = uniform_grid(c.horizon, c.steps);

    if (used.contains("level")) {
        c.level = in.real("level");
        if (kind == ExperimentKind::hitting_cdf && !(*c.level > 0.0)) in.fail("level", "must be positive");
    }
    if (used.contains("times")) {
        c.times = in.reals("times");
        require_increasing(in, "times", c.times);
        for (double t : c.times) require_on_grid(in, grid, "times", t);
    }
    if (used.contains("coeffs")) c.coeffs = in.reals("coeffs");
    if (used.contains("mode")) {
        try {
            c.mode = parse_monitoring_mode(in.text("mode"));
        } catch (const std::invalid_argument& e) {
            in.fail("mode", e.what());
        }
    }
    if (used.contains("time")) {
        c.time = in.real("time");
        require_on_grid(in, grid, "time", *c.time);
    }
    if (used.contains("ks_threshold")) {
        c.ks_threshold = in.real("ks_threshold");
        if (!(*c.ks_threshold > 0.0)) in.fail("ks_threshold", "must be positive");
    }
    if (used.contains("split_time")) {
        c.split_time = in.real("split_time");
        require_on_grid(in, grid, "split_time", *c.split_time);
        c.future_times = in.reals("future_times");
        require_increasing(in, "future_times", c.future_times);
        for (double t : c.future_times) {
            require_on_grid(in, grid, "future_times", t);
            if (!(t > *c.split_time)) in.fail("future_times", "times must be after split_time");
        }
    }
    if (used.contains("bound")) {
        c.bound = in.real("bound");
        if (!(*c.bound > 0.0)) in.fail("bound", "must be positive");
    }
    if (used.contains("dyadic_levels")) {
        c.dyadic_levels = in.levels("dyadic_levels");
        try {
            check_dyadic_compatible(grid, c.dyadic_levels);
        } catch (const std::invalid_argument& e) {
            in.fail("dyadic_levels", e.what());
        }
    }
    if (used.contains("trials")) {
        c.trials = in.whole("trials");
        if (*c.trials < 1) in.fail("trials", "must be at least 1");
    }

    const std::size_t expected_coeffs =
        kind == ExperimentKind::independence ? c.future_times.size() : c.times.size();
    if (used.contains("coeffs") && c.coeffs.size() != expected_coeffs) {
        in.fail("coeffs", "expected " + std::to_string(expected_coeffs) + " coefficients, got " +
                              std::to_string(c.coeffs.size()));
    }
    return c;
}

ExperimentConfig parse_config(std::string_view text) { return build_config(tokenize_config(text)); }

ExperimentConfig load_config_file(const std::string& path, const RawEntries& overrides) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw ConfigError("file", path, "cannot open config file");
    std::ostringstream buffer;
    buffer << file.rdbuf();
    RawEntries entries = tokenize_config(buffer.str());
    for (const auto& [key, entry] : overrides) entries.insert_or_assign(key, entry);
    return build_config(entries);
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    out["experiment"] = std::string(to_string(c.experiment));
    out["horizon"] = c.horizon;
    out["steps"] = c.steps;
    out["paths"] = c.paths;
    out["seed"] = c.seed;
    if (!c.rule.empty()) out["rule"] = c.rule;
    if (c.level) out["level"] = *c.level;
    if (!c.times.empty()) out["times"] = c.times;
    if (!c.coeffs.empty()) out["coeffs"] = c.coeffs;
    if (c.mode) out["mode"] = std::string(to_string(*c.mode));
    if (c.time) out["time"] = *c.time;
    if (c.ks_threshold) out["ks_threshold"] = *c.ks_threshold;
    if (c.split_time) out["split_time"] = *c.split_time;
    if (!c.future_times.empty()) out["future_times"] = c.future_times;
    if (!c.functional.empty()) out["functional"] = c.functional;
    if (c.bound) out["bound"] = *c.bound;
    if (!c.event.empty()) out["event"] = c.event;
    if (!c.dyadic_levels.empty()) out["dyadic_levels"] = c.dyadic_levels;
    if (c.trials) out["trials"] = *c.trials;
    out["z"] = c.z;
    out["format"] = std::string(to_string(c.format));
    return out;
}

namespace {

std::string json_scalar_text(const nlohmann::ordered_json& value, const std::string& key) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_unsigned()) return std::to_string(value.get<std::uint64_t>());
    if (value.is_number_integer()) return std::to_string(value.get<std::int64_t>());
    if (value.is_number_float()) return format_double(value.get<double>());
    throw ConfigError("report", key, "unsupported value " + value.dump());
}

std::string json_value_text(const nlohmann::ordered_json& value, const std::string& key) {
    if (!value.is_array()) return json_scalar_text(value, key);
    std::string text;
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (i > 0) text += ",";
        text += json_scalar_text(value[i], key);
    }
    return text;
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::ordered_json& object) {
    if (!object.is_object()) throw ConfigError("report", "config", "expected a JSON object");
    RawEntries entries;
    for (const auto& [key, value] : object.items()) {
        entries.emplace(key, RawEntry{json_value_text(value, key), "report"});
    }
    return build_config(entries);
}

std::string config_to_text(const ExperimentConfig& config) {
    std::string out;
    const nlohmann::ordered_json object = config_to_json(config);
    for (const auto& [key, value] : object.items()) {
        out += key + " = " + json_value_text(value, key) + "\n";
    }
    return out;
}

}  // namespace reflectmc::cli

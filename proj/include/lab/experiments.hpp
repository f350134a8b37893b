#pragma once

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace lab {

using Json = nlohmann::json;

struct ExperimentInfo {
    std::string tag;
    std::string summary;
    std::string reproduces;
};

const std::vector<ExperimentInfo>& experiment_catalog();
std::string catalog_text();
Json catalog_json();

// Raised for schema violations; the runner maps it to exit status 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentOutput {
    bool pass = false;
    Json report;
    std::vector<std::string> files;  // relative to the run directory
};

// Checks the tag and every key, filling defaults; returns the completed config.
Json validate_config(const Json& config);

// Writes CSV tables into dir. All randomness comes from rng.
ExperimentOutput run_experiment(const Json& config, const std::string& dir, std::mt19937_64& rng);

struct RunOptions {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
};

struct RunResult {
    int exit_code = 1;  // 0 pass, 2 check failure, 1 error
    std::string run_dir;
    std::string message;
};

// Loads the JSON file, applies flag overrides, runs, and writes manifest.json under
// out/<tag>/<timestamp>/.
RunResult run_config_file(const std::string& path, const RunOptions& opt);
RunResult run_config(Json config, const RunOptions& opt);

} // namespace lab

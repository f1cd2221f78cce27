#pragma once

#include "qstoch/cli/config.hpp"

#include <map>
#include <string>
#include <vector>

namespace qstoch::cli {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
};

struct FileRecord {
    std::string path;  // relative to the output directory
    std::string sha256;
};

struct RunManifest {
    ExperimentConfig config;
    std::string version;
    std::string verdict;
    std::map<std::string, double> residuals;
    std::vector<CheckResult> checks;
    std::vector<FileRecord> files;
    std::string details_json = "{}";  // experiment-specific extras
    double duration_seconds = 0.0;

    bool all_passed() const;
    int exit_code() const { return all_passed() ? 0 : 2; }
};

std::string artifact_version();

// %.17g, enough to round-trip any double.
std::string format_number(double x);

// Runs the experiment, writes the requested files under config.output and,
// when json is requested, report.json. Module errors propagate as
// qstoch::Error with the experiment name prefixed.
RunManifest run(const ExperimentConfig& config);

}  // namespace qstoch::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "slar/config.hpp"
#include "slar/game.hpp"
#include "slar/oracle.hpp"

#include <json.hpp>

namespace slar::cli {

enum ExitCode : int {
    kOk = 0,
    kVerificationFailed = 1,
    kConfigError = 2,
    kSolverError = 3,
    kIoError = 4,
};

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    bool quiet = false;
};

/// Applies --seed / --out on top of a parsed config.
ExperimentConfig apply_overrides(ExperimentConfig cfg, const RunOptions& opts);

struct MethodResult {
    Method method;
    Trajectory trajectory;
};

struct RunOutput {
    std::vector<MethodResult> results;
    std::vector<double> means;
    std::optional<ConditionReport> conditions;
};

/// Samples (or enumerates) the data and runs every configured method.
RunOutput run_experiment(const ExperimentConfig& cfg);

/// deltaw statistics over the last half of the records (all records when there is one).
double deltaw_mean_tail(const Trajectory& traj);
double deltaw_min_tail(const Trajectory& traj);

nlohmann::json condition_json(const ConditionReport& r);
nlohmann::json summary_json(const RunOutput& run);

/// Writes trajectory_<m>.csv, weights_<m>.csv, summary.json and, when enabled, the SVG figures.
void write_artifacts(const RunOutput& run, const ExperimentConfig& cfg, const std::filesystem::path& dir);

int cmd_run(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log);
int cmd_gen(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log);

// Verification ----------------------------------------------------------------

/// The fixed oracle suite behind `slar verify builtin`.
std::vector<CheckResult> builtin_suite(std::uint64_t seed);
/// Checks that apply to one configured distribution.
std::vector<CheckResult> config_suite(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 14695981039346656037ull);
nlohmann::json verification_json(const std::vector<CheckResult>& checks);

int cmd_verify(const std::vector<CheckResult>& checks, const std::filesystem::path& dir, bool quiet,
               std::ostream& log);

}  // namespace slar::cli

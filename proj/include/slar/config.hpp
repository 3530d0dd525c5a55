#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "slar/dist.hpp"
#include "slar/game.hpp"
#include "slar/solve.hpp"

namespace slar::cli {

/// Invalid configuration. `field()` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

enum class TrainOn { data, population };
enum class InitKind { zero, uniform };

struct ExperimentConfig {
    DistributionSpec spec;
    std::size_t n_train = 10000;
    std::size_t n_test = 1000;
    double eps = 0.02;
    double lambda = 0.01;
    std::vector<Method> methods{Method::standard, Method::at, Method::oat, Method::ne};
    std::size_t rounds = 50;
    bool exact = false;
    ExactBR exact_cfg;
    Stochastic sgd_cfg;
    bool warm_start = true;
    InitKind init = InitKind::zero;
    TrainOn train_on = TrainOn::data;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
    bool emit_plots = true;
    unsigned threads = 1;

    /// Game settings for this experiment; init_w is drawn from `seed` when init = uniform.
    GameConfig game_config() const;
};

/**
 * Parses the flat `key = value` format (see docs/config.md). `#` starts a
 * comment. Throws ConfigError with the key name on any invalid field.
 */
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig parse_config_text(const std::string& text);
/// Throws io::IoError when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Named configurations shipped with the tool: "experiment", "exact-discrete", "smoke".
std::optional<ExperimentConfig> builtin_config(std::string_view name);
std::string builtin_config_text(std::string_view name);

/// Canonical text of a parsed config (stable key order, 17-digit floats).
std::string to_text(const ExperimentConfig& cfg);

}  // namespace slar::cli

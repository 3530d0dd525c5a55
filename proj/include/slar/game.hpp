#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slar/dist.hpp"
#include "slar/model.hpp"
#include "slar/solve.hpp"

namespace slar {

enum class Method { standard, at, oat, ne };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view s);

struct GameConfig {
    double eps = 0.0;
    double lambda = 0.01;
    std::size_t rounds = 1;
    /// solver.lambda is ignored; the game's lambda is used.
    OptimizerConfig solver;
    /// w^(0); empty means zero, so the first adversary move is delta = 0.
    std::vector<double> init_w;
    /// Stochastic AT only: keep one optimizer (weights and Adam moments)
    /// across rounds. ExactBR rounds are always solved from scratch.
    bool warm_start = true;

    /// Throws std::invalid_argument naming the offending field.
    void validate(std::size_t dim) const;
};

struct TrajectoryRecord {
    std::size_t t = 0;
    Weights w;
    PerturbationPlan v;
    double delta_w_norm = 0.0;
    double w_norm = 0.0;
    /// 0 when w = 0.
    double nonrobust_mass = 0.0;
    double std_acc_train = 0.0;
    double std_acc_test = 0.0;
    double robust_acc_test = 0.0;
    double objective = 0.0;
    /// Certified objective gap of the round's solve; NaN for Stochastic.
    double gap = 0.0;
};

struct Trajectory {
    GameConfig config;
    Method method = Method::at;
    std::vector<TrajectoryRecord> records;
    /// Set when a solve failed; records hold the rounds completed before it.
    std::optional<std::string> error;

    bool ok() const { return !error.has_value(); }
    const TrajectoryRecord& last() const { return records.back(); }
};

/**
 * What a game is played on. Views are non-owning: the Support/Dataset
 * objects behind them must outlive every run.
 */
struct GameData {
    LabelledView train;
    LabelledView test;
    /// mu_i = E[y x_i], from the spec or estimated from the training set.
    std::vector<double> means;
    /// max_i stderr(mu_i) when means were estimated, else 0.
    double estimation_error = 0.0;

    /// Exact population game: both views point at the enumerated support.
    static GameData population(const Support& support, const DistributionSpec& spec);
    /// Sampled game. Means come from `spec` when given, otherwise from `train`.
    static GameData empirical(const Dataset& train, const Dataset& test, const DistributionSpec* spec = nullptr);
};

/// Alternating best response: delta^(t) = worst_case_plan(w^(t-1)), w^(t) = fit on the perturbed data.
Trajectory run_at(const GameData& data, const GameConfig& config);

/// Minimizes the robust objective. One record under ExactBR; one record per
/// `epochs` epochs for `rounds` rounds under Stochastic.
Trajectory run_oat(const GameData& data, const GameConfig& config);

/// Plain SVM training (v = 0); records as in run_oat.
Trajectory run_standard(const GameData& data, const GameConfig& config);

struct NEResult {
    PerturbationPlan plan;
    Weights weights;
    Trajectory trajectory;
    double estimation_error = 0.0;
};

/// Plays ne_plan(means, eps) and best-responds to it.
NEResult run_ne(const GameData& data, const GameConfig& config);

Trajectory run_method(Method m, const GameData& data, const GameConfig& config);

struct NEReport {
    /// row_utility(worst_case_plan(w), w) - row_utility(plan, w); <= tol when the plan is a best response.
    double row_gap = 0.0;
    /// Upper bound on row_utility(plan, w) - min_w' row_utility(plan, w').
    double column_gap = 0.0;
    bool row_ok = false;
    bool column_ok = false;
    bool passed = false;
    std::string detail;
};

/**
 * Checks both best-response conditions of a candidate equilibrium. The row
 * check is exact because the worst-case plan attains the adversary's sup.
 * The column check re-solves with ExactBR at `solve_tolerance` and uses the
 * certified lower bound on the optimum.
 */
NEReport verify_ne(const PerturbationPlan& plan, const Weights& weights, const LabelledView& data, double eps,
                   double tol, double solve_tolerance = 1e-12);

}  // namespace slar

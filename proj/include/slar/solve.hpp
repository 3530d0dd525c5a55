#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "slar/dist.hpp"
#include "slar/model.hpp"

namespace slar {

/**
 * Deterministic exact best response.
 *
 * Dual coordinate ascent on the hinge-loss dual; stops once the duality gap,
 * which bounds the primal objective gap from above, is <= tolerance.
 * `max_iters` counts full sweeps over the data. `init_seed` = 0 starts
 * from the zero dual vector (w = 0); any other value starts from a random
 * dual point and changes the coordinate order.
 */
struct ExactBR {
    double tolerance = 1e-8;
    std::size_t max_iters = 200000;
    std::uint64_t init_seed = 0;
};

/// Mini-batch Adam on the empirical objective; no optimality certificate.
struct Stochastic {
    double learning_rate = 0.01;
    std::size_t batch_size = 200;
    std::size_t epochs = 1;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
};

struct OptimizerConfig {
    std::variant<ExactBR, Stochastic> method = ExactBR{};
    double lambda = 0.01;
    /// Starting weights for Stochastic; empty means zero.
    std::vector<double> init;

    bool exact() const { return std::holds_alternative<ExactBR>(method); }
    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct FitResult {
    Weights weights;
    double objective = 0.0;
    /// Certified objective gap for ExactBR; NaN for Stochastic.
    double gap = 0.0;
    std::size_t iterations = 0;
    bool certified = false;

    /// Radius of the ball around the unique minimizer that contains `weights`,
    /// from lambda-strong convexity: sqrt(2 gap / lambda). Infinite when uncertified.
    double weight_radius() const;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double gap, std::size_t iterations)
        : std::runtime_error(what), gap_(gap), iterations_(iterations) {}
    double gap() const { return gap_; }
    std::size_t iterations() const { return iterations_; }

private:
    double gap_;
    std::size_t iterations_;
};

/// Minimizes E[max(0, 1 - y<w, x + delta(x,y)>)] + (lambda/2)||w||^2.
FitResult fit_svm(const LabelledView& data, const PerturbationPlan& plan, const OptimizerConfig& config);
FitResult fit_svm(const Dataset& data, const PerturbationPlan& plan, const OptimizerConfig& config);
FitResult fit_svm(const DistributionSpec& spec, const PerturbationPlan& plan, const OptimizerConfig& config);

/// Minimizes E[max(0, 1 - y<w,x> + eps||w||_1)] + (lambda/2)||w||^2.
FitResult fit_oat(const LabelledView& data, double eps, const OptimizerConfig& config);
FitResult fit_oat(const Dataset& data, double eps, const OptimizerConfig& config);
FitResult fit_oat(const DistributionSpec& spec, double eps, const OptimizerConfig& config);

struct UniquenessReport {
    double max_pairwise_distance = 0.0;
    /// 2 sqrt(2 tolerance / lambda): what strong convexity allows.
    double certified_bound = 0.0;
    Weights weights;
    std::vector<double> gaps;
};

/// Runs ExactBR from `trials` different dual starting points (seeds 0..trials-1).
UniquenessReport certify_unique(const LabelledView& data, const PerturbationPlan& plan, double lambda,
                                double tolerance, std::size_t trials);
UniquenessReport certify_unique(const LabelledView& data, const PerturbationPlan& plan, double lambda,
                                double tolerance, std::span<const std::uint64_t> init_seeds);

struct PerturbedHinge {
    PerturbationPlan plan;
};
struct RobustHinge {
    double eps;
};
using TrainingLoss = std::variant<PerturbedHinge, RobustHinge>;

/**
 * Stateful Adam optimizer over the weight vector. Keeping one trainer alive
 * across several calls continues training, moments included.
 *
 * Each epoch visits the data in a permutation drawn from (seed, epoch index).
 * Batch losses are means over the batch plus (lambda/2)||w||^2.
 */
class AdamTrainer {
public:
    AdamTrainer(std::size_t dim, double lambda, Stochastic config, std::vector<double> init = {});

    void run_epoch(const LabelledView& data, const TrainingLoss& loss);

    const std::vector<double>& weights() const { return w_; }
    Weights snapshot() const { return {w_, lambda_}; }
    std::size_t epochs_done() const { return epoch_; }
    std::size_t steps() const { return step_; }

private:
    void step(std::span<const double> grad);

    double lambda_;
    Stochastic cfg_;
    std::vector<double> w_, m_, v_, grad_;
    std::size_t epoch_ = 0;
    std::size_t step_ = 0;
};

}  // namespace slar

#pragma once

#include <span>
#include <vector>

#include "slar/dist.hpp"

namespace slar {

/// Linear model f(x) = <w, x> (no intercept) and its regularization strength.
struct Weights {
    std::vector<double> w;
    double lambda = 1.0;

    std::size_t dim() const { return w.size(); }
};

/**
 * Class-conditional shift. The realized perturbation of (x, y) is
 * delta(x, y) = -y * v, and every entry satisfies |v_i| <= eps.
 */
class PerturbationPlan {
public:
    PerturbationPlan() = default;
    /// Throws std::invalid_argument when eps < 0 or ||v||_inf > eps.
    PerturbationPlan(std::vector<double> v, double eps);

    static PerturbationPlan zero(std::size_t dim, double eps = 0.0);

    const std::vector<double>& v() const { return v_; }
    double eps() const { return eps_; }
    std::size_t dim() const { return v_.size(); }

private:
    std::vector<double> v_;
    double eps_ = 0.0;
};

struct Accuracy {
    double standard = 0.0;
    double certified_robust = 0.0;
};

/// sign with sign(0) = 0.
inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm1(std::span<const double> a);
double distance2(std::span<const double> a, std::span<const double> b);

double hinge_loss(const Weights& w, std::span<const double> x, int y);

/// max(0, 1 - y<w,x> + <w,v>), i.e. the hinge loss at x + delta(x, y).
double perturbed_loss(const Weights& w, std::span<const double> x, int y, const PerturbationPlan& plan);

/// max(0, 1 - y<w,x> + eps ||w||_1): the loss under the worst admissible perturbation.
double robust_loss(const Weights& w, std::span<const double> x, int y, double eps);

/// Expected perturbed loss plus (lambda/2)||w||^2. The regularizer does not
/// depend on the plan but is kept so the value is the full game payoff.
double row_utility(const PerturbationPlan& plan, const Weights& w, const LabelledView& data);
double row_utility(const PerturbationPlan& plan, const Weights& w, const Dataset& data);
/// Exact expectation; throws std::invalid_argument for specs with a Gaussian feature.
double row_utility(const PerturbationPlan& plan, const Weights& w, const DistributionSpec& spec);

/// Expected robust loss plus (lambda/2)||w||^2.
double robust_objective(const Weights& w, double eps, const LabelledView& data);

/// v = eps * sign(w), sign(0) = 0.
PerturbationPlan worst_case_plan(const Weights& w, double eps);

/**
 * Equilibrium shift: eps * sign(mu_i) on robust features, mu_i on
 * non-robust ones, so every non-robust feature has conditional mean 0
 * after the shift.
 */
PerturbationPlan ne_plan(std::span<const double> means, double eps);
PerturbationPlan ne_plan(const DistributionSpec& spec, double eps);

/// y<w,x> - eps ||w||_1. Positive iff every x' in the eps-box around x is classified correctly.
double certified_margin(const Weights& w, std::span<const double> x, int y, double eps);

/// Weighted fractions; a margin of exactly 0 counts as an error.
Accuracy evaluate(const Weights& w, const LabelledView& data, double eps);
Accuracy evaluate(const Weights& w, const Dataset& data, double eps);

/// Share of ||w||^2 carried by features with |mu_i| <= eps. Throws for w = 0.
double nonrobust_mass(const Weights& w, std::span<const double> means, double eps);
double nonrobust_mass(const Weights& w, const DistributionSpec& spec, double eps);

}  // namespace slar

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "slar/dist.hpp"
#include "slar/game.hpp"
#include "slar/model.hpp"
#include "slar/solve.hpp"

namespace slar {

// ---------------------------------------------------------------------------
// Condition arithmetic
// ---------------------------------------------------------------------------

/// How the supremum over s in {-1,0,1}^D was obtained.
enum class SupMethod {
    exhaustive,   // all 3^D sign patterns
    grouped,      // exact; features with identical (mu, sigma^2) only matter through counts
    closed_form,  // s_i = -sign(mu_i) if 2|mu_i| > eps else 0; exact only for equal variances
};

std::string_view to_string(SupMethod m);

/// The quantity 1 - threshold for one shift pattern s, with m = mu + eps*s.
struct ShiftTerm {
    std::vector<int> s;
    double sigma_bar = 0.0;     // sqrt(sum m_i^2 sigma_i^2 / ||m||^2)
    double shifted_norm = 0.0;  // ||m||_2
    double value = 0.0;         // 1/2 (sigma_bar/||m|| + lambda/(2||m||^2)) + 1/2 sqrt(2/lambda) sigma_bar
};

struct ConditionReport {
    double p = 0.0;
    double eps = 0.0;
    double lambda = 0.0;

    /// max_{j>=2} sigma_j (feature 1 is bounded by 1 separately).
    double sigma_max = 0.0;
    double mu_norm = 0.0;
    /// ||mu'||_2 with feature 1 zeroed.
    double mu_prime_norm = 0.0;
    double sigma_bar_mu = 0.0;

    /// Standard-training bound (s = 0, all features).
    double p_threshold_standard = 0.0;
    /// Adversarial-training bound: 1 - sup_s of the shift term.
    double p_threshold_at = 0.0;
    /// Bound with sigma_bar replaced by `sigma_bound` and ||mu + eps s|| by ||mu'||.
    double p_threshold_at_simplified = 0.0;
    /// sigma_max when sigma_max >= 1, else sigma_max + (1+eps) sqrt(1 - sigma_max^2)/||mu'||.
    double sigma_bound = 0.0;
    /// eps > 2 mu_j for every j >= 2: the simplified bound is then <= the sup bound.
    bool simplified_applicable = false;

    SupMethod sup_method = SupMethod::exhaustive;
    ShiftTerm sup;
    /// All 3^D terms, kept only for D <= 8.
    std::vector<ShiftTerm> per_s;

    bool holds_standard = false;
    bool holds_at = false;
    bool holds_at_simplified = false;

    double margin_standard() const { return p_threshold_standard - p; }
    double margin_at() const { return p_threshold_at - p; }
    double margin_at_simplified() const { return p_threshold_at_simplified - p; }
};

inline constexpr std::size_t kMaxExhaustiveDim = 13;
inline constexpr std::uint64_t kMaxGroupedCombos = 200'000'000;

/**
 * Evaluates the standard, sup-over-s and simplified conditions for a spec
 * whose feature 1 is TwoPoint(p). Uses exhaustive enumeration when
 * D <= 13, grouped enumeration when it fits the combination cap, and the
 * closed-form s* only when `allow_closed_form` is set (else throws
 * std::invalid_argument).
 */
ConditionReport evaluate_conditions(const DistributionSpec& spec, double eps, double lambda,
                                   bool allow_closed_form = false);

double shift_term_value(double m2, double weighted, double lambda);

/// Each of these returns the maximizing term; `per_s` gets every term when non-null.
ShiftTerm sup_term_exhaustive(std::span<const double> means, std::span<const double> variances, double eps,
                              double lambda, std::vector<ShiftTerm>* per_s = nullptr);
ShiftTerm sup_term_grouped(std::span<const double> means, std::span<const double> variances, double eps,
                           double lambda);
ShiftTerm sup_term_closed_form(std::span<const double> means, std::span<const double> variances, double eps,
                               double lambda);
ShiftTerm shift_term(std::span<const double> means, std::span<const double> variances, double eps, double lambda,
                     std::vector<int> s);

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

enum class CheckStatus { pass, fail, skipped };

struct CheckResult {
    std::string name;
    CheckStatus status = CheckStatus::pass;
    /// Smallest slack over the sub-checks; negative means violated.
    double margin = 0.0;
    /// Canonical text of the inputs; hashed into the report digest.
    std::string inputs;
    std::string detail;

    bool ok() const { return status != CheckStatus::fail; }
};

struct EmaxReport {
    double mean = 0.0;
    double variance = 0.0;
    double emax = 0.0;
    double lower = 0.0;  // max(0, E X)
    double upper = 0.0;  // max(0, E X) + sqrt(Var X)/2
    /// Monte-Carlo half-width applied to emax (0 for exact laws).
    double band = 0.0;
    bool passed = false;
};

/// Exact for a finite law.
EmaxReport check_emax_bounds(std::span<const double> values, std::span<const double> probs);
/// Exact for a Gaussian via the closed form of E[max(0, X)].
EmaxReport check_emax_bounds_gaussian(double mean, double stdev);
/// Monte-Carlo with a 5-sigma band on every estimated quantity.
EmaxReport check_emax_bounds_sampled(const std::function<double(std::mt19937_64&)>& draw, std::size_t n,
                                     std::uint64_t seed);

/// Exact-solves the clean SVM and checks sign(w_i) against sign(mu_i), and w_i = 0 where mu_i = 0,
/// up to the certified weight radius plus `tol`.
CheckResult check_clean_signs(const DistributionSpec& spec, double lambda, double solve_tolerance, double tol = 0.0);

/// Upper bound sqrt(2/lambda) and the lower bound from means/variances (skipped when its right side is <= 0).
/// `radius` is the certified distance of `w` from the exact minimizer.
CheckResult check_norm_bounds(const Weights& w, double radius, std::span<const double> means,
                              std::span<const double> variances);

double norm_lower_bound(std::span<const double> means, std::span<const double> variances, double lambda);

using Adversary = std::function<PerturbationPlan(const Weights&, double)>;

/**
 * For `trials` random (w, x, y) in dimension d, compares the hinge loss at
 * delta = -y v (v from `adversary`) with the maximum over the grid
 * {-eps, ..., eps}^d with k points per axis. Exact comparison.
 */
CheckResult check_worst_case_grid(std::size_t d, double eps, std::size_t k, std::size_t trials, std::uint64_t seed,
                              const Adversary& adversary = worst_case_plan);

// Trajectory checks. Coordinates with |mu_i| <= eps are the non-robust ones.

struct SignFlipCounts {
    std::size_t checked = 0;
    std::size_t unconstrained = 0;  // |w_i^(t)| <= tol: neither branch applies
    std::size_t violations = 0;
};

/// w_i^(t) > tol implies w_i^(t+1) <= tol, and symmetrically.
CheckResult check_sign_flips(const Trajectory& traj, std::span<const double> means, double eps, double tol,
                             SignFlipCounts* counts = nullptr);

/// ||w^(t) - w^(t-1)||^2 >= sum over non-robust i of (w_i^(t-1))^2 - tol, for every round (w^(0) = init).
CheckResult check_flip_distance(const Trajectory& traj, std::span<const double> means, double eps, double tol);

/// Over the last half of the rounds: ||w^(t+1) - w^(t)|| >= (1-eps)||w^(t)|| / sqrt((1-eps)^2 + sum_{j>=2}(mu_j+eps)^2) - tol.
/// Skipped unless `conditions.holds_at`.
CheckResult check_nonconvergence(const Trajectory& traj, std::span<const double> means, double eps, double tol,
                                 const ConditionReport& conditions);

/// run_ne weights put at most `mass_tol` of ||w||^2 on non-robust features, and verify_ne passes at `tol`.
CheckResult check_ne(const NEResult& ne, const LabelledView& data, double eps, double tol, double mass_tol);

/// Every non-robust |w_j| <= tol for the exact robust-objective minimizer.
CheckResult check_oat_robust(const DistributionSpec& spec, double eps, double lambda, double solve_tolerance,
                             double tol);

CheckResult check_uniqueness(const LabelledView& data, const PerturbationPlan& plan, double lambda,
                             double solve_tolerance, double tol, std::size_t trials = 3);

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

struct RandomSpecOptions {
    std::size_t min_dim = 2;
    std::size_t max_dim = 6;
    std::size_t max_atoms = 3;
    double eps = 0.1;
    /// Chance that a feature is made non-robust (|mu| <= eps).
    double nonrobust_fraction = 0.5;
    /// Chance that a feature gets mean exactly 0.
    double zero_mean_fraction = 0.0;
    /// Feature 1 is always robust, so the equilibrium weight is nonzero.
    bool first_robust = true;
};

/// Finitely supported spec with DiscreteSymmetric features, values in [-1, 1].
DistributionSpec random_discrete_spec(std::uint64_t seed, const RandomSpecOptions& opts = {});

/// Canonical text for a spec (used in check inputs and digests).
std::string describe(const DistributionSpec& spec);

}  // namespace slar

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace slar {

/// x = y with probability p, x = -y otherwise.
struct TwoPoint {
    double p;
};

/// x | y ~ N(y * mean, stdev^2).
struct Gaussian {
    double mean;
    double stdev;
};

/// Finite law of x given y = +1; the y = -1 law is its mirror image.
struct DiscreteSymmetric {
    std::vector<double> values;
    std::vector<double> probs;
};

/**
 * Conditional law of one feature given the label.
 *
 * Every kind satisfies E[x | y] = y * mean() by construction: the y = -1
 * law is always the reflection of the y = +1 law.
 */
class FeatureSpec {
public:
    using Kind = std::variant<TwoPoint, Gaussian, DiscreteSymmetric>;

    static FeatureSpec two_point(double p);
    static FeatureSpec gaussian(double mean, double stdev);
    static FeatureSpec discrete(std::vector<double> values, std::vector<double> probs);

    const Kind& kind() const { return kind_; }
    bool is_gaussian() const { return std::holds_alternative<Gaussian>(kind_); }
    bool finite_support() const { return !is_gaussian(); }

    /// E[x | y = +1]
    double mean() const;
    double variance() const;
    double stdev() const;

    /// (value, probability) pairs of the y = +1 law. Throws for Gaussian features.
    std::vector<std::pair<double, double>> support() const;

    double draw(int y, std::mt19937_64& rng) const;

private:
    explicit FeatureSpec(Kind k) : kind_(std::move(k)) {}
    Kind kind_;
};

/// Features are conditionally independent given a uniform label; there is
/// no place to put joint parameters.
struct DistributionSpec {
    std::vector<FeatureSpec> features;

    std::size_t dim() const { return features.size(); }
    std::vector<double> means() const;
    std::vector<double> variances() const;
    bool finite_support() const;
};

/// Non-owning weighted view of labelled points. Empty weights mean uniform.
struct LabelledView {
    std::size_t dim = 0;
    std::span<const double> points;
    std::span<const int> labels;
    std::span<const double> weights;

    std::size_t size() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const { return points.subspan(i * dim, dim); }
    double weight(std::size_t i) const {
        return weights.empty() ? 1.0 / static_cast<double>(labels.size()) : weights[i];
    }
    bool uniform() const { return weights.empty(); }
};

struct Dataset {
    std::size_t dim = 0;
    std::vector<double> points;  // row-major, size() x dim
    std::vector<int> labels;
    std::uint64_t seed = 0;

    std::size_t size() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(points).subspan(i * dim, dim);
    }
    LabelledView view() const { return {dim, points, labels, {}}; }
};

/// Exact joint support of a finitely supported spec.
struct Support {
    std::size_t dim = 0;
    std::vector<double> points;
    std::vector<int> labels;
    std::vector<double> probs;

    std::size_t size() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(points).subspan(i * dim, dim);
    }
    LabelledView view() const { return {dim, points, labels, probs}; }
};

inline constexpr std::size_t kMaxSupportAtoms = 1'000'000;

/// Feature 1 is TwoPoint(p); features 2..d+1 are Gaussian(mu, sigma).
DistributionSpec weak_feature_distribution(int d, double p, double mu, double sigma);

/// Same shape, but each Gaussian is replaced by the two-point law {mu - sigma, mu + sigma}
/// with equal mass. Keeps the mean and variance and makes the spec finitely supported.
DistributionSpec weak_feature_distribution_discrete(int d, double p, double mu, double sigma);

/// Throws std::invalid_argument unless feature 1 is TwoPoint and every other
/// feature has 0 < mean < eps (strict, so mean == eps is rejected).
void require_weak_feature_layout(const DistributionSpec& spec, double eps);
bool has_weak_feature_layout(const DistributionSpec& spec, double eps);

/// n i.i.d. draws. Sample i uses its own stream derived from (seed, i), so the
/// result does not depend on `threads`.
Dataset sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed,
               unsigned threads = 1);

/// |mu_i| <= eps. Index is zero-based.
bool is_non_robust(const DistributionSpec& spec, std::size_t i, double eps);
std::vector<bool> non_robust_mask(std::span<const double> means, double eps);

Support enumerate_support(const DistributionSpec& spec);

/// Per-feature plug-in estimates of mu_i = E[x_i y] and their standard errors.
struct MeanEstimate {
    std::vector<double> means;
    std::vector<double> stderrs;
};
MeanEstimate estimate_means(const Dataset& data);

/// Stream for (seed, index, tag); used everywhere a reproducible substream is needed.
std::mt19937_64 derived_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0);

}  // namespace slar

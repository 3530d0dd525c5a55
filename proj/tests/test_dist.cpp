#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "slar/dist.hpp"

using namespace slar;

TEST_CASE("feature moments") {
    const auto tp = FeatureSpec::two_point(0.7);
    CHECK(tp.mean() == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(tp.variance() == doctest::Approx(0.84).epsilon(1e-15));

    const auto g = FeatureSpec::gaussian(0.01, 0.01);
    CHECK(g.mean() == 0.01);
    CHECK(g.variance() == doctest::Approx(1e-4));
    CHECK_FALSE(g.finite_support());

    const auto d = FeatureSpec::discrete({-0.25, 0.35}, {0.5, 0.5});
    CHECK(d.mean() == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(d.variance() == doctest::Approx(0.09).epsilon(1e-14));
}

TEST_CASE("feature validation") {
    CHECK_THROWS_AS(FeatureSpec::two_point(1.5), std::invalid_argument);
    CHECK_THROWS_AS(FeatureSpec::gaussian(0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(FeatureSpec::discrete({0.1, 0.2}, {0.5, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(FeatureSpec::discrete({0.1}, {}), std::invalid_argument);
    CHECK_THROWS_AS(FeatureSpec::discrete({0.1, 0.2}, {1.2, -0.2}), std::invalid_argument);
}

TEST_CASE("weak-feature layout") {
    const auto spec = weak_feature_distribution(5, 0.7, 0.01, 0.01);
    CHECK(spec.dim() == 6);
    CHECK(has_weak_feature_layout(spec, 0.02));
    CHECK_FALSE(has_weak_feature_layout(spec, 0.01));  // mu == eps is rejected
    CHECK_NOTHROW(require_weak_feature_layout(spec, 0.02));
    CHECK_THROWS_AS(require_weak_feature_layout(spec, 0.005), std::invalid_argument);
    CHECK_THROWS_AS(weak_feature_distribution(0, 0.7, 0.01, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(weak_feature_distribution(3, 1.0, 0.01, 0.01), std::invalid_argument);

    const auto disc = weak_feature_distribution_discrete(3, 0.7, 0.05, 0.3);
    CHECK(disc.finite_support());
    const auto m = disc.means();
    const auto v = disc.variances();
    for (std::size_t j = 1; j < disc.dim(); ++j) {
        CHECK(m[j] == doctest::Approx(0.05).epsilon(1e-14));
        CHECK(v[j] == doctest::Approx(0.09).epsilon(1e-14));
    }
}

TEST_CASE("robust classification uses |mu| <= eps") {
    DistributionSpec s;
    s.features = {FeatureSpec::two_point(0.7), FeatureSpec::discrete({0.1}, {1.0}),
                  FeatureSpec::discrete({-0.3}, {1.0})};
    CHECK_FALSE(is_non_robust(s, 0, 0.1));
    CHECK(is_non_robust(s, 1, 0.1));  // boundary counts as non-robust
    CHECK_FALSE(is_non_robust(s, 2, 0.1));
    CHECK_THROWS_AS(is_non_robust(s, 3, 0.1), std::out_of_range);
    const auto mask = non_robust_mask(s.means(), 0.1);
    CHECK(mask == std::vector<bool>{false, true, false});
}

TEST_CASE("sampling is deterministic and thread-independent") {
    const auto spec = weak_feature_distribution(20, 0.7, 0.01, 0.01);
    const auto a = sample(spec, 500, 42, 1);
    const auto b = sample(spec, 500, 42, 4);
    CHECK(a.points == b.points);
    CHECK(a.labels == b.labels);
    const auto c = sample(spec, 500, 43, 1);
    CHECK(a.points != c.points);
    CHECK_THROWS_AS(sample(spec, 0, 1), std::invalid_argument);
}

TEST_CASE("sample means match the spec") {
    const auto spec = weak_feature_distribution_discrete(2, 0.7, 0.05, 0.3);
    const auto data = sample(spec, 40000, 7);
    const auto est = estimate_means(data);
    const auto mu = spec.means();
    for (std::size_t j = 0; j < mu.size(); ++j) CHECK(std::abs(est.means[j] - mu[j]) < 5.0 * est.stderrs[j]);
    const auto pos = std::count(data.labels.begin(), data.labels.end(), 1);
    CHECK(std::abs(static_cast<double>(pos) / 40000.0 - 0.5) < 0.02);
}

TEST_CASE("support enumeration is an exact distribution") {
    const auto spec = weak_feature_distribution_discrete(3, 0.7, 0.05, 0.3);
    const auto sup = enumerate_support(spec);
    CHECK(sup.size() == 2 * 16);
    const double total = std::accumulate(sup.probs.begin(), sup.probs.end(), 0.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    const auto mu = spec.means();
    for (std::size_t j = 0; j < spec.dim(); ++j) {
        double m = 0.0;
        for (std::size_t k = 0; k < sup.size(); ++k) m += sup.probs[k] * sup.labels[k] * sup.row(k)[j];
        CHECK(m == doctest::Approx(mu[j]).epsilon(1e-13));
    }
    CHECK_THROWS_AS(enumerate_support(weak_feature_distribution(2, 0.7, 0.01, 0.01)), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_support(weak_feature_distribution_discrete(30, 0.7, 0.05, 0.3)), std::length_error);
}

TEST_CASE("derived streams") {
    auto a = derived_stream(1, 2, 3), b = derived_stream(1, 2, 3), c = derived_stream(1, 2, 4);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
}

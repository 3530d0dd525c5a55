#include <doctest.h>

#include <cmath>

#include "slar/oracle.hpp"

using namespace slar;

namespace {

DistributionSpec seven_feature_spec() {
    DistributionSpec s;
    s.features.push_back(FeatureSpec::two_point(0.7));
    for (int i = 0; i < 6; ++i) s.features.push_back(FeatureSpec::discrete({-0.25, 0.35}, {0.5, 0.5}));
    return s;
}

}  // namespace

// Frozen values recomputed independently (numpy over count triples / itertools over 3^7 patterns).
TEST_CASE("condition report at experiment scale") {
    const auto spec = weak_feature_distribution(2000, 0.7, 0.01, 0.01);
    const auto r = evaluate_conditions(spec, 0.02, 0.01);
    CHECK(r.sup_method == SupMethod::grouped);
    CHECK(r.mu_prime_norm == doctest::Approx(0.4472135954999579).epsilon(1e-12));
    CHECK(std::abs(r.p_threshold_standard - -3.8369726575954477) < 1e-10);
    CHECK(std::abs(r.p_threshold_at - -3.9549035447994747) < 1e-10);
    CHECK(std::abs(r.p_threshold_at_simplified - -17.77107318071336) < 1e-10);
    CHECK(r.sigma_max == doctest::Approx(0.01));
    CHECK_FALSE(r.holds_standard);
    CHECK_FALSE(r.holds_at);
    CHECK(r.sup.s[0] == 1);
    for (std::size_t j = 1; j < r.sup.s.size(); ++j) REQUIRE(r.sup.s[j] == 0);
}

TEST_CASE("condition report on a small discrete spec") {
    const auto r = evaluate_conditions(seven_feature_spec(), 0.1, 0.1);
    CHECK(r.sup_method == SupMethod::exhaustive);
    CHECK(r.per_s.size() == 2187);
    CHECK(std::abs(r.p_threshold_standard - -2.164959384883665) < 1e-12);
    CHECK(std::abs(r.p_threshold_at - -2.473273504513787) < 1e-12);
    CHECK(std::abs(r.p_threshold_at_simplified - -56.698116683762144) < 1e-10);
    CHECK(r.mu_prime_norm == doctest::Approx(0.1224744871391589).epsilon(1e-13));
    // mu_j + eps s_j = +-0.05 for s_j in {0, -1}: the weak coordinates tie, feature 1 does not.
    CHECK(r.sup.s[0] == -1);
    CHECK(r.simplified_applicable);  // eps = 0.1 > 2 * 0.05
    CHECK(r.p_threshold_at_simplified <= r.p_threshold_at);
}

TEST_CASE("condition report needs a two-point first feature") {
    DistributionSpec s;
    s.features = {FeatureSpec::discrete({0.3}, {1.0}), FeatureSpec::discrete({0.01}, {1.0})};
    CHECK_THROWS_AS(evaluate_conditions(s, 0.1, 0.1), std::invalid_argument);
}

TEST_CASE("large heterogeneous specs need the closed form opt-in") {
    DistributionSpec s;
    s.features.push_back(FeatureSpec::two_point(0.7));
    for (int i = 0; i < 400; ++i) s.features.push_back(FeatureSpec::discrete({0.01 * (i % 7), 0.3}, {0.5, 0.5}));
    CHECK_THROWS_AS(evaluate_conditions(s, 0.1, 0.1), std::invalid_argument);
    CHECK(evaluate_conditions(s, 0.1, 0.1, true).sup_method == SupMethod::closed_form);
}

TEST_CASE("shift term") {
    // m = (1, 0): sigma_bar = sigma_1, ||m|| = 1.
    const auto t = shift_term(std::vector<double>{1.0, 0.0}, std::vector<double>{0.04, 5.0}, 0.0, 0.5, {0, 0});
    CHECK(t.sigma_bar == doctest::Approx(0.2));
    CHECK(t.value == doctest::Approx(0.5 * (0.2 + 0.25) + 0.5 * 2.0 * 0.2));
    CHECK(std::isinf(shift_term_value(0.0, 0.0, 0.1)));
}

TEST_CASE("closed-form sup equals enumeration for equal variances") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (std::size_t d = 2; d <= 12; ++d) {
        std::vector<double> m(d), v(d, 0.2);
        for (double& x : m) x = u(rng);
        const auto ex = sup_term_exhaustive(m, v, 0.1, 0.1);
        const auto cf = sup_term_closed_form(m, v, 0.1, 0.1);
        CHECK(std::abs(ex.value - cf.value) <= 1e-12 * std::max(1.0, ex.value));
    }
}

TEST_CASE("E[max(0, X)] sandwich") {
    const auto r = check_emax_bounds(std::vector<double>{-1.0, 1.0}, std::vector<double>{0.5, 0.5});
    CHECK(r.emax == doctest::Approx(0.5));
    CHECK(r.upper == doctest::Approx(0.5));  // tight for a symmetric two-point law
    CHECK(r.passed);
    const auto g = check_emax_bounds_gaussian(0.0, 1.0);
    CHECK(g.emax == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-14));
    CHECK(g.passed);
    const auto s = check_emax_bounds_sampled(
        [](std::mt19937_64& rng) { return std::normal_distribution<double>(0.3, 2.0)(rng); }, 100000, 4);
    CHECK(s.passed);
}

TEST_CASE("worst-case plan attains the grid maximum") {
    const auto ok = check_worst_case_grid(3, 0.1, 5, 100, 1);
    CHECK(ok.status == CheckStatus::pass);
    const Adversary lazy = [](const Weights& w, double eps) { return PerturbationPlan::zero(w.dim(), eps); };
    CHECK(check_worst_case_grid(3, 0.1, 5, 100, 1, lazy).status == CheckStatus::fail);
}

TEST_CASE("clean SVM weights follow the sign of the means") {
    DistributionSpec s;
    s.features = {FeatureSpec::discrete({0.2, 0.6}, {0.5, 0.5}), FeatureSpec::discrete({-0.5, 0.5}, {0.5, 0.5}),
                  FeatureSpec::discrete({-0.7, 0.1}, {0.5, 0.5})};
    const auto c = check_clean_signs(s, 0.1, 1e-12, 1e-9);
    CHECK(c.status == CheckStatus::pass);
}

TEST_CASE("sign-flip check catches a non-flipping trajectory") {
    Trajectory t;
    for (std::size_t k = 1; k <= 3; ++k) {
        TrajectoryRecord r;
        r.t = k;
        r.w = Weights{{1.0, 0.3}, 0.1};
        t.records.push_back(r);
    }
    const std::vector<double> mu{0.4, 0.05};
    SignFlipCounts counts;
    const auto c = check_sign_flips(t, mu, 0.1, 1e-6, &counts);
    CHECK(c.status == CheckStatus::fail);
    CHECK(counts.checked == 2);
    CHECK(counts.violations == 2);
}

TEST_CASE("non-convergence check is gated on the condition") {
    const auto spec = seven_feature_spec();
    const auto r = evaluate_conditions(spec, 0.1, 0.1);
    REQUIRE_FALSE(r.holds_at);
    Trajectory t;
    t.records.resize(4);
    CHECK(check_nonconvergence(t, spec.means(), 0.1, 1e-6, r).status == CheckStatus::skipped);
}

TEST_CASE("random specs") {
    RandomSpecOptions opts;
    opts.zero_mean_fraction = 0.3;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto s = random_discrete_spec(seed, opts);
        CHECK(s.dim() >= opts.min_dim);
        CHECK(s.dim() <= opts.max_dim);
        CHECK(std::abs(s.means()[0]) > opts.eps);
        CHECK(s.finite_support());
        CHECK(describe(s) == describe(random_discrete_spec(seed, opts)));
    }
}

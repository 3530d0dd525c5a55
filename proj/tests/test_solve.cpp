#include <doctest.h>

#include <cmath>

#include "slar/solve.hpp"

using namespace slar;

namespace {

// Five labelled points in 2-D with uniform weights.
Dataset toy() {
    return Dataset{2, {1.0, 0.2, 0.3, -0.5, -0.4, 0.1, 0.2, 0.8, -0.1, 0.6}, {1, 1, -1, -1, 1}, 0};
}

OptimizerConfig exact(double lambda, double tol = 1e-13) { return {ExactBR{tol, 200000, 0}, lambda, {}}; }

}  // namespace

// Reference minimizers below were computed offline with a generic constrained
// solver (SLSQP on the slack formulation, 20 restarts); accurate to about 1e-9.
TEST_CASE("clean SVM matches an independent QP solution") {
    const auto fit = fit_svm(toy(), PerturbationPlan::zero(2), exact(0.1));
    CHECK(fit.certified);
    CHECK(fit.gap <= 1e-13);
    CHECK(fit.weights.w[0] == doctest::Approx(1.25).epsilon(1e-7));
    CHECK(fit.weights.w[1] == doctest::Approx(-1.25).epsilon(1e-7));
    CHECK(fit.objective == doctest::Approx(0.65625).epsilon(1e-10));
}

TEST_CASE("perturbed SVM matches an independent QP solution") {
    const auto fit = fit_svm(toy(), PerturbationPlan({0.05, -0.02}, 0.05), exact(0.1));
    CHECK(fit.weights.w[0] == doctest::Approx(1.3359133437213278).epsilon(1e-7));
    CHECK(fit.weights.w[1] == doctest::Approx(-1.22326216606937).epsilon(1e-7));
    CHECK(fit.objective == doctest::Approx(0.7344654537806288).epsilon(1e-9));
}

TEST_CASE("robust objective matches an independent QP solution") {
    const auto fit = fit_oat(toy(), 0.1, exact(0.1));
    CHECK(fit.certified);
    CHECK(fit.weights.w[0] == doctest::Approx(1.24).epsilon(1e-7));
    CHECK(fit.weights.w[1] == doctest::Approx(-0.38666669562513517).epsilon(1e-6));
    CHECK(fit.objective == doctest::Approx(0.8534222222222221).epsilon(1e-9));
}

TEST_CASE("one-dimensional closed form") {
    // E max(0, 1 - a w) + lambda/2 w^2 with x = y a: w* = min(1/a, a/lambda).
    for (double a : {0.1, 0.2, 0.5, 1.0, 3.0})
        for (double lambda : {0.01, 0.1, 1.0}) {
            DistributionSpec s;
            s.features.push_back(FeatureSpec::discrete({a}, {1.0}));
            const auto fit = fit_svm(s, PerturbationPlan::zero(1), exact(lambda));
            CHECK(fit.weights.w[0] == doctest::Approx(std::min(1.0 / a, a / lambda)).epsilon(1e-6));
        }
}

TEST_CASE("zero robust budget reduces to the SVM") {
    const auto a = fit_oat(toy(), 0.0, exact(0.05));
    const auto b = fit_svm(toy(), PerturbationPlan::zero(2), exact(0.05));
    CHECK(distance2(a.weights.w, b.weights.w) < 1e-6);
}

TEST_CASE("certificate and weight radius") {
    const auto fit = fit_svm(toy(), PerturbationPlan::zero(2), exact(0.1, 1e-6));
    CHECK(fit.gap <= 1e-6);
    CHECK(fit.weight_radius() == doctest::Approx(std::sqrt(2.0 * fit.gap / 0.1)));
    const auto tight = fit_svm(toy(), PerturbationPlan::zero(2), exact(0.1, 1e-14));
    CHECK(distance2(fit.weights.w, tight.weights.w) <= fit.weight_radius() + tight.weight_radius());
}

TEST_CASE("iteration cap raises SolverError") {
    const DistributionSpec s = [] {
        DistributionSpec d;
        d.features = {FeatureSpec::two_point(0.7), FeatureSpec::discrete({-0.25, 0.35}, {0.5, 0.5})};
        return d;
    }();
    OptimizerConfig cfg{ExactBR{1e-300, 1, 0}, 0.1, {}};
    try {
        (void)fit_svm(s, PerturbationPlan::zero(2), cfg);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.iterations() == 1);
        CHECK(e.gap() > 0.0);
    }
}

TEST_CASE("different dual starts agree") {
    const Dataset d = toy();
    const auto rep = certify_unique(d.view(), PerturbationPlan({0.05, 0.0}, 0.05), 0.1, 1e-12, 4);
    CHECK(rep.gaps.size() == 4);
    CHECK(rep.max_pairwise_distance <= rep.certified_bound);
    CHECK(rep.certified_bound == doctest::Approx(2.0 * std::sqrt(2.0 * 1e-12 / 0.1)));
}

TEST_CASE("configuration validation") {
    OptimizerConfig bad{ExactBR{}, 0.0, {}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    OptimizerConfig batch{Stochastic{0.01, 0, 1, 0}, 0.1, {}};
    CHECK_THROWS_AS(batch.validate(), std::invalid_argument);
    OptimizerConfig tol{ExactBR{0.0, 10, 0}, 0.1, {}};
    CHECK_THROWS_AS(tol.validate(), std::invalid_argument);
}

TEST_CASE("first Adam step moves every active coordinate by the learning rate") {
    const Dataset d = toy();
    Stochastic s{0.01, 100, 1, 3};
    AdamTrainer t(2, 0.1, s);
    t.run_epoch(d.view(), PerturbedHinge{PerturbationPlan::zero(2)});
    CHECK(t.steps() == 1);
    // At w = 0 every point is inside the margin: gradient = -mean(y x) = (-0.2, 0.2).
    CHECK(t.weights()[0] == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(t.weights()[1] == doctest::Approx(-0.01).epsilon(1e-6));
}

TEST_CASE("Adam is deterministic and approaches the exact minimizer") {
    const Dataset d = toy();
    OptimizerConfig cfg{Stochastic{0.01, 2, 3000, 9}, 0.1, {}};
    const auto a = fit_svm(d, PerturbationPlan::zero(2), cfg);
    const auto b = fit_svm(d, PerturbationPlan::zero(2), cfg);
    CHECK(a.weights.w == b.weights.w);
    CHECK_FALSE(a.certified);
    CHECK(std::isnan(a.gap));
    CHECK(a.objective - 0.65625 < 5e-3);
    CHECK(a.objective >= 0.65625 - 1e-12);
}

#include <doctest.h>

#include <algorithm>
#include <random>
#include <stdexcept>

#include "slar/model.hpp"

using namespace slar;

TEST_CASE("sign of zero is zero") {
    CHECK(sign(0.0) == 0.0);
    CHECK(sign(-0.0) == 0.0);
    CHECK(sign(1e-300) == 1.0);
    CHECK(sign(-3.0) == -1.0);
}

TEST_CASE("worst-case plan") {
    const Weights w{{0.5, -2.0, 0.0}, 0.1};
    const auto plan = worst_case_plan(w, 0.1);
    CHECK(plan.v() == std::vector<double>{0.1, -0.1, 0.0});
    CHECK(plan.eps() == 0.1);
}

TEST_CASE("equilibrium plan") {
    const std::vector<double> mu{0.4, 0.05, -0.08, -0.3, 0.0};
    const auto plan = ne_plan(mu, 0.1);
    CHECK(plan.v() == std::vector<double>{0.1, 0.05, -0.08, -0.1, 0.0});
}

TEST_CASE("plans reject out-of-budget shifts") {
    CHECK_THROWS_AS(PerturbationPlan({0.2}, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(PerturbationPlan({0.0}, -0.1), std::invalid_argument);
    CHECK_NOTHROW(PerturbationPlan({0.1, -0.1}, 0.1));
}

TEST_CASE("losses") {
    const Weights w{{1.0, -2.0}, 0.1};
    const std::vector<double> x{0.5, 0.25};
    CHECK(hinge_loss(w, x, 1) == doctest::Approx(1.0));       // margin 0
    CHECK(hinge_loss(w, x, -1) == doctest::Approx(1.0));
    const PerturbationPlan v({0.1, 0.1}, 0.1);
    CHECK(perturbed_loss(w, x, 1, v) == doctest::Approx(0.9));  // w.v = -0.1
    CHECK(robust_loss(w, x, 1, 0.1) == doctest::Approx(1.3));
    CHECK(certified_margin(w, x, 1, 0.1) == doctest::Approx(-0.3));
}

TEST_CASE("robust loss is the max of the perturbed loss over sign plans") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        Weights w{{u(rng), u(rng), u(rng)}, 1.0};
        const std::vector<double> x{u(rng), u(rng), u(rng)};
        const int y = u(rng) > 0 ? 1 : -1;
        double best = 0.0;
        for (int mask = 0; mask < 27; ++mask) {
            std::vector<double> v(3);
            for (int i = 0, m = mask; i < 3; ++i, m /= 3) v[i] = 0.2 * (m % 3 - 1);
            // delta = -y v, so the loss uses y<w, x> - <w, v>
            best = std::max(best, perturbed_loss(w, x, y, PerturbationPlan(v, 0.2)));
        }
        CHECK(robust_loss(w, x, y, 0.2) == doctest::Approx(best).epsilon(1e-14));
        CHECK(perturbed_loss(w, x, y, worst_case_plan(w, 0.2)) == doctest::Approx(best).epsilon(1e-14));
    }
}

TEST_CASE("evaluate counts ties as errors") {
    const Dataset d{2, {1.0, 0.0, 0.0, 1.0, -1.0, 0.0}, {1, 1, 1}, 0};
    const Weights w{{1.0, 0.0}, 1.0};
    const auto acc = evaluate(w, d, 0.0);
    CHECK(acc.standard == doctest::Approx(1.0 / 3.0));
    const auto zero = evaluate(Weights{{0.0, 0.0}, 1.0}, d, 0.0);
    CHECK(zero.standard == 0.0);
    // ||w||_1 eps = 0.5 leaves only the first point's margin of 1
    CHECK(evaluate(w, d, 0.5).certified_robust == doctest::Approx(1.0 / 3.0));
    CHECK(evaluate(w, d, 1.0).certified_robust == 0.0);
}

TEST_CASE("evaluate on a weighted view") {
    const std::vector<double> pts{1.0, -1.0};
    const std::vector<int> labels{1, 1};
    const std::vector<double> probs{0.7, 0.3};
    const LabelledView view{1, pts, labels, probs};
    CHECK(evaluate(Weights{{2.0}, 1.0}, view, 0.0).standard == doctest::Approx(0.7));
}

TEST_CASE("non-robust mass") {
    const Weights w{{3.0, 4.0}, 1.0};
    CHECK(nonrobust_mass(w, std::vector<double>{0.5, 0.01}, 0.02) == doctest::Approx(16.0 / 25.0));
    CHECK_THROWS_AS(nonrobust_mass(Weights{{0.0, 0.0}, 1.0}, std::vector<double>{0.5, 0.01}, 0.02),
                    std::invalid_argument);
}

TEST_CASE("row utility over a distribution equals the support average") {
    DistributionSpec s;
    s.features = {FeatureSpec::two_point(0.7), FeatureSpec::discrete({-0.25, 0.35}, {0.5, 0.5})};
    const Weights w{{0.8, -0.4}, 0.1};
    const PerturbationPlan v({0.1, -0.05}, 0.1);
    // Hand enumeration: y<w,x> over the 4 equally likely (per label) atoms of y*x.
    double risk = 0.0;
    for (double a : {1.0, -1.0})
        for (double b : {-0.25, 0.35}) {
            const double pa = a > 0 ? 0.7 : 0.3;
            const double margin = 0.8 * a - 0.4 * b - (0.8 * 0.1 - 0.4 * -0.05);
            risk += pa * 0.5 * std::max(0.0, 1.0 - margin);
        }
    const double expected = risk + 0.5 * 0.1 * (0.64 + 0.16);
    CHECK(row_utility(v, w, s) == doctest::Approx(expected).epsilon(1e-14));
}

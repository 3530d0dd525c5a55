#include "slar/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace slar {

namespace {

void require_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

PerturbationPlan::PerturbationPlan(std::vector<double> v, double eps) : v_(std::move(v)), eps_(eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw std::invalid_argument("PerturbationPlan: eps must be >= 0");
    for (double x : v_)
        if (!(std::abs(x) <= eps_)) throw std::invalid_argument("PerturbationPlan: |v_i| exceeds eps");
}

PerturbationPlan PerturbationPlan::zero(std::size_t dim, double eps) {
    return PerturbationPlan(std::vector<double>(dim, 0.0), eps);
}

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm1(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s += std::abs(x);
    return s;
}

double distance2(std::span<const double> a, std::span<const double> b) {
    require_dim(a.size(), b.size(), "distance2");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double hinge_loss(const Weights& w, std::span<const double> x, int y) {
    require_dim(w.dim(), x.size(), "hinge_loss");
    return std::max(0.0, 1.0 - y * dot(w.w, x));
}

double perturbed_loss(const Weights& w, std::span<const double> x, int y, const PerturbationPlan& plan) {
    require_dim(w.dim(), x.size(), "perturbed_loss");
    require_dim(w.dim(), plan.dim(), "perturbed_loss");
    return std::max(0.0, 1.0 - y * dot(w.w, x) + dot(w.w, plan.v()));
}

double robust_loss(const Weights& w, std::span<const double> x, int y, double eps) {
    require_dim(w.dim(), x.size(), "robust_loss");
    return std::max(0.0, 1.0 - y * dot(w.w, x) + eps * norm1(w.w));
}

double row_utility(const PerturbationPlan& plan, const Weights& w, const LabelledView& data) {
    require_dim(w.dim(), data.dim, "row_utility");
    require_dim(w.dim(), plan.dim(), "row_utility");
    const double shift = dot(w.w, plan.v());
    double risk = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        risk += data.weight(i) * std::max(0.0, 1.0 - data.labels[i] * dot(w.w, data.row(i)) + shift);
    return risk + 0.5 * w.lambda * dot(w.w, w.w);
}

double row_utility(const PerturbationPlan& plan, const Weights& w, const Dataset& data) {
    return row_utility(plan, w, data.view());
}

double row_utility(const PerturbationPlan& plan, const Weights& w, const DistributionSpec& spec) {
    if (!spec.finite_support())
        throw std::invalid_argument("row_utility: exact expectation needs a finitely supported spec");
    const Support support = enumerate_support(spec);
    return row_utility(plan, w, support.view());
}

double robust_objective(const Weights& w, double eps, const LabelledView& data) {
    require_dim(w.dim(), data.dim, "robust_objective");
    const double pen = eps * norm1(w.w);
    double risk = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        risk += data.weight(i) * std::max(0.0, 1.0 - data.labels[i] * dot(w.w, data.row(i)) + pen);
    return risk + 0.5 * w.lambda * dot(w.w, w.w);
}

PerturbationPlan worst_case_plan(const Weights& w, double eps) {
    std::vector<double> v(w.dim());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = eps * sign(w.w[i]);
    return PerturbationPlan(std::move(v), eps);
}

PerturbationPlan ne_plan(std::span<const double> means, double eps) {
    std::vector<double> v(means.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = std::abs(means[i]) <= eps ? means[i] : eps * sign(means[i]);
    return PerturbationPlan(std::move(v), eps);
}

PerturbationPlan ne_plan(const DistributionSpec& spec, double eps) { return ne_plan(spec.means(), eps); }

double certified_margin(const Weights& w, std::span<const double> x, int y, double eps) {
    require_dim(w.dim(), x.size(), "certified_margin");
    return y * dot(w.w, x) - eps * norm1(w.w);
}

Accuracy evaluate(const Weights& w, const LabelledView& data, double eps) {
    if (data.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
    require_dim(w.dim(), data.dim, "evaluate");
    const double pen = eps * norm1(w.w);
    // Uniform views count hits so that accuracies are exact fractions k/n.
    std::size_t hits = 0, robust_hits = 0;
    Accuracy acc;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double margin = data.labels[i] * dot(w.w, data.row(i));
        if (data.uniform()) {
            hits += margin > 0.0;
            robust_hits += margin - pen > 0.0;
            continue;
        }
        const double wt = data.weight(i);
        if (margin > 0.0) acc.standard += wt;
        if (margin - pen > 0.0) acc.certified_robust += wt;
    }
    if (data.uniform()) {
        acc.standard = static_cast<double>(hits) / static_cast<double>(data.size());
        acc.certified_robust = static_cast<double>(robust_hits) / static_cast<double>(data.size());
    }
    return acc;
}

Accuracy evaluate(const Weights& w, const Dataset& data, double eps) { return evaluate(w, data.view(), eps); }

double nonrobust_mass(const Weights& w, std::span<const double> means, double eps) {
    require_dim(w.dim(), means.size(), "nonrobust_mass");
    const double total = dot(w.w, w.w);
    if (!(total > 0.0)) throw std::invalid_argument("nonrobust_mass: zero weight vector");
    double nr = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i)
        if (std::abs(means[i]) <= eps) nr += w.w[i] * w.w[i];
    return nr / total;
}

double nonrobust_mass(const Weights& w, const DistributionSpec& spec, double eps) {
    return nonrobust_mass(w, spec.means(), eps);
}

}  // namespace slar

#include "slar/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace slar {

std::string_view to_string(SupMethod m) {
    switch (m) {
        case SupMethod::exhaustive: return "exhaustive";
        case SupMethod::grouped: return "grouped";
        case SupMethod::closed_form: return "closed_form";
    }
    return "?";
}

namespace {

std::string fmt(double x) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double shift_term_value(double m2, double weighted, double lambda) {
    if (!(m2 > 0.0)) return kInf;
    const double norm = std::sqrt(m2);
    const double sigma_bar = std::sqrt(std::max(weighted, 0.0) / m2);
    return 0.5 * (sigma_bar / norm + lambda / (2.0 * m2)) + 0.5 * std::sqrt(2.0 / lambda) * sigma_bar;
}

ShiftTerm shift_term(std::span<const double> means, std::span<const double> variances, double eps, double lambda,
                     std::vector<int> s) {
    double m2 = 0.0, weighted = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) {
        const double m = means[i] + eps * s[i];
        m2 += m * m;
        weighted += m * m * variances[i];
    }
    ShiftTerm t;
    t.s = std::move(s);
    t.shifted_norm = std::sqrt(m2);
    t.sigma_bar = m2 > 0.0 ? std::sqrt(weighted / m2) : 0.0;
    t.value = shift_term_value(m2, weighted, lambda);
    return t;
}

ShiftTerm sup_term_exhaustive(std::span<const double> means, std::span<const double> variances, double eps,
                              double lambda, std::vector<ShiftTerm>* per_s) {
    const std::size_t D = means.size();
    if (D > kMaxExhaustiveDim) throw std::invalid_argument("exhaustive sup over s needs D <= 13");
    std::vector<int> s(D, -1);
    std::vector<int> best_s;
    double best = -kInf;
    bool more = true;
    while (more) {
        double m2 = 0.0, weighted = 0.0;
        for (std::size_t i = 0; i < D; ++i) {
            const double m = means[i] + eps * s[i];
            m2 += m * m;
            weighted += m * m * variances[i];
        }
        const double v = shift_term_value(m2, weighted, lambda);
        if (per_s) per_s->push_back(shift_term(means, variances, eps, lambda, s));
        if (v > best) {
            best = v;
            best_s = s;
        }
        more = false;
        for (std::size_t i = D; i-- > 0;) {
            if (s[i] < 1) {
                ++s[i];
                more = true;
                break;
            }
            s[i] = -1;
        }
    }
    return shift_term(means, variances, eps, lambda, std::move(best_s));
}

ShiftTerm sup_term_grouped(std::span<const double> means, std::span<const double> variances, double eps,
                           double lambda) {
    struct Group {
        double mu, var;
        std::vector<std::size_t> members;
    };
    std::map<std::pair<double, double>, std::size_t> index;
    std::vector<Group> groups;
    for (std::size_t i = 0; i < means.size(); ++i) {
        auto key = std::make_pair(means[i], variances[i]);
        auto it = index.find(key);
        if (it == index.end()) {
            index.emplace(key, groups.size());
            groups.push_back({means[i], variances[i], {i}});
        } else {
            groups[it->second].members.push_back(i);
        }
    }
    double combos = 1.0;
    for (const auto& g : groups) {
        const double n = static_cast<double>(g.members.size());
        combos *= (n + 1.0) * (n + 2.0) / 2.0;
    }
    if (combos > static_cast<double>(kMaxGroupedCombos))
        throw std::invalid_argument("grouped sup over s: too many count combinations");

    // counts[g] = (number of s = -1, number of s = +1); the rest are 0.
    std::vector<std::pair<std::size_t, std::size_t>> counts(groups.size()), best_counts;
    double best = -kInf;
    auto dfs = [&](auto&& self, std::size_t g, double m2, double weighted) -> void {
        if (g == groups.size()) {
            const double v = shift_term_value(m2, weighted, lambda);
            if (v > best) {
                best = v;
                best_counts = counts;
            }
            return;
        }
        const auto& G = groups[g];
        const std::size_t n = G.members.size();
        const double lo = (G.mu - eps) * (G.mu - eps);
        const double mid = G.mu * G.mu;
        const double hi = (G.mu + eps) * (G.mu + eps);
        for (std::size_t a = 0; a <= n; ++a) {
            for (std::size_t b = 0; a + b <= n; ++b) {
                const double c2 = a * lo + b * hi + (n - a - b) * mid;
                counts[g] = {a, b};
                self(self, g + 1, m2 + c2, weighted + c2 * G.var);
            }
        }
    };
    dfs(dfs, 0, 0.0, 0.0);

    std::vector<int> s(means.size(), 0);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto [a, b] = best_counts[g];
        const auto& mem = groups[g].members;
        for (std::size_t k = 0; k < a; ++k) s[mem[k]] = -1;
        for (std::size_t k = a; k < a + b; ++k) s[mem[k]] = 1;
    }
    return shift_term(means, variances, eps, lambda, std::move(s));
}

ShiftTerm sup_term_closed_form(std::span<const double> means, std::span<const double> variances, double eps,
                               double lambda) {
    std::vector<int> s(means.size(), 0);
    for (std::size_t i = 0; i < means.size(); ++i)
        if (2.0 * std::abs(means[i]) > eps) s[i] = means[i] > 0.0 ? -1 : 1;
    return shift_term(means, variances, eps, lambda, std::move(s));
}

ConditionReport evaluate_conditions(const DistributionSpec& spec, double eps, double lambda, bool allow_closed_form) {
    if (spec.dim() < 2) throw std::invalid_argument("evaluate_conditions: need at least two features");
    const auto* first = std::get_if<TwoPoint>(&spec.features[0].kind());
    if (!first) throw std::invalid_argument("evaluate_conditions: feature 1 must be TwoPoint");
    if (!(eps >= 0.0)) throw std::invalid_argument("evaluate_conditions: eps must be >= 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("evaluate_conditions: lambda must be > 0");

    const std::vector<double> mu = spec.means();
    const std::vector<double> var = spec.variances();
    const std::size_t D = mu.size();

    ConditionReport r;
    r.p = first->p;
    r.eps = eps;
    r.lambda = lambda;
    double mp2 = 0.0;
    r.simplified_applicable = true;
    for (std::size_t j = 1; j < D; ++j) {
        r.sigma_max = std::max(r.sigma_max, std::sqrt(var[j]));
        mp2 += mu[j] * mu[j];
        if (!(eps > 2.0 * std::abs(mu[j]))) r.simplified_applicable = false;
    }
    r.mu_prime_norm = std::sqrt(mp2);
    r.mu_norm = norm2(mu);

    const ShiftTerm base = shift_term(mu, var, eps, lambda, std::vector<int>(D, 0));
    r.sigma_bar_mu = base.sigma_bar;
    r.p_threshold_standard = 1.0 - base.value;

    if (D <= kMaxExhaustiveDim) {
        r.sup_method = SupMethod::exhaustive;
        r.sup = sup_term_exhaustive(mu, var, eps, lambda, D <= 8 ? &r.per_s : nullptr);
    } else {
        try {
            r.sup = sup_term_grouped(mu, var, eps, lambda);
            r.sup_method = SupMethod::grouped;
        } catch (const std::invalid_argument&) {
            if (!allow_closed_form)
                throw std::invalid_argument("evaluate_conditions: D too large for exact sup; allow the closed-form rule");
            r.sup = sup_term_closed_form(mu, var, eps, lambda);
            r.sup_method = SupMethod::closed_form;
        }
    }
    r.p_threshold_at = 1.0 - r.sup.value;

    if (r.sigma_max >= 1.0 || !(r.mu_prime_norm > 0.0))
        r.sigma_bound = r.sigma_max;
    else
        r.sigma_bound = r.sigma_max + (1.0 + eps) * std::sqrt(1.0 - r.sigma_max * r.sigma_max) / r.mu_prime_norm;
    r.p_threshold_at_simplified =
        r.mu_prime_norm > 0.0 ? 1.0 - (0.5 * (r.sigma_bound / r.mu_prime_norm + lambda / (2.0 * mp2)) +
                                       0.5 * std::sqrt(2.0 / lambda) * r.sigma_bound)
                              : -kInf;

    r.holds_standard = r.p < r.p_threshold_standard;
    r.holds_at = r.p < r.p_threshold_at;
    r.holds_at_simplified = r.simplified_applicable && r.p < r.p_threshold_at_simplified;
    return r;
}

// ---------------------------------------------------------------------------

namespace {

EmaxReport finish_emax(double mean, double variance, double emax, double band) {
    EmaxReport r;
    r.mean = mean;
    r.variance = variance;
    r.emax = emax;
    r.band = band;
    r.lower = std::max(0.0, mean);
    r.upper = r.lower + 0.5 * std::sqrt(std::max(variance, 0.0));
    return r;
}

}  // namespace

EmaxReport check_emax_bounds(std::span<const double> values, std::span<const double> probs) {
    if (values.size() != probs.size() || values.empty())
        throw std::invalid_argument("check_emax_bounds: values/probs mismatch");
    double mean = 0.0, emax = 0.0, total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        mean += probs[i] * values[i];
        emax += probs[i] * std::max(0.0, values[i]);
        total += probs[i];
    }
    double var = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) var += probs[i] * (values[i] - mean) * (values[i] - mean);
    EmaxReport r = finish_emax(mean, var, emax, 0.0);
    // Slack of a few ulps on the summed quantities; the bounds are otherwise exact.
    const double slack = 64 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(total) + std::abs(r.upper));
    r.passed = r.lower <= r.emax + slack && r.emax <= r.upper + slack;
    return r;
}

EmaxReport check_emax_bounds_gaussian(double mean, double stdev) {
    if (!(stdev >= 0.0)) throw std::invalid_argument("check_emax_bounds_gaussian: stdev must be >= 0");
    double emax;
    if (stdev == 0.0) {
        emax = std::max(0.0, mean);
    } else {
        const double z = mean / stdev;
        const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
        const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
        emax = mean * cdf + stdev * pdf;
    }
    EmaxReport r = finish_emax(mean, stdev * stdev, emax, 0.0);
    const double slack = 1e-14 * (1.0 + std::abs(mean) + stdev);
    r.passed = r.lower <= r.emax + slack && r.emax <= r.upper + slack;
    return r;
}

EmaxReport check_emax_bounds_sampled(const std::function<double(std::mt19937_64&)>& draw, std::size_t n,
                                     std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("check_emax_bounds_sampled: need n >= 2");
    auto rng = derived_stream(seed, 0, 0xe3a7);
    double s = 0.0, s2 = 0.0, e = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = draw(rng);
        const double px = std::max(0.0, x);
        s += x;
        s2 += x * x;
        e += px;
        e2 += px * px;
    }
    const double nn = static_cast<double>(n);
    const double mean = s / nn;
    const double var = std::max(0.0, (s2 - nn * mean * mean) / (nn - 1.0));
    const double emax = e / nn;
    const double evar = std::max(0.0, (e2 - nn * emax * emax) / (nn - 1.0));
    const double band = 5.0 * std::sqrt(evar / nn);
    const double mean_band = 5.0 * std::sqrt(var / nn);
    EmaxReport r = finish_emax(mean, var, emax, band);
    // The bounds move with the estimated mean too; widen by its band.
    r.passed = r.lower - mean_band <= r.emax + band && r.emax - band <= r.upper + mean_band;
    return r;
}

// ---------------------------------------------------------------------------

namespace {

CheckResult make_check(std::string name, std::string inputs) {
    CheckResult c;
    c.name = std::move(name);
    c.inputs = std::move(inputs);
    c.margin = kInf;
    return c;
}

void note(CheckResult& c, double slack, const std::string& what) {
    if (slack < c.margin) c.margin = slack;
    if (slack < 0.0) {
        c.status = CheckStatus::fail;
        if (c.detail.size() < 2000) c.detail += what + " (slack " + fmt(slack) + "); ";
    }
}

}  // namespace

CheckResult check_clean_signs(const DistributionSpec& spec, double lambda, double solve_tolerance, double tol) {
    CheckResult c = make_check("clean_signs", describe(spec) + "|lambda=" + fmt(lambda));
    OptimizerConfig cfg;
    cfg.lambda = lambda;
    cfg.method = ExactBR{solve_tolerance};
    FitResult fit;
    try {
        fit = fit_svm(spec, PerturbationPlan::zero(spec.dim()), cfg);
    } catch (const SolverError& e) {
        c.status = CheckStatus::fail;
        c.detail = e.what();
        return c;
    }
    const double radius = fit.weight_radius() + tol;
    const auto mu = spec.means();
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double w = fit.weights.w[i];
        const std::string at = "feature " + std::to_string(i + 1);
        if (mu[i] > 0.0) note(c, w + radius, at + ": w < 0 with mu > 0");
        else if (mu[i] < 0.0) note(c, radius - w, at + ": w > 0 with mu < 0");
        else note(c, radius - std::abs(w), at + ": w != 0 with mu = 0");
    }
    return c;
}

double norm_lower_bound(std::span<const double> means, std::span<const double> variances, double lambda) {
    double m2 = 0.0, weighted = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) {
        m2 += means[i] * means[i];
        weighted += means[i] * means[i] * variances[i];
    }
    if (!(m2 > 0.0)) return -kInf;
    const double norm = std::sqrt(m2);
    const double sigma_bar = std::sqrt(weighted / m2);
    return (1.0 - 0.5 * (sigma_bar / norm + lambda / (2.0 * m2))) / norm;
}

CheckResult check_norm_bounds(const Weights& w, double radius, std::span<const double> means,
                              std::span<const double> variances) {
    CheckResult c = make_check("norm_bounds", "lambda=" + fmt(w.lambda) + "|dim=" + std::to_string(w.dim()));
    const double n = norm2(w.w);
    note(c, std::sqrt(2.0 / w.lambda) + radius - n, "||w|| above sqrt(2/lambda)");
    const double lb = norm_lower_bound(means, variances, w.lambda);
    if (lb > 0.0)
        note(c, n + radius - lb, "||w|| below the mean/variance lower bound");
    else
        c.detail += "lower bound vacuous; ";
    return c;
}

CheckResult check_worst_case_grid(std::size_t d, double eps, std::size_t k, std::size_t trials, std::uint64_t seed,
                              const Adversary& adversary) {
    if (d == 0 || d > 5) throw std::invalid_argument("check_worst_case_grid: need 1 <= d <= 5");
    if (k < 2 || k > 7) throw std::invalid_argument("check_worst_case_grid: need 2 <= k <= 7");
    CheckResult c = make_check("worst_case_grid", "d=" + std::to_string(d) + "|eps=" + fmt(eps) + "|k=" +
                                                  std::to_string(k) + "|trials=" + std::to_string(trials) +
                                                  "|seed=" + std::to_string(seed));
    std::vector<double> axis(k);
    for (std::size_t j = 0; j < k; ++j)
        axis[j] = j == 0 ? -eps : (j == k - 1 ? eps : -eps + 2.0 * eps * static_cast<double>(j) / (k - 1));
    auto rng = derived_stream(seed, 0, 0x1e11);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::bernoulli_distribution coin(0.5), zero(0.2);
    std::vector<double> x(d), shifted(d);
    std::vector<std::size_t> idx(d);
    std::size_t attained = 0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        Weights w{std::vector<double>(d), 1.0};
        for (auto& wi : w.w) wi = zero(rng) ? 0.0 : normal(rng);
        for (auto& xi : x) xi = unif(rng);
        const int y = coin(rng) ? 1 : -1;
        const PerturbationPlan plan = adversary(w, eps);
        for (std::size_t i = 0; i < d; ++i) shifted[i] = x[i] - y * plan.v()[i];
        const double loss = std::max(0.0, 1.0 - y * dot(w.w, shifted));

        double grid_max = -kInf;
        std::fill(idx.begin(), idx.end(), 0);
        bool more = true;
        while (more) {
            for (std::size_t i = 0; i < d; ++i) shifted[i] = x[i] + axis[idx[i]];
            grid_max = std::max(grid_max, std::max(0.0, 1.0 - y * dot(w.w, shifted)));
            more = false;
            for (std::size_t i = d; i-- > 0;) {
                if (++idx[i] < k) {
                    more = true;
                    break;
                }
                idx[i] = 0;
            }
        }
        if (loss == grid_max) ++attained;
        note(c, loss - grid_max, "trial " + std::to_string(trial) + ": grid point beats the plan");
    }
    c.detail += std::to_string(attained) + "/" + std::to_string(trials) + " trials attain the grid maximum exactly";
    return c;
}

// ---------------------------------------------------------------------------

namespace {

std::string traj_inputs(const Trajectory& traj) {
    std::string s = std::string(to_string(traj.method)) + "|rounds=" + std::to_string(traj.records.size()) +
                    "|eps=" + fmt(traj.config.eps) + "|lambda=" + fmt(traj.config.lambda);
    if (!traj.records.empty()) s += "|w_norm_last=" + fmt(traj.last().w_norm);
    return s;
}

const std::vector<double>& prev_weights(const Trajectory& traj, std::size_t r, std::vector<double>& zero) {
    if (r > 0) return traj.records[r - 1].w.w;
    if (!traj.config.init_w.empty()) return traj.config.init_w;
    zero.assign(traj.records.front().w.dim(), 0.0);
    return zero;
}

}  // namespace

CheckResult check_sign_flips(const Trajectory& traj, std::span<const double> means, double eps, double tol,
                             SignFlipCounts* counts) {
    CheckResult c = make_check("sign_flips", traj_inputs(traj) + "|tol=" + fmt(tol));
    SignFlipCounts cnt;
    for (std::size_t r = 0; r + 1 < traj.records.size(); ++r) {
        const auto& a = traj.records[r].w.w;
        const auto& b = traj.records[r + 1].w.w;
        for (std::size_t i = 0; i < means.size(); ++i) {
            if (!(std::abs(means[i]) <= eps)) continue;
            if (std::abs(a[i]) <= tol) {
                ++cnt.unconstrained;
                continue;
            }
            ++cnt.checked;
            const double slack = a[i] > 0.0 ? tol - b[i] : tol + b[i];
            if (slack < 0.0) ++cnt.violations;
            note(c, slack,
                 "t=" + std::to_string(traj.records[r].t) + " feature " + std::to_string(i + 1) + " kept its sign");
        }
    }
    c.detail += std::to_string(cnt.checked) + " checked, " + std::to_string(cnt.unconstrained) + " unconstrained, " +
                std::to_string(cnt.violations) + " violations";
    if (counts) *counts = cnt;
    if (cnt.checked == 0 && c.status == CheckStatus::pass) c.status = CheckStatus::skipped;
    return c;
}

CheckResult check_flip_distance(const Trajectory& traj, std::span<const double> means, double eps, double tol) {
    CheckResult c = make_check("flip_distance", traj_inputs(traj) + "|tol=" + fmt(tol));
    std::vector<double> zero;
    for (std::size_t r = 0; r < traj.records.size(); ++r) {
        const auto& prev = prev_weights(traj, r, zero);
        double nr = 0.0;
        for (std::size_t i = 0; i < means.size(); ++i)
            if (std::abs(means[i]) <= eps) nr += prev[i] * prev[i];
        const double d = traj.records[r].delta_w_norm;
        note(c, d * d - nr + tol, "t=" + std::to_string(traj.records[r].t));
    }
    if (traj.records.empty()) c.status = CheckStatus::skipped;
    return c;
}

CheckResult check_nonconvergence(const Trajectory& traj, std::span<const double> means, double eps, double tol,
                                 const ConditionReport& conditions) {
    CheckResult c = make_check("nonconvergence", traj_inputs(traj) + "|tol=" + fmt(tol));
    if (!conditions.holds_at) {
        c.status = CheckStatus::skipped;
        c.detail = "condition does not hold (margin " + fmt(conditions.margin_at()) + ")";
        return c;
    }
    double denom = (1.0 - eps) * (1.0 - eps);
    for (std::size_t j = 1; j < means.size(); ++j) denom += (means[j] + eps) * (means[j] + eps);
    const double factor = (1.0 - eps) / std::sqrt(denom);
    const std::size_t T = traj.records.size();
    std::vector<double> zero;
    double min_delta = kInf;
    for (std::size_t r = T / 2; r < T; ++r) {
        if (r == 0) continue;
        const auto& prev = prev_weights(traj, r, zero);
        const double d = traj.records[r].delta_w_norm;
        min_delta = std::min(min_delta, d);
        note(c, d - factor * norm2(prev) + tol, "t=" + std::to_string(traj.records[r].t));
    }
    c.detail += "min tail delta_w_norm " + fmt(min_delta) + ", factor " + fmt(factor);
    return c;
}

CheckResult check_ne(const NEResult& ne, const LabelledView& data, double eps, double tol, double mass_tol) {
    CheckResult c = make_check("ne", "eps=" + fmt(eps) + "|lambda=" + fmt(ne.weights.lambda) + "|dim=" +
                                         std::to_string(ne.weights.dim()) + "|tol=" + fmt(tol));
    if (!ne.trajectory.ok()) {
        c.status = CheckStatus::fail;
        c.detail = *ne.trajectory.error;
        return c;
    }
    note(c, mass_tol - ne.trajectory.last().nonrobust_mass, "non-robust weight mass");
    const NEReport rep = verify_ne(ne.plan, ne.weights, data, eps, tol);
    note(c, tol - rep.row_gap, "row player can improve");
    note(c, tol - rep.column_gap, "column player can improve");
    c.detail += "row_gap " + fmt(rep.row_gap) + ", column_gap " + fmt(rep.column_gap);
    return c;
}

CheckResult check_oat_robust(const DistributionSpec& spec, double eps, double lambda, double solve_tolerance,
                             double tol) {
    CheckResult c = make_check("oat_robust", describe(spec) + "|eps=" + fmt(eps) + "|lambda=" + fmt(lambda));
    OptimizerConfig cfg;
    cfg.lambda = lambda;
    cfg.method = ExactBR{solve_tolerance};
    try {
        const FitResult fit = fit_oat(spec, eps, cfg);
        const auto mu = spec.means();
        double worst = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i)
            if (std::abs(mu[i]) <= eps) {
                worst = std::max(worst, std::abs(fit.weights.w[i]));
                note(c, tol - std::abs(fit.weights.w[i]), "feature " + std::to_string(i + 1));
            }
        c.detail += "max non-robust |w| " + fmt(worst);
    } catch (const SolverError& e) {
        c.status = CheckStatus::fail;
        c.detail = e.what();
    }
    return c;
}

CheckResult check_uniqueness(const LabelledView& data, const PerturbationPlan& plan, double lambda,
                             double solve_tolerance, double tol, std::size_t trials) {
    CheckResult c = make_check("uniqueness", "lambda=" + fmt(lambda) + "|dim=" + std::to_string(data.dim) +
                                                 "|atoms=" + std::to_string(data.size()) + "|trials=" +
                                                 std::to_string(trials));
    try {
        const UniquenessReport rep = certify_unique(data, plan, lambda, solve_tolerance, trials);
        note(c, tol - rep.max_pairwise_distance, "solutions from different starts differ");
        c.detail += "max pairwise distance " + fmt(rep.max_pairwise_distance) + " (certified bound " +
                    fmt(rep.certified_bound) + ")";
    } catch (const SolverError& e) {
        c.status = CheckStatus::fail;
        c.detail = e.what();
    }
    return c;
}

// ---------------------------------------------------------------------------

DistributionSpec random_discrete_spec(std::uint64_t seed, const RandomSpecOptions& opts) {
    if (opts.min_dim == 0 || opts.max_dim < opts.min_dim) throw std::invalid_argument("random_discrete_spec: bad dims");
    if (opts.max_atoms < 1) throw std::invalid_argument("random_discrete_spec: need max_atoms >= 1");
    auto rng = derived_stream(seed, 0, 0x5bec);
    std::uniform_int_distribution<std::size_t> dim_dist(opts.min_dim, opts.max_dim);
    std::uniform_int_distribution<std::size_t> atom_dist(1, opts.max_atoms);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t D = dim_dist(rng);
    DistributionSpec spec;
    for (std::size_t j = 0; j < D; ++j) {
        double mu;
        const double u = (j == 0 && opts.first_robust) ? 1.0 : unif(rng);
        if (u < opts.zero_mean_fraction) {
            mu = 0.0;
        } else if (u < opts.zero_mean_fraction + opts.nonrobust_fraction) {
            mu = opts.eps * (0.1 + 0.8 * unif(rng));
        } else {
            const double lo = std::min(0.9, 1.5 * opts.eps + 0.02);
            mu = lo + (0.9 - lo) * unif(rng);
        }
        if (unif(rng) < 0.5) mu = -mu;

        const std::size_t k = atom_dist(rng);
        std::vector<double> z(k), q(k);
        double qs = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            z[a] = 2.0 * unif(rng) - 1.0;
            q[a] = 0.1 + unif(rng);
            qs += q[a];
        }
        double zm = 0.0, zmax = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            q[a] /= qs;
            zm += q[a] * z[a];
        }
        for (auto& za : z) {
            za -= zm;
            zmax = std::max(zmax, std::abs(za));
        }
        const double h = zmax > 0.0 ? (1.0 - std::abs(mu)) / zmax * unif(rng) : 0.0;
        std::vector<double> values(k);
        for (std::size_t a = 0; a < k; ++a) values[a] = mu + h * z[a];
        spec.features.push_back(FeatureSpec::discrete(std::move(values), std::move(q)));
    }
    return spec;
}

std::string describe(const DistributionSpec& spec) {
    std::string s;
    for (const auto& f : spec.features) {
        if (!s.empty()) s += ';';
        std::visit(
            [&](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, TwoPoint>) {
                    s += "twopoint(" + fmt(k.p) + ")";
                } else if constexpr (std::is_same_v<K, Gaussian>) {
                    s += "gaussian(" + fmt(k.mean) + "," + fmt(k.stdev) + ")";
                } else {
                    s += "discrete(";
                    for (std::size_t a = 0; a < k.values.size(); ++a) {
                        if (a) s += ',';
                        s += fmt(k.values[a]) + ":" + fmt(k.probs[a]);
                    }
                    s += ")";
                }
            },
            f.kind());
    }
    return s;
}

}  // namespace slar

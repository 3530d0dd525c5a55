#include "slar/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace slar {

void OptimizerConfig::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be > 0");
    if (const auto* e = std::get_if<ExactBR>(&method)) {
        if (!(e->tolerance > 0.0)) throw std::invalid_argument("solver.exact.tolerance must be > 0");
        if (e->max_iters == 0) throw std::invalid_argument("solver.exact.max_iters must be >= 1");
    } else {
        const auto& s = std::get<Stochastic>(method);
        if (!(s.learning_rate > 0.0)) throw std::invalid_argument("solver.sgd.lr must be > 0");
        if (s.batch_size == 0) throw std::invalid_argument("solver.sgd.batch must be >= 1");
        if (s.epochs == 0) throw std::invalid_argument("solver.sgd.epochs must be >= 1");
    }
    for (double x : init)
        if (!std::isfinite(x)) throw std::invalid_argument("init weights must be finite");
}

double FitResult::weight_radius() const {
    if (!certified) return std::numeric_limits<double>::infinity();
    return std::sqrt(2.0 * std::max(gap, 0.0) / weights.lambda);
}

namespace {

double soft_threshold(double r, double t) {
    if (r > t) return r - t;
    if (r < -t) return r + t;
    return 0.0;
}

/**
 * min_w  sum_k p_k max(0, 1 - <a_k, w> + l1 ||w||_1) + (lambda/2)||w||^2
 * with a_k = y_k x_k - shift.
 *
 * Dual state: alpha in [0,1]^n, r = sum_k p_k alpha_k a_k, c = sum_k p_k alpha_k,
 * and w(alpha) = soft_threshold(r, l1 c) / lambda. For l1 = 0 this is the
 * usual SVM dual. For l1 > 0 it is the dual of the split problem over
 * u = (w+, w-) >= 0, where the l1 term becomes linear in u.
 */
class DualSolver {
public:
    DualSolver(const LabelledView& data, std::span<const double> shift, double l1, double lambda)
        : data_(data), shift_(shift), l1_(l1), lambda_(lambda), dim_(data.dim) {
        if (data.size() == 0) throw std::invalid_argument("ExactBR: empty data");
        if (!shift_.empty() && shift_.size() != dim_) throw std::invalid_argument("ExactBR: plan dimension mismatch");
        atom_.resize(dim_);
        r_.assign(dim_, 0.0);
        w_.assign(dim_, 0.0);
        trial_.resize(dim_);
    }

    FitResult solve(const ExactBR& cfg) {
        const std::size_t n = data_.size();
        alpha_.assign(n, 0.0);
        if (cfg.init_seed != 0) {
            auto rng = derived_stream(cfg.init_seed, 0, 0xa1fa);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (double& a : alpha_) a = u(rng);
        }
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});

        double gap = refresh_and_gap();
        std::size_t sweep = 0;
        while (gap > cfg.tolerance) {
            if (sweep >= cfg.max_iters)
                throw SolverError("ExactBR: iteration cap reached with gap " + std::to_string(gap), gap, sweep);
            auto rng = derived_stream(cfg.init_seed, sweep, 0x0dde);
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t k : order) update(k);
            ++sweep;
            gap = refresh_and_gap();
            if (l1_ == 0.0 && sweep % kPolishEvery == 0 && gap > cfg.tolerance) polish(gap);
        }
        FitResult res;
        res.weights = Weights{w_, lambda_};
        res.objective = primal_;
        res.gap = std::max(gap, 0.0);
        res.iterations = sweep;
        res.certified = true;
        return res;
    }

private:
    static constexpr std::size_t kPolishEvery = 10;
    static constexpr std::size_t kMaxPolishFree = 64;

    /*
     * Coordinate ascent crawls when the atoms share a strong common direction.
     * Once the bound set has settled, the free alphas of the SVM dual solve a
     * small linear system: step to its minimum-norm solution (shortened to stay
     * inside the box) and keep it only if the certified gap shrinks.
     */
    void polish(double& gap) {
        std::vector<std::size_t> free;
        for (std::size_t k = 0; k < alpha_.size(); ++k)
            if (alpha_[k] > 0.0 && alpha_[k] < 1.0 && data_.weight(k) > 0.0) free.push_back(k);
        const std::size_t m = free.size();
        if (m == 0 || m > kMaxPolishFree) return;
        std::vector<double> atoms(m * dim_), h(m * m), g(m);
        for (std::size_t a = 0; a < m; ++a) {
            load_atom(free[a]);
            std::copy(atom_.begin(), atom_.end(), atoms.begin() + a * dim_);
        }
        // Hessian (up to 1/lambda) and gradient of the dual in the free coordinates.
        for (std::size_t a = 0; a < m; ++a) {
            const double pa = data_.weight(free[a]);
            const std::span<const double> ra(atoms.data() + a * dim_, dim_);
            g[a] = pa * (lambda_ - dot(ra, r_));
            for (std::size_t b = 0; b <= a; ++b) {
                const std::span<const double> rb(atoms.data() + b * dim_, dim_);
                h[a * m + b] = h[b * m + a] = pa * data_.weight(free[b]) * dot(ra, rb);
            }
        }
        const std::vector<double> step = pseudo_solve(h, g, m);
        double tau = 1.0;
        for (std::size_t a = 0; a < m; ++a) {
            const double al = alpha_[free[a]];
            if (al + tau * step[a] > 1.0) tau = (1.0 - al) / step[a];
            if (al + tau * step[a] < 0.0) tau = -al / step[a];
        }
        if (!(tau > 0.0)) return;
        std::vector<double> saved(m);
        for (std::size_t a = 0; a < m; ++a) {
            saved[a] = alpha_[free[a]];
            alpha_[free[a]] = std::clamp(saved[a] + tau * step[a], 0.0, 1.0);
        }
        const double trial = refresh_and_gap();
        if (trial < gap) {
            gap = trial;
            return;
        }
        for (std::size_t a = 0; a < m; ++a) alpha_[free[a]] = saved[a];
        gap = refresh_and_gap();
    }

    // Minimum-norm solution of H x = g for symmetric PSD H (cyclic Jacobi eigendecomposition).
    static std::vector<double> pseudo_solve(std::vector<double> h, const std::vector<double>& g, std::size_t m) {
        std::vector<double> v(m * m, 0.0);
        for (std::size_t i = 0; i < m; ++i) v[i * m + i] = 1.0;
        for (int sweep = 0; sweep < 60; ++sweep) {
            double off = 0.0, diag = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                diag += h[i * m + i] * h[i * m + i];
                for (std::size_t j = i + 1; j < m; ++j) off += h[i * m + j] * h[i * m + j];
            }
            if (off <= 1e-30 * diag) break;
            for (std::size_t p = 0; p < m; ++p)
                for (std::size_t q = p + 1; q < m; ++q) {
                    const double hpq = h[p * m + q];
                    if (hpq == 0.0) continue;
                    const double theta = (h[q * m + q] - h[p * m + p]) / (2.0 * hpq);
                    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                    for (std::size_t k = 0; k < m; ++k) {
                        const double hkp = h[k * m + p], hkq = h[k * m + q];
                        h[k * m + p] = c * hkp - s * hkq;
                        h[k * m + q] = s * hkp + c * hkq;
                    }
                    for (std::size_t k = 0; k < m; ++k) {
                        const double hpk = h[p * m + k], hqk = h[q * m + k];
                        h[p * m + k] = c * hpk - s * hqk;
                        h[q * m + k] = s * hpk + c * hqk;
                    }
                    for (std::size_t k = 0; k < m; ++k) {
                        const double vkp = v[k * m + p], vkq = v[k * m + q];
                        v[k * m + p] = c * vkp - s * vkq;
                        v[k * m + q] = s * vkp + c * vkq;
                    }
                }
        }
        double top = 0.0;
        for (std::size_t i = 0; i < m; ++i) top = std::max(top, std::abs(h[i * m + i]));
        std::vector<double> x(m, 0.0);
        for (std::size_t e = 0; e < m; ++e) {
            const double lam = h[e * m + e];
            if (!(lam > 1e-12 * top)) continue;
            double proj = 0.0;
            for (std::size_t k = 0; k < m; ++k) proj += v[k * m + e] * g[k];
            for (std::size_t k = 0; k < m; ++k) x[k] += v[k * m + e] * proj / lam;
        }
        return x;
    }

    void load_atom(std::size_t k) {
        const auto x = data_.row(k);
        const double y = data_.labels[k];
        if (shift_.empty()) {
            for (std::size_t i = 0; i < dim_; ++i) atom_[i] = y * x[i];
        } else {
            for (std::size_t i = 0; i < dim_; ++i) atom_[i] = y * x[i] - shift_[i];
        }
    }

    void recompute_w() {
        const double t = l1_ * c_;
        for (std::size_t i = 0; i < dim_; ++i) w_[i] = soft_threshold(r_[i], t) / lambda_;
    }

    // Rebuilds r, c, w from alpha (drops accumulated rounding) and returns P(w) - D(alpha).
    double refresh_and_gap() {
        std::fill(r_.begin(), r_.end(), 0.0);
        c_ = 0.0;
        for (std::size_t k = 0; k < data_.size(); ++k) {
            const double pa = data_.weight(k) * alpha_[k];
            if (pa == 0.0) continue;
            load_atom(k);
            for (std::size_t i = 0; i < dim_; ++i) r_[i] += pa * atom_[i];
            c_ += pa;
        }
        recompute_w();
        const double pen = l1_ * norm1(w_);
        const double reg = 0.5 * lambda_ * dot(w_, w_);
        const double wshift = shift_.empty() ? 0.0 : dot(w_, shift_);
        double risk = 0.0;
        for (std::size_t k = 0; k < data_.size(); ++k) {
            const double p = data_.weight(k);
            if (p == 0.0) continue;
            const double margin = data_.labels[k] * dot(w_, data_.row(k)) - wshift;
            risk += p * std::max(0.0, 1.0 - margin + pen);
        }
        primal_ = risk + reg;
        const double dual = c_ - reg;
        return primal_ - dual;
    }

    // d/dalpha_k of the dual at alpha_k + t, and its slope.
    double derivative(double p, double t, double* slope) {
        const double thr = l1_ * (c_ + t * p);
        double aw = 0.0, l1w = 0.0, curv = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double ri = r_[i] + t * p * atom_[i];
            if (ri > thr) {
                const double wi = (ri - thr) / lambda_;
                aw += atom_[i] * wi;
                l1w += wi;
                const double g = atom_[i] - l1_;
                curv += g * g;
            } else if (ri < -thr) {
                const double wi = (ri + thr) / lambda_;
                aw += atom_[i] * wi;
                l1w -= wi;
                const double g = atom_[i] + l1_;
                curv += g * g;
            }
        }
        if (slope) *slope = -p * p * curv / lambda_;
        return p * (1.0 - aw + l1_ * l1w);
    }

    void update(std::size_t k) {
        const double p = data_.weight(k);
        if (p == 0.0) return;
        load_atom(k);
        const double a0 = alpha_[k];
        double t = 0.0;
        if (l1_ == 0.0) {
            const double q = p * dot(atom_, atom_) / lambda_;
            if (q == 0.0) {
                // zero atom: the dual is linear in alpha_k with slope p
                t = 1.0 - a0;
            } else {
                const double g = 1.0 - dot(atom_, w_);
                t = std::clamp(a0 + g / q, 0.0, 1.0) - a0;
            }
        } else {
            t = line_search(p, a0);
        }
        if (t == 0.0) return;
        alpha_[k] = a0 + t;
        for (std::size_t i = 0; i < dim_; ++i) r_[i] += t * p * atom_[i];
        c_ += t * p;
        if (l1_ == 0.0) {
            const double s = t * p / lambda_;
            for (std::size_t i = 0; i < dim_; ++i) w_[i] += s * atom_[i];
        } else {
            recompute_w();
        }
    }

    // Maximizes the concave piecewise-quadratic dual along alpha_k over [0,1].
    double line_search(double p, double a0) {
        double slope = 0.0;
        const double phi0 = derivative(p, 0.0, &slope);
        double lo, hi;
        if (phi0 > 0.0) {
            if (a0 >= 1.0) return 0.0;
            lo = 0.0;
            hi = 1.0 - a0;
            if (derivative(p, hi, nullptr) >= 0.0) return hi;
        } else if (phi0 < 0.0) {
            if (a0 <= 0.0) return 0.0;
            lo = -a0;
            hi = 0.0;
            if (derivative(p, lo, nullptr) <= 0.0) return lo;
        } else {
            return 0.0;
        }
        // invariant: derivative(lo) > 0 > derivative(hi) (strictly inside the bracket)
        double t = 0.0, phi = phi0;
        for (int it = 0; it < 100; ++it) {
            double next = slope < 0.0 ? t - phi / slope : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            t = next;
            phi = derivative(p, t, &slope);
            if (phi == 0.0) break;
            if (phi > 0.0) lo = t; else hi = t;
            if (hi - lo <= 1e-16 * std::max(1.0, std::abs(t))) break;
        }
        return t;
    }

    const LabelledView& data_;
    std::span<const double> shift_;
    double l1_, lambda_;
    std::size_t dim_;
    std::vector<double> alpha_, r_, w_, atom_, trial_;
    double c_ = 0.0;
    double primal_ = 0.0;
};

void require_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

FitResult fit_stochastic(const LabelledView& data, const TrainingLoss& loss, const OptimizerConfig& config) {
    const auto& s = std::get<Stochastic>(config.method);
    AdamTrainer trainer(data.dim, config.lambda, s, config.init);
    for (std::size_t e = 0; e < s.epochs; ++e) trainer.run_epoch(data, loss);
    FitResult res;
    res.weights = trainer.snapshot();
    res.iterations = trainer.steps();
    res.gap = std::numeric_limits<double>::quiet_NaN();
    res.certified = false;
    if (const auto* ph = std::get_if<PerturbedHinge>(&loss))
        res.objective = row_utility(ph->plan, res.weights, data);
    else
        res.objective = robust_objective(res.weights, std::get<RobustHinge>(loss).eps, data);
    return res;
}

}  // namespace

FitResult fit_svm(const LabelledView& data, const PerturbationPlan& plan, const OptimizerConfig& config) {
    config.validate();
    require_dim(plan.dim(), data.dim, "fit_svm");
    if (const auto* e = std::get_if<ExactBR>(&config.method)) {
        DualSolver solver(data, plan.v(), 0.0, config.lambda);
        return solver.solve(*e);
    }
    return fit_stochastic(data, PerturbedHinge{plan}, config);
}

FitResult fit_svm(const Dataset& data, const PerturbationPlan& plan, const OptimizerConfig& config) {
    return fit_svm(data.view(), plan, config);
}

FitResult fit_svm(const DistributionSpec& spec, const PerturbationPlan& plan, const OptimizerConfig& config) {
    const Support support = enumerate_support(spec);
    return fit_svm(support.view(), plan, config);
}

FitResult fit_oat(const LabelledView& data, double eps, const OptimizerConfig& config) {
    config.validate();
    if (!(eps >= 0.0)) throw std::invalid_argument("fit_oat: eps must be >= 0");
    if (const auto* e = std::get_if<ExactBR>(&config.method)) {
        DualSolver solver(data, {}, eps, config.lambda);
        return solver.solve(*e);
    }
    return fit_stochastic(data, RobustHinge{eps}, config);
}

FitResult fit_oat(const Dataset& data, double eps, const OptimizerConfig& config) {
    return fit_oat(data.view(), eps, config);
}

FitResult fit_oat(const DistributionSpec& spec, double eps, const OptimizerConfig& config) {
    const Support support = enumerate_support(spec);
    return fit_oat(support.view(), eps, config);
}

UniquenessReport certify_unique(const LabelledView& data, const PerturbationPlan& plan, double lambda,
                                double tolerance, std::size_t trials) {
    std::vector<std::uint64_t> seeds(trials);
    std::iota(seeds.begin(), seeds.end(), std::uint64_t{0});
    return certify_unique(data, plan, lambda, tolerance, seeds);
}

UniquenessReport certify_unique(const LabelledView& data, const PerturbationPlan& plan, double lambda,
                                double tolerance, std::span<const std::uint64_t> init_seeds) {
    if (init_seeds.size() < 2) throw std::invalid_argument("certify_unique: need at least two trials");
    std::vector<Weights> sols;
    UniquenessReport rep;
    for (std::uint64_t seed : init_seeds) {
        OptimizerConfig cfg;
        cfg.lambda = lambda;
        cfg.method = ExactBR{tolerance, ExactBR{}.max_iters, seed};
        FitResult r = fit_svm(data, plan, cfg);
        rep.gaps.push_back(r.gap);
        sols.push_back(std::move(r.weights));
    }
    for (std::size_t a = 0; a < sols.size(); ++a)
        for (std::size_t b = a + 1; b < sols.size(); ++b)
            rep.max_pairwise_distance = std::max(rep.max_pairwise_distance, distance2(sols[a].w, sols[b].w));
    rep.certified_bound = 2.0 * std::sqrt(2.0 * tolerance / lambda);
    rep.weights = std::move(sols.front());
    return rep;
}

AdamTrainer::AdamTrainer(std::size_t dim, double lambda, Stochastic config, std::vector<double> init)
    : lambda_(lambda), cfg_(config), w_(std::move(init)) {
    if (w_.empty()) w_.assign(dim, 0.0);
    if (w_.size() != dim) throw std::invalid_argument("AdamTrainer: init has the wrong dimension");
    m_.assign(dim, 0.0);
    v_.assign(dim, 0.0);
    grad_.assign(dim, 0.0);
}

void AdamTrainer::step(std::span<const double> grad) {
    ++step_;
    const double t = static_cast<double>(step_);
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t);
    const double step_size = cfg_.learning_rate / bc1;
    const double sqrt_bc2 = std::sqrt(bc2);
    for (std::size_t i = 0; i < w_.size(); ++i) {
        const double g = grad[i];
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
        w_[i] -= step_size * m_[i] / (std::sqrt(v_[i]) / sqrt_bc2 + cfg_.adam_eps);
    }
}

void AdamTrainer::run_epoch(const LabelledView& data, const TrainingLoss& loss) {
    require_dim(data.dim, w_.size(), "AdamTrainer::run_epoch");
    const std::size_t n = data.size();
    if (n == 0) throw std::invalid_argument("AdamTrainer::run_epoch: empty data");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto rng = derived_stream(cfg_.seed, epoch_, 0x5eed);
    std::shuffle(perm.begin(), perm.end(), rng);

    const auto* ph = std::get_if<PerturbedHinge>(&loss);
    const double eps = ph ? 0.0 : std::get<RobustHinge>(loss).eps;
    if (ph) require_dim(ph->plan.dim(), w_.size(), "AdamTrainer::run_epoch");
    const double nn = static_cast<double>(n);
    const std::size_t dim = w_.size();

    for (std::size_t start = 0; start < n; start += cfg_.batch_size) {
        const std::size_t end = std::min(n, start + cfg_.batch_size);
        const double bsz = static_cast<double>(end - start);
        std::fill(grad_.begin(), grad_.end(), 0.0);
        // Offset added to 1 - y<w,x> for every sample of this batch.
        const double offset = ph ? dot(w_, ph->plan.v()) : eps * norm1(w_);
        double active = 0.0;
        for (std::size_t b = start; b < end; ++b) {
            const std::size_t k = perm[b];
            const auto x = data.row(k);
            const double y = data.labels[k];
            if (1.0 - y * dot(w_, x) + offset > 0.0) {
                const double s = data.uniform() ? 1.0 : data.weight(k) * nn;
                for (std::size_t i = 0; i < dim; ++i) grad_[i] -= s * y * x[i];
                active += s;
            }
        }
        for (std::size_t i = 0; i < dim; ++i) {
            const double pen = ph ? ph->plan.v()[i] : eps * sign(w_[i]);
            grad_[i] = (grad_[i] + active * pen) / bsz + lambda_ * w_[i];
        }
        step(grad_);
    }
    ++epoch_;
}

}  // namespace slar

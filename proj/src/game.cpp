#include "slar/game.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace slar {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::standard: return "standard";
        case Method::at: return "at";
        case Method::oat: return "oat";
        case Method::ne: return "ne";
    }
    return "?";
}

std::optional<Method> parse_method(std::string_view s) {
    if (s == "standard") return Method::standard;
    if (s == "at") return Method::at;
    if (s == "oat") return Method::oat;
    if (s == "ne") return Method::ne;
    return std::nullopt;
}

void GameConfig::validate(std::size_t dim) const {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be >= 0");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be > 0");
    if (rounds == 0) throw std::invalid_argument("rounds must be >= 1");
    if (!init_w.empty() && init_w.size() != dim) throw std::invalid_argument("init_w has the wrong dimension");
    OptimizerConfig s = solver;
    s.lambda = lambda;
    s.validate();
}

GameData GameData::population(const Support& support, const DistributionSpec& spec) {
    if (support.dim != spec.dim()) throw std::invalid_argument("GameData: support does not match spec");
    return {support.view(), support.view(), spec.means(), 0.0};
}

GameData GameData::empirical(const Dataset& train, const Dataset& test, const DistributionSpec* spec) {
    if (train.dim != test.dim) throw std::invalid_argument("GameData: train/test dimension mismatch");
    GameData g{train.view(), test.view(), {}, 0.0};
    if (spec) {
        if (spec->dim() != train.dim) throw std::invalid_argument("GameData: spec does not match data");
        g.means = spec->means();
    } else {
        MeanEstimate est = estimate_means(train);
        g.means = std::move(est.means);
        for (double s : est.stderrs) g.estimation_error = std::max(g.estimation_error, s);
    }
    return g;
}

namespace {

double safe_nonrobust_mass(const Weights& w, std::span<const double> means, double eps) {
    if (!(dot(w.w, w.w) > 0.0)) return 0.0;
    return nonrobust_mass(w, means, eps);
}

OptimizerConfig solver_for(const GameConfig& cfg) {
    OptimizerConfig s = cfg.solver;
    s.lambda = cfg.lambda;
    return s;
}

std::vector<double> initial_weights(const GameConfig& cfg, std::size_t dim) {
    return cfg.init_w.empty() ? std::vector<double>(dim, 0.0) : cfg.init_w;
}

TrajectoryRecord make_record(std::size_t t, Weights w, PerturbationPlan v, std::span<const double> prev,
                             const GameData& data, double eps, double objective, double gap) {
    TrajectoryRecord r;
    r.t = t;
    r.delta_w_norm = distance2(w.w, prev);
    r.w_norm = norm2(w.w);
    r.nonrobust_mass = safe_nonrobust_mass(w, data.means, eps);
    r.std_acc_train = evaluate(w, data.train, eps).standard;
    const Accuracy test = evaluate(w, data.test, eps);
    r.std_acc_test = test.standard;
    r.robust_acc_test = test.certified_robust;
    r.objective = objective;
    r.gap = gap;
    r.w = std::move(w);
    r.v = std::move(v);
    return r;
}

Trajectory start(const GameData& data, const GameConfig& config, Method m) {
    config.validate(data.train.dim);
    if (data.means.size() != data.train.dim) throw std::invalid_argument("GameData: means have the wrong dimension");
    Trajectory traj;
    traj.config = config;
    traj.method = m;
    return traj;
}

Stochastic reseeded(Stochastic s, std::size_t round) {
    s.seed = derived_stream(s.seed, round, 0xf7e5)();
    return s;
}

// Shared driver for the single-objective methods (standard, oat, ne).
Trajectory run_fixed(const GameData& data, const GameConfig& config, Method m, const TrainingLoss& loss) {
    Trajectory traj = start(data, config, m);
    const std::size_t dim = data.train.dim;
    const OptimizerConfig solver = solver_for(config);
    std::vector<double> prev = initial_weights(config, dim);
    const auto* ph = std::get_if<PerturbedHinge>(&loss);
    const double eps = config.eps;

    auto plan_for = [&](const Weights& w) { return ph ? ph->plan : worst_case_plan(w, eps); };
    auto objective_of = [&](const Weights& w) {
        return ph ? row_utility(ph->plan, w, data.train) : robust_objective(w, eps, data.train);
    };

    if (solver.exact()) {
        try {
            FitResult fit = ph ? fit_svm(data.train, ph->plan, solver) : fit_oat(data.train, eps, solver);
            PerturbationPlan v = plan_for(fit.weights);
            traj.records.push_back(
                make_record(1, std::move(fit.weights), std::move(v), prev, data, eps, fit.objective, fit.gap));
        } catch (const SolverError& e) {
            traj.error = e.what();
        }
        return traj;
    }

    const auto& sgd = std::get<Stochastic>(solver.method);
    AdamTrainer trainer(dim, config.lambda, sgd, prev);
    for (std::size_t t = 1; t <= config.rounds; ++t) {
        for (std::size_t e = 0; e < sgd.epochs; ++e) trainer.run_epoch(data.train, loss);
        Weights w = trainer.snapshot();
        const double obj = objective_of(w);
        PerturbationPlan v = plan_for(w);
        traj.records.push_back(make_record(t, std::move(w), std::move(v), prev, data, eps, obj,
                                           std::numeric_limits<double>::quiet_NaN()));
        prev = trainer.weights();
    }
    return traj;
}

}  // namespace

Trajectory run_at(const GameData& data, const GameConfig& config) {
    Trajectory traj = start(data, config, Method::at);
    const std::size_t dim = data.train.dim;
    const OptimizerConfig solver = solver_for(config);
    std::vector<double> prev = initial_weights(config, dim);

    std::unique_ptr<AdamTrainer> trainer;
    const Stochastic* sgd = std::get_if<Stochastic>(&solver.method);
    if (sgd && config.warm_start) trainer = std::make_unique<AdamTrainer>(dim, config.lambda, *sgd, prev);

    for (std::size_t t = 1; t <= config.rounds; ++t) {
        PerturbationPlan plan = worst_case_plan(Weights{prev, config.lambda}, config.eps);
        Weights w;
        double obj = 0.0;
        double gap = std::numeric_limits<double>::quiet_NaN();
        if (!sgd) {
            try {
                FitResult fit = fit_svm(data.train, plan, solver);
                w = std::move(fit.weights);
                obj = fit.objective;
                gap = fit.gap;
            } catch (const SolverError& e) {
                traj.error = "round " + std::to_string(t) + ": " + e.what();
                return traj;
            }
        } else {
            if (!config.warm_start)
                trainer = std::make_unique<AdamTrainer>(dim, config.lambda, reseeded(*sgd, t), solver.init);
            for (std::size_t e = 0; e < sgd->epochs; ++e) trainer->run_epoch(data.train, PerturbedHinge{plan});
            w = trainer->snapshot();
            obj = row_utility(plan, w, data.train);
        }
        std::vector<double> next = w.w;
        traj.records.push_back(make_record(t, std::move(w), std::move(plan), prev, data, config.eps, obj, gap));
        prev = std::move(next);
    }
    return traj;
}

Trajectory run_oat(const GameData& data, const GameConfig& config) {
    return run_fixed(data, config, Method::oat, RobustHinge{config.eps});
}

Trajectory run_standard(const GameData& data, const GameConfig& config) {
    return run_fixed(data, config, Method::standard, PerturbedHinge{PerturbationPlan::zero(data.train.dim, config.eps)});
}

NEResult run_ne(const GameData& data, const GameConfig& config) {
    PerturbationPlan plan = ne_plan(data.means, config.eps);
    NEResult res;
    res.trajectory = run_fixed(data, config, Method::ne, PerturbedHinge{plan});
    res.plan = std::move(plan);
    res.estimation_error = data.estimation_error;
    if (!res.trajectory.records.empty()) res.weights = res.trajectory.last().w;
    return res;
}

Trajectory run_method(Method m, const GameData& data, const GameConfig& config) {
    switch (m) {
        case Method::standard: return run_standard(data, config);
        case Method::at: return run_at(data, config);
        case Method::oat: return run_oat(data, config);
        case Method::ne: return run_ne(data, config).trajectory;
    }
    throw std::invalid_argument("unknown method");
}

NEReport verify_ne(const PerturbationPlan& plan, const Weights& weights, const LabelledView& data, double eps,
                   double tol, double solve_tolerance) {
    NEReport rep;
    if (plan.dim() != weights.dim() || weights.dim() != data.dim) {
        rep.detail = "dimension mismatch";
        return rep;
    }
    const double u = row_utility(plan, weights, data);
    rep.row_gap = row_utility(worst_case_plan(weights, eps), weights, data) - u;
    rep.row_ok = rep.row_gap <= tol;

    OptimizerConfig cfg;
    cfg.lambda = weights.lambda;
    cfg.method = ExactBR{solve_tolerance, ExactBR{}.max_iters, 0};
    try {
        const FitResult best = fit_svm(data, plan, cfg);
        rep.column_gap = u - (best.objective - best.gap);
        rep.column_ok = rep.column_gap <= tol;
    } catch (const SolverError& e) {
        rep.column_gap = std::numeric_limits<double>::infinity();
        rep.detail = e.what();
    }
    rep.passed = rep.row_ok && rep.column_ok;
    return rep;
}

}  // namespace slar

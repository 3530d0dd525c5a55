#include "slar/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <ostream>
#include <sstream>

#include "slar/io.hpp"

namespace slar::cli {

ExperimentConfig apply_overrides(ExperimentConfig cfg, const RunOptions& opts) {
    if (opts.seed) {
        cfg.seed = *opts.seed;
        cfg.sgd_cfg.seed = *opts.seed;
    }
    if (opts.out) cfg.output_dir = *opts.out;
    return cfg;
}

namespace {

struct ExperimentData {
    Dataset train, test;
    Support support;
    GameData game;
};

ExperimentData prepare(const ExperimentConfig& cfg) {
    ExperimentData d;
    if (cfg.train_on == TrainOn::population) {
        d.support = enumerate_support(cfg.spec);
        d.game = GameData::population(d.support, cfg.spec);
    } else {
        d.train = sample(cfg.spec, cfg.n_train, cfg.seed, cfg.threads);
        d.test = sample(cfg.spec, cfg.n_test, derived_stream(cfg.seed, 1, 0x7e57)(), cfg.threads);
        d.game = GameData::empirical(d.train, d.test, &cfg.spec);
    }
    return d;
}

}  // namespace

RunOutput run_experiment(const ExperimentConfig& cfg) {
    ExperimentData data = prepare(cfg);
    RunOutput out;
    out.means = data.game.means;
    const GameConfig game = cfg.game_config();
    if (cfg.threads > 1 && cfg.methods.size() > 1) {
        // Methods share only read-only data, so they can run side by side.
        std::vector<std::future<Trajectory>> jobs;
        for (Method m : cfg.methods)
            jobs.push_back(std::async(std::launch::async, [&, m] { return run_method(m, data.game, game); }));
        for (std::size_t i = 0; i < jobs.size(); ++i) out.results.push_back({cfg.methods[i], jobs[i].get()});
    } else {
        for (Method m : cfg.methods) out.results.push_back({m, run_method(m, data.game, game)});
    }
    if (cfg.spec.dim() >= 2 && std::holds_alternative<TwoPoint>(cfg.spec.features[0].kind())) {
        try {
            out.conditions = evaluate_conditions(cfg.spec, cfg.eps, cfg.lambda, /*allow_closed_form=*/true);
        } catch (const std::invalid_argument&) {
        }
    }
    return out;
}

double deltaw_mean_tail(const Trajectory& traj) {
    const auto& r = traj.records;
    if (r.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t from = r.size() / 2;
    double s = 0.0;
    for (std::size_t i = from; i < r.size(); ++i) s += r[i].delta_w_norm;
    return s / static_cast<double>(r.size() - from);
}

double deltaw_min_tail(const Trajectory& traj) {
    const auto& r = traj.records;
    if (r.empty()) return std::numeric_limits<double>::quiet_NaN();
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = r.size() / 2; i < r.size(); ++i) m = std::min(m, r[i].delta_w_norm);
    return m;
}

nlohmann::json condition_json(const ConditionReport& r) {
    nlohmann::json j;
    j["p"] = r.p;
    j["eps"] = r.eps;
    j["lambda"] = r.lambda;
    j["sigma_max"] = r.sigma_max;
    j["mu_norm"] = r.mu_norm;
    j["mu_prime_norm"] = r.mu_prime_norm;
    j["sigma_bar_mu"] = r.sigma_bar_mu;
    j["p_threshold_standard"] = r.p_threshold_standard;
    j["p_threshold_at"] = r.p_threshold_at;
    j["p_threshold_at_simplified"] = r.p_threshold_at_simplified;
    j["sigma_bound"] = r.sigma_bound;
    j["simplified_applicable"] = r.simplified_applicable;
    j["sup_method"] = std::string(to_string(r.sup_method));
    std::size_t minus = 0, zero = 0, plus = 0;
    for (int s : r.sup.s) (s < 0 ? minus : s > 0 ? plus : zero)++;
    nlohmann::json sup;
    sup["sigma_bar"] = r.sup.sigma_bar;
    sup["shifted_norm"] = r.sup.shifted_norm;
    sup["value"] = r.sup.value;
    sup["count_minus"] = minus;
    sup["count_zero"] = zero;
    sup["count_plus"] = plus;
    if (r.sup.s.size() <= kMaxExhaustiveDim) sup["s"] = r.sup.s;
    j["sup"] = sup;
    j["holds"] = {{"standard", r.holds_standard}, {"at", r.holds_at}, {"at_simplified", r.holds_at_simplified}};
    j["margins"] = {{"standard", r.margin_standard()},
                    {"at", r.margin_at()},
                    {"at_simplified", r.margin_at_simplified()}};
    return j;
}

nlohmann::json summary_json(const RunOutput& run) {
    nlohmann::json arr = nlohmann::json::array();
    const nlohmann::json cond = run.conditions ? condition_json(*run.conditions) : nlohmann::json();
    for (const auto& mr : run.results) {
        nlohmann::json j;
        j["method"] = std::string(to_string(mr.method));
        const auto& t = mr.trajectory;
        if (!t.records.empty()) {
            const auto& last = t.last();
            j["std_acc_train"] = last.std_acc_train;
            j["std_acc_test"] = last.std_acc_test;
            j["robust_acc_test"] = last.robust_acc_test;
            j["nonrobust_mass"] = last.nonrobust_mass;
        } else {
            j["std_acc_train"] = nullptr;
            j["std_acc_test"] = nullptr;
            j["robust_acc_test"] = nullptr;
            j["nonrobust_mass"] = nullptr;
        }
        j["deltaw_mean_tail"] = deltaw_mean_tail(t);
        j["deltaw_min_tail"] = deltaw_min_tail(t);
        j["condition_report"] = cond;
        if (t.error) j["error"] = *t.error;
        arr.push_back(std::move(j));
    }
    return arr;
}

namespace {

std::string render(auto&& writer) {
    std::ostringstream o;
    writer(o);
    return o.str();
}

void write_plots(const RunOutput& run, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    std::vector<io::Series> dw, acc, wts;
    for (const auto& mr : run.results) {
        const auto& recs = mr.trajectory.records;
        if (recs.empty()) continue;
        const std::string name(to_string(mr.method));
        io::Series d{name, {}, {}}, s{name + " standard", {}, {}}, r{name + " robust", {}, {}, true};
        for (const auto& rec : recs) {
            const double t = static_cast<double>(rec.t);
            d.x.push_back(t);
            d.y.push_back(rec.delta_w_norm);
            s.x.push_back(t);
            s.y.push_back(rec.std_acc_test);
            r.x.push_back(t);
            r.y.push_back(rec.robust_acc_test);
        }
        dw.push_back(std::move(d));
        acc.push_back(std::move(s));
        acc.push_back(std::move(r));
        io::Series w{name, {}, {}};
        const auto& last = recs.back().w.w;
        for (std::size_t i = 0; i < last.size(); ++i)
            if (std::abs(run.means[i]) <= cfg.eps) {
                w.x.push_back(static_cast<double>(i + 1));
                w.y.push_back(last[i]);
            }
        wts.push_back(std::move(w));
    }
    io::write_file(dir / "fig_deltaw.svg",
                   io::svg_chart(dw, {"Weight change between consecutive rounds", "round t", "||w(t) - w(t-1)||"}));
    io::write_file(dir / "fig_acc.svg",
                   io::svg_chart(acc, {"Test accuracy (solid: standard, dashed: certified robust)", "round t",
                                       "accuracy"}));
    io::write_file(dir / "fig_weights.svg", io::svg_chart(wts, {"Final weights on non-robust features",
                                                                "feature index", "w_i", true}));
}

}  // namespace

void write_artifacts(const RunOutput& run, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    for (const auto& mr : run.results) {
        const std::string name(to_string(mr.method));
        io::write_file(dir / ("trajectory_" + name + ".csv"),
                       render([&](std::ostream& o) { io::write_trajectory_csv(o, mr.trajectory); }));
        if (!mr.trajectory.records.empty())
            io::write_file(dir / ("weights_" + name + ".csv"), render([&](std::ostream& o) {
                               io::write_run_weights_csv(o, mr.trajectory.last().w, run.means, cfg.eps);
                           }));
    }
    io::write_file(dir / "summary.json", summary_json(run).dump(2) + "\n");
    if (cfg.emit_plots) write_plots(run, cfg, dir);
}

namespace {

// Console numbers; files keep full precision.
std::string brief(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

}  // namespace

int cmd_run(const ExperimentConfig& base, const RunOptions& opts, std::ostream& log) {
    const ExperimentConfig cfg = apply_overrides(base, opts);
    RunOutput run;
    try {
        run = run_experiment(cfg);
    } catch (const std::invalid_argument& e) {
        log << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::length_error& e) {
        log << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    try {
        write_artifacts(run, cfg, cfg.output_dir);
    } catch (const io::IoError& e) {
        log << "i/o error: " << e.what() << '\n';
        return kIoError;
    }
    bool solver_failed = false;
    for (const auto& mr : run.results) {
        if (mr.trajectory.error) {
            solver_failed = true;
            log << to_string(mr.method) << ": solver error: " << *mr.trajectory.error << '\n';
            continue;
        }
        if (opts.quiet || mr.trajectory.records.empty()) continue;
        const auto& last = mr.trajectory.last();
        log << to_string(mr.method) << ": std_acc_test=" << brief(last.std_acc_test)
            << " robust_acc_test=" << brief(last.robust_acc_test) << " nonrobust_mass=" << brief(last.nonrobust_mass)
            << " deltaw_mean_tail=" << brief(deltaw_mean_tail(mr.trajectory)) << '\n';
    }
    if (!opts.quiet) log << "wrote " << cfg.output_dir.string() << '\n';
    return solver_failed ? kSolverError : kOk;
}

int cmd_gen(const ExperimentConfig& base, const RunOptions& opts, std::ostream& log) {
    const ExperimentConfig cfg = apply_overrides(base, opts);
    try {
        const Dataset train = sample(cfg.spec, cfg.n_train, cfg.seed, cfg.threads);
        const Dataset test = sample(cfg.spec, cfg.n_test, derived_stream(cfg.seed, 1, 0x7e57)(), cfg.threads);
        io::write_file(cfg.output_dir / "train.csv", render([&](std::ostream& o) { io::write_dataset_csv(o, train); }));
        io::write_file(cfg.output_dir / "test.csv", render([&](std::ostream& o) { io::write_dataset_csv(o, test); }));
    } catch (const io::IoError& e) {
        log << "i/o error: " << e.what() << '\n';
        return kIoError;
    }
    if (!opts.quiet) log << "wrote " << (cfg.output_dir / "train.csv").string() << " and test.csv\n";
    return kOk;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

std::string hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) s[i] = digits[h & 15];
    return s;
}

const char* status_name(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::skipped: return "skipped";
    }
    return "?";
}

}  // namespace

nlohmann::json verification_json(const std::vector<CheckResult>& checks) {
    nlohmann::json arr = nlohmann::json::array();
    std::uint64_t digest = fnv1a64("");
    bool passed = true;
    for (const auto& c : checks) {
        digest = fnv1a64(c.name + "\n" + c.inputs + "\n", digest);
        passed = passed && c.ok();
        nlohmann::json j;
        j["name"] = c.name;
        j["status"] = status_name(c.status);
        j["margin"] = std::isfinite(c.margin) ? nlohmann::json(c.margin) : nlohmann::json(nullptr);
        j["inputs_digest"] = hex(fnv1a64(c.inputs));
        j["detail"] = c.detail;
        arr.push_back(std::move(j));
    }
    return {{"inputs_digest", hex(digest)}, {"passed", passed}, {"checks", arr}};
}

int cmd_verify(const std::vector<CheckResult>& checks, const std::filesystem::path& dir, bool quiet,
               std::ostream& log) {
    const nlohmann::json report = verification_json(checks);
    try {
        io::write_file(dir / "verify.json", report.dump(2) + "\n");
    } catch (const io::IoError& e) {
        log << "i/o error: " << e.what() << '\n';
        return kIoError;
    }
    std::size_t failed = 0;
    for (const auto& c : checks) {
        if (!c.ok()) ++failed;
        if (!quiet || !c.ok())
            log << status_name(c.status) << "  " << c.name << "  margin=" << io::format_double(c.margin) << "  "
                << c.detail << '\n';
    }
    if (!quiet) log << checks.size() - failed << "/" << checks.size() << " checks ok; wrote " << (dir / "verify.json").string() << '\n';
    return failed == 0 ? kOk : kVerificationFailed;
}

}  // namespace slar::cli

#include "slar/config.hpp"

#include <boost/program_options.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "slar/io.hpp"

namespace slar::cli {

namespace po = boost::program_options;

GameConfig ExperimentConfig::game_config() const {
    GameConfig g;
    g.eps = eps;
    g.lambda = lambda;
    g.rounds = rounds;
    g.warm_start = warm_start;
    g.solver.lambda = lambda;
    if (exact)
        g.solver.method = exact_cfg;
    else
        g.solver.method = sgd_cfg;
    if (init == InitKind::uniform) {
        const std::size_t D = spec.dim();
        const double r = 1.0 / std::sqrt(static_cast<double>(D));
        auto rng = derived_stream(seed, 0, 0x1417);
        std::uniform_real_distribution<double> u(-r, r);
        g.init_w.resize(D);
        for (double& w : g.init_w) w = u(rng);
    }
    return g;
}

namespace {

double to_double(const std::string& field, const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e || !std::isfinite(v)) throw ConfigError(field, "not a number: '" + s + "'");
    return v;
}

std::uint64_t to_u64(const std::string& field, const std::string& s) {
    std::uint64_t v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e) throw ConfigError(field, "not a non-negative integer: '" + s + "'");
    return v;
}

bool to_bool(const std::string& field, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(field, "not a boolean: '" + s + "'");
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> out;
    std::string w;
    while (ss >> w) out.push_back(w);
    return out;
}

FeatureSpec parse_feature(const std::string& field, const std::string& value) {
    const auto w = words(value);
    if (w.empty()) throw ConfigError(field, "empty feature");
    try {
        if (w[0] == "twopoint") {
            if (w.size() != 2) throw ConfigError(field, "expected 'twopoint <p>'");
            return FeatureSpec::two_point(to_double(field, w[1]));
        }
        if (w[0] == "gaussian") {
            if (w.size() != 3) throw ConfigError(field, "expected 'gaussian <mean> <stdev>'");
            return FeatureSpec::gaussian(to_double(field, w[1]), to_double(field, w[2]));
        }
        if (w[0] == "discrete") {
            if (w.size() < 2) throw ConfigError(field, "expected 'discrete <value>:<prob> ...'");
            std::vector<double> values, probs;
            for (std::size_t i = 1; i < w.size(); ++i) {
                const auto colon = w[i].find(':');
                if (colon == std::string::npos) throw ConfigError(field, "atom '" + w[i] + "' is not <value>:<prob>");
                values.push_back(to_double(field, w[i].substr(0, colon)));
                probs.push_back(to_double(field, w[i].substr(colon + 1)));
            }
            return FeatureSpec::discrete(std::move(values), std::move(probs));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(field, e.what());
    }
    throw ConfigError(field, "unknown feature kind '" + w[0] + "' (twopoint|gaussian|discrete)");
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "distribution.d",      "distribution.p",         "distribution.mu",        "distribution.sigma",
        "distribution.discrete", "n_train",              "n_test",                 "eps",
        "lambda",              "method",                 "rounds",                 "solver",
        "solver.exact.tolerance", "solver.exact.max_iters", "solver.sgd.lr",       "solver.sgd.batch",
        "solver.sgd.epochs",   "warm_start",             "init",                   "train_on",
        "seed",                "output_dir",             "emit_plots",             "threads",
    };
    return keys;
}

}  // namespace

ExperimentConfig parse_config(std::istream& is) {
    po::options_description desc;
    for (const auto& k : known_keys()) desc.add_options()(k.c_str(), po::value<std::string>());

    po::parsed_options parsed(&desc);
    try {
        parsed = po::parse_config_file(is, desc, /*allow_unregistered=*/true);
    } catch (const po::error& e) {
        throw ConfigError("", e.what());
    }

    std::map<std::string, std::string> kv;
    std::map<std::size_t, std::pair<std::string, std::string>> features;
    for (const auto& opt : parsed.options) {
        const std::string& key = opt.string_key;
        const std::string value = opt.value.empty() ? std::string() : opt.value.front();
        if (opt.unregistered) {
            if (key.rfind("feature.", 0) == 0) {
                const std::size_t idx = to_u64(key, key.substr(8));
                if (idx == 0) throw ConfigError(key, "feature indices start at 1");
                if (!features.emplace(idx, std::make_pair(key, value)).second)
                    throw ConfigError(key, "given more than once");
                continue;
            }
            throw ConfigError(key, "unknown key");
        }
        if (!kv.emplace(key, value).second) throw ConfigError(key, "given more than once");
    }
    auto get = [&](const std::string& k) -> const std::string* {
        auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second;
    };

    ExperimentConfig cfg;
    // distribution
    const bool shorthand = get("distribution.d") || get("distribution.p") || get("distribution.mu") ||
                           get("distribution.sigma") || get("distribution.discrete");
    if (!features.empty()) {
        if (shorthand) throw ConfigError("feature.1", "use either feature.<i> entries or distribution.*, not both");
        std::size_t expect = 1;
        for (const auto& [idx, kvp] : features) {
            if (idx != expect) throw ConfigError("feature." + std::to_string(expect), "missing (indices must be 1..D)");
            cfg.spec.features.push_back(parse_feature(kvp.first, kvp.second));
            ++expect;
        }
    } else {
        long long d = 2000;
        double p = 0.7, mu = 0.01, sigma = 0.01;
        bool discrete = false;
        if (auto v = get("distribution.d")) {
            const std::uint64_t x = to_u64("distribution.d", *v);
            if (x < 1 || x > 10'000'000) throw ConfigError("distribution.d", "must be in [1, 1e7]");
            d = static_cast<long long>(x);
        }
        if (auto v = get("distribution.p")) p = to_double("distribution.p", *v);
        if (auto v = get("distribution.mu")) mu = to_double("distribution.mu", *v);
        if (auto v = get("distribution.sigma")) sigma = to_double("distribution.sigma", *v);
        if (auto v = get("distribution.discrete")) discrete = to_bool("distribution.discrete", *v);
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("distribution.p", "must be in [0, 1]");
        if (!(sigma >= 0.0)) throw ConfigError("distribution.sigma", "must be >= 0");
        try {
            cfg.spec = discrete ? weak_feature_distribution_discrete(static_cast<int>(d), p, mu, sigma)
                                : weak_feature_distribution(static_cast<int>(d), p, mu, sigma);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("distribution", e.what());
        }
    }

    if (auto v = get("n_train")) {
        cfg.n_train = to_u64("n_train", *v);
        if (cfg.n_train == 0) throw ConfigError("n_train", "must be >= 1");
    }
    if (auto v = get("n_test")) {
        cfg.n_test = to_u64("n_test", *v);
        if (cfg.n_test == 0) throw ConfigError("n_test", "must be >= 1");
    }
    if (auto v = get("eps")) {
        cfg.eps = to_double("eps", *v);
        if (cfg.eps < 0.0) throw ConfigError("eps", "must be >= 0");
    }
    if (auto v = get("lambda")) {
        cfg.lambda = to_double("lambda", *v);
        if (!(cfg.lambda > 0.0)) throw ConfigError("lambda", "must be > 0");
    }
    if (auto v = get("method")) {
        cfg.methods.clear();
        std::string item;
        std::istringstream ss(*v);
        while (std::getline(ss, item, ',')) {
            const auto w = words(item);
            if (w.size() != 1) throw ConfigError("method", "bad entry '" + item + "'");
            if (w[0] == "all") {
                cfg.methods = {Method::standard, Method::at, Method::oat, Method::ne};
                continue;
            }
            auto m = parse_method(w[0]);
            if (!m) throw ConfigError("method", "unknown method '" + w[0] + "' (standard|at|oat|ne|all)");
            if (std::find(cfg.methods.begin(), cfg.methods.end(), *m) == cfg.methods.end()) cfg.methods.push_back(*m);
        }
        if (cfg.methods.empty()) throw ConfigError("method", "empty");
    }
    if (auto v = get("rounds")) {
        cfg.rounds = to_u64("rounds", *v);
        if (cfg.rounds == 0) throw ConfigError("rounds", "must be >= 1");
    }
    if (auto v = get("solver")) {
        if (*v == "exact") cfg.exact = true;
        else if (*v == "sgd") cfg.exact = false;
        else throw ConfigError("solver", "must be 'exact' or 'sgd'");
    }
    if (auto v = get("solver.exact.tolerance")) {
        cfg.exact_cfg.tolerance = to_double("solver.exact.tolerance", *v);
        if (!(cfg.exact_cfg.tolerance > 0.0)) throw ConfigError("solver.exact.tolerance", "must be > 0");
    }
    if (auto v = get("solver.exact.max_iters")) {
        cfg.exact_cfg.max_iters = to_u64("solver.exact.max_iters", *v);
        if (cfg.exact_cfg.max_iters == 0) throw ConfigError("solver.exact.max_iters", "must be >= 1");
    }
    if (auto v = get("solver.sgd.lr")) {
        cfg.sgd_cfg.learning_rate = to_double("solver.sgd.lr", *v);
        if (!(cfg.sgd_cfg.learning_rate > 0.0)) throw ConfigError("solver.sgd.lr", "must be > 0");
    }
    if (auto v = get("solver.sgd.batch")) {
        cfg.sgd_cfg.batch_size = to_u64("solver.sgd.batch", *v);
        if (cfg.sgd_cfg.batch_size == 0) throw ConfigError("solver.sgd.batch", "must be >= 1");
    }
    if (auto v = get("solver.sgd.epochs")) {
        cfg.sgd_cfg.epochs = to_u64("solver.sgd.epochs", *v);
        if (cfg.sgd_cfg.epochs == 0) throw ConfigError("solver.sgd.epochs", "must be >= 1");
    }
    if (auto v = get("warm_start")) cfg.warm_start = to_bool("warm_start", *v);
    if (auto v = get("init")) {
        if (*v == "zero") cfg.init = InitKind::zero;
        else if (*v == "uniform") cfg.init = InitKind::uniform;
        else throw ConfigError("init", "must be 'zero' or 'uniform'");
    }
    if (auto v = get("train_on")) {
        if (*v == "data") cfg.train_on = TrainOn::data;
        else if (*v == "population") cfg.train_on = TrainOn::population;
        else throw ConfigError("train_on", "must be 'data' or 'population'");
    }
    if (auto v = get("seed")) cfg.seed = to_u64("seed", *v);
    cfg.sgd_cfg.seed = cfg.seed;
    if (auto v = get("output_dir")) {
        if (v->empty()) throw ConfigError("output_dir", "must not be empty");
        cfg.output_dir = *v;
    }
    if (auto v = get("emit_plots")) cfg.emit_plots = to_bool("emit_plots", *v);
    if (auto v = get("threads")) {
        const std::uint64_t t = to_u64("threads", *v);
        if (t == 0 || t > 1024) throw ConfigError("threads", "must be in [1, 1024]");
        cfg.threads = static_cast<unsigned>(t);
    }

    if (cfg.train_on == TrainOn::population && !cfg.spec.finite_support())
        throw ConfigError("train_on", "population training needs a finitely supported distribution");
    if (cfg.train_on == TrainOn::population && !cfg.exact)
        throw ConfigError("train_on", "population training needs solver = exact");
    return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io::IoError("cannot read config " + path.string());
    return parse_config(in);
}

std::string builtin_config_text(std::string_view name) {
    if (name == "experiment")
        return "# d=2000 weak features, sampled data, Adam\n"
               "distribution.d = 2000\n"
               "distribution.p = 0.7\n"
               "distribution.mu = 0.01\n"
               "distribution.sigma = 0.01\n"
               "n_train = 10000\n"
               "n_test = 1000\n"
               "eps = 0.02\n"
               "lambda = 0.01\n"
               "method = all\n"
               "rounds = 50\n"
               "solver = sgd\n"
               "solver.sgd.lr = 0.01\n"
               "solver.sgd.batch = 200\n"
               "solver.sgd.epochs = 1\n"
               "seed = 1\n"
               "output_dir = out/experiment\n"
               "emit_plots = true\n";
    if (name == "exact-discrete")
        return "# same layout with two-point weak features, exact population solves\n"
               "distribution.d = 6\n"
               "distribution.p = 0.7\n"
               "distribution.mu = 0.05\n"
               "distribution.sigma = 0.3\n"
               "distribution.discrete = true\n"
               "eps = 0.1\n"
               "lambda = 0.1\n"
               "method = all\n"
               "rounds = 20\n"
               "solver = exact\n"
               "solver.exact.tolerance = 1e-10\n"
               "train_on = population\n"
               "n_test = 1000\n"
               "seed = 1\n"
               "output_dir = out/exact-discrete\n";
    if (name == "smoke")
        return "distribution.d = 50\n"
               "distribution.p = 0.7\n"
               "distribution.mu = 0.01\n"
               "distribution.sigma = 0.01\n"
               "n_train = 1000\n"
               "n_test = 200\n"
               "eps = 0.02\n"
               "lambda = 0.01\n"
               "method = all\n"
               "rounds = 6\n"
               "solver = sgd\n"
               "seed = 1\n"
               "output_dir = out/smoke\n";
    return {};
}

std::optional<ExperimentConfig> builtin_config(std::string_view name) {
    const std::string text = builtin_config_text(name);
    if (text.empty()) return std::nullopt;
    return parse_config_text(text);
}

std::string to_text(const ExperimentConfig& cfg) {
    std::ostringstream o;
    const std::string spec_text = [&] {
        std::ostringstream s;
        for (std::size_t i = 0; i < cfg.spec.dim(); ++i) {
            const auto& f = cfg.spec.features[i];
            s << "feature." << i + 1 << " = ";
            std::visit(
                [&](const auto& k) {
                    using K = std::decay_t<decltype(k)>;
                    if constexpr (std::is_same_v<K, TwoPoint>) {
                        s << "twopoint " << io::format_double(k.p);
                    } else if constexpr (std::is_same_v<K, Gaussian>) {
                        s << "gaussian " << io::format_double(k.mean) << ' ' << io::format_double(k.stdev);
                    } else {
                        s << "discrete";
                        for (std::size_t a = 0; a < k.values.size(); ++a)
                            s << ' ' << io::format_double(k.values[a]) << ':' << io::format_double(k.probs[a]);
                    }
                },
                f.kind());
            s << '\n';
        }
        return s.str();
    }();
    o << spec_text;
    o << "n_train = " << cfg.n_train << '\n' << "n_test = " << cfg.n_test << '\n';
    o << "eps = " << io::format_double(cfg.eps) << '\n' << "lambda = " << io::format_double(cfg.lambda) << '\n';
    o << "method = ";
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) o << (i ? "," : "") << to_string(cfg.methods[i]);
    o << '\n' << "rounds = " << cfg.rounds << '\n';
    o << "solver = " << (cfg.exact ? "exact" : "sgd") << '\n';
    o << "solver.exact.tolerance = " << io::format_double(cfg.exact_cfg.tolerance) << '\n';
    o << "solver.exact.max_iters = " << cfg.exact_cfg.max_iters << '\n';
    o << "solver.sgd.lr = " << io::format_double(cfg.sgd_cfg.learning_rate) << '\n';
    o << "solver.sgd.batch = " << cfg.sgd_cfg.batch_size << '\n';
    o << "solver.sgd.epochs = " << cfg.sgd_cfg.epochs << '\n';
    o << "warm_start = " << (cfg.warm_start ? "true" : "false") << '\n';
    o << "init = " << (cfg.init == InitKind::zero ? "zero" : "uniform") << '\n';
    o << "train_on = " << (cfg.train_on == TrainOn::data ? "data" : "population") << '\n';
    o << "seed = " << cfg.seed << '\n';
    o << "output_dir = " << cfg.output_dir.string() << '\n';
    o << "emit_plots = " << (cfg.emit_plots ? "true" : "false") << '\n';
    o << "threads = " << cfg.threads << '\n';
    return o.str();
}

}  // namespace slar::cli

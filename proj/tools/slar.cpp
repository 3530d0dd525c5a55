#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "slar/commands.hpp"
#include "slar/io.hpp"

namespace {

using namespace slar::cli;

// A path to a config file, or the name of a built-in config when no such file exists.
ExperimentConfig resolve_config(const std::string& arg) {
    if (!std::filesystem::exists(arg))
        if (auto cfg = builtin_config(arg)) return *cfg;
    return load_config(arg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adversarial training as a game: sample data, run training methods, verify properties."};
    app.require_subcommand(1);

    RunOptions opts;
    std::uint64_t seed = 0;
    std::string out, config;
    // Global flags; accepted before or after the subcommand.
    auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
    auto* out_opt = app.add_option("--out", out, "Override the output directory");
    app.add_flag("--quiet,-q", opts.quiet, "Only report errors");
    auto add_common = [](CLI::App* sub) { sub->fallthrough(); };

    auto* gen = app.add_subcommand("gen", "Sample train.csv and test.csv");
    gen->add_option("config", config, "Config file or built-in name (experiment, exact-discrete, smoke)")->required();
    add_common(gen);

    auto* run = app.add_subcommand("run", "Run the configured methods and write trajectories, weights and figures");
    run->add_option("config", config, "Config file or built-in name")->required();
    add_common(run);

    auto* verify = app.add_subcommand("verify", "Run the property checks and write verify.json");
    config = "builtin";
    verify->add_option("config", config, "'builtin' for the fixed suite, or a config file / built-in name");
    add_common(verify);

    auto* show = app.add_subcommand("show-config", "Print a built-in config");
    show->add_option("name", config, "Built-in name")->required();

    CLI11_PARSE(app, argc, argv);

    if (seed_opt->count()) opts.seed = seed;
    if (out_opt->count()) opts.out = out;

    try {
        if (show->parsed()) {
            const std::string text = builtin_config_text(config);
            if (text.empty()) {
                std::cerr << "unknown built-in config '" << config << "'\n";
                return kConfigError;
            }
            std::cout << text;
            return kOk;
        }
        if (verify->parsed() && config == "builtin") {
            const auto checks = builtin_suite(opts.seed.value_or(1));
            return cmd_verify(checks, opts.out.value_or("out/verify"), opts.quiet, std::cout);
        }
        const ExperimentConfig cfg = apply_overrides(resolve_config(config), opts);
        if (gen->parsed()) return cmd_gen(cfg, {std::nullopt, std::nullopt, opts.quiet}, std::cout);
        if (run->parsed()) return cmd_run(cfg, {std::nullopt, std::nullopt, opts.quiet}, std::cout);
        return cmd_verify(config_suite(cfg), cfg.output_dir, opts.quiet, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const slar::io::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIoError;
    } catch (const slar::SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kSolverError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
}

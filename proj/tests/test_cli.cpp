#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "slar/commands.hpp"

using namespace slar;
using namespace slar::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream o;
    o << in.rdbuf();
    return o.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("slar_cli_test_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("run writes every artifact") {
    const auto dir = scratch("run");
    std::ostringstream log;
    REQUIRE(cmd_run(*builtin_config("smoke"), {std::nullopt, dir, true}, log) == kOk);
    for (const char* m : {"standard", "at", "oat", "ne"}) {
        CHECK(fs::exists(dir / (std::string("trajectory_") + m + ".csv")));
        CHECK(fs::exists(dir / (std::string("weights_") + m + ".csv")));
    }
    for (const char* f : {"summary.json", "fig_deltaw.svg", "fig_acc.svg", "fig_weights.svg"}) CHECK(fs::exists(dir / f));

    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    REQUIRE(summary.is_array());
    CHECK(summary.size() == 4);
    for (const auto& rec : summary)
        for (const char* key : {"method", "std_acc_train", "std_acc_test", "robust_acc_test", "nonrobust_mass",
                                "deltaw_mean_tail", "deltaw_min_tail", "condition_report"})
            CHECK(rec.contains(key));
    CHECK(summary[0]["condition_report"]["holds"]["at"].is_boolean());

    const auto weights = slurp(dir / "weights_at.csv");
    CHECK(weights.rfind("index,mu_i,is_robust,w_i\n1,0.39999999999999991,1,", 0) == 0);  // 2 * 0.7 - 1
    CHECK(weights.find("\n2,0.01,0,") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("runs are byte-identical for the same seed and differ for another") {
    const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    auto cfg = *builtin_config("smoke");
    std::ostringstream log;
    REQUIRE(cmd_run(cfg, {std::nullopt, a, true}, log) == kOk);
    REQUIRE(cmd_run(cfg, {std::nullopt, b, true}, log) == kOk);
    REQUIRE(cmd_run(cfg, {std::uint64_t{2}, c, true}, log) == kOk);
    for (const char* f : {"trajectory_at.csv", "weights_at.csv", "trajectory_oat.csv", "summary.json"}) {
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(slurp(a / "trajectory_at.csv") != slurp(c / "trajectory_at.csv"));
    for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("concurrent methods give the same artifacts") {
    const auto a = scratch("thr_a"), b = scratch("thr_b");
    auto cfg = *builtin_config("smoke");
    std::ostringstream log;
    REQUIRE(cmd_run(cfg, {std::nullopt, a, true}, log) == kOk);
    cfg.threads = 4;
    REQUIRE(cmd_run(cfg, {std::nullopt, b, true}, log) == kOk);
    for (const char* m : {"standard", "at", "oat", "ne"})
        CHECK(slurp(a / (std::string("trajectory_") + m + ".csv")) == slurp(b / (std::string("trajectory_") + m + ".csv")));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("exact run on a discrete reduction") {
    const auto dir = scratch("exact");
    std::ostringstream log;
    REQUIRE(cmd_run(*builtin_config("exact-discrete"), {std::nullopt, dir, true}, log) == kOk);
    std::ifstream in(dir / "weights_ne.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string idx, mu, robust, w;
        std::getline(ss, idx, ',');
        std::getline(ss, mu, ',');
        std::getline(ss, robust, ',');
        std::getline(ss, w, ',');
        if (robust == "0") CHECK(std::abs(std::stod(w)) < 1e-6);
    }
    fs::remove_all(dir);
}

TEST_CASE("exit codes") {
    std::ostringstream log;
    // I/O failure: the output directory is a regular file.
    const auto blocker = scratch("blocker");
    fs::create_directories(blocker.parent_path());
    std::ofstream(blocker) << "x";
    CHECK(cmd_run(*builtin_config("smoke"), {std::nullopt, blocker / "out", true}, log) == kIoError);
    CHECK(cmd_gen(*builtin_config("smoke"), {std::nullopt, blocker / "out", true}, log) == kIoError);
    fs::remove(blocker);

    // Solver failure: an iteration cap that cannot be met.
    auto cfg = *builtin_config("exact-discrete");
    cfg.exact_cfg.max_iters = 1;
    cfg.exact_cfg.tolerance = 1e-300;
    cfg.methods = {Method::at};
    const auto dir = scratch("solver");
    CHECK(cmd_run(cfg, {std::nullopt, dir, true}, log) == kSolverError);
    fs::remove_all(dir);
}

TEST_CASE("gen writes train and test CSVs") {
    const auto dir = scratch("gen");
    auto cfg = *builtin_config("smoke");
    std::ostringstream log;
    REQUIRE(cmd_gen(cfg, {std::nullopt, dir, true}, log) == kOk);
    std::ifstream in(dir / "train.csv");
    std::string header, line;
    std::getline(in, header);
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == cfg.n_train);
    CHECK(std::count(header.begin(), header.end(), ',') == static_cast<long>(cfg.spec.dim()));
    const auto first = slurp(dir / "train.csv");
    REQUIRE(cmd_gen(cfg, {std::nullopt, dir, true}, log) == kOk);
    CHECK(slurp(dir / "train.csv") == first);
    fs::remove_all(dir);
}

TEST_CASE("verification report") {
    std::vector<CheckResult> checks{{"a", CheckStatus::pass, 0.5, "x", ""}, {"b", CheckStatus::skipped, 0.0, "y", ""}};
    const auto ok = verification_json(checks);
    CHECK(ok["passed"] == true);
    CHECK(ok["checks"].size() == 2);
    CHECK(ok["inputs_digest"].get<std::string>().size() == 16);
    checks.push_back({"c", CheckStatus::fail, -1.0, "z", "broken"});
    CHECK(verification_json(checks)["passed"] == false);
    CHECK(verification_json(checks)["inputs_digest"] != ok["inputs_digest"]);

    const auto dir = scratch("verify");
    std::ostringstream log;
    CHECK(cmd_verify(checks, dir, true, log) == kVerificationFailed);
    CHECK(log.str().find("broken") != std::string::npos);
    CHECK(fs::exists(dir / "verify.json"));
    fs::remove_all(dir);
}

TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("config verification gates dynamic checks") {
    auto cfg = parse_config_text(
        "feature.1 = twopoint 0.99\n"
        "feature.2 = discrete -0.25:0.5 0.35:0.5\n"
        "feature.3 = discrete -0.25:0.5 0.35:0.5\n"
        "eps = 0.1\nlambda = 0.1\nrounds = 6\n");
    const auto checks = config_suite(cfg);
    bool saw = false;
    for (const auto& c : checks) {
        CHECK(c.ok());
        if (c.name == "nonconvergence") {
            saw = true;
            CHECK(c.status == CheckStatus::skipped);
        }
    }
    CHECK(saw);
}

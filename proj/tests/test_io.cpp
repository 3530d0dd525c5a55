#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "slar/io.hpp"

using namespace slar;

TEST_CASE("17 significant digits") {
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(io::format_double(0.0) == "0");
    CHECK(io::format_double(-0.0) == "0");
    CHECK(io::format_double(1.0) == "1");
    CHECK(io::format_double(1e-20) == "9.9999999999999995e-21");
    CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("dataset CSV round trip") {
    const auto spec = weak_feature_distribution(3, 0.7, 0.01, 0.01);
    const auto d = sample(spec, 25, 3);
    std::stringstream ss;
    io::write_dataset_csv(ss, d);
    std::string header;
    std::getline(std::stringstream(ss.str()), header);
    CHECK(header == "y,x1,x2,x3,x4");
    const auto back = io::read_dataset_csv(ss);
    CHECK(back.dim == 4);
    CHECK(back.labels == d.labels);
    CHECK(back.points == d.points);
}

TEST_CASE("malformed dataset CSV") {
    std::stringstream a("y,x1\n1,abc\n");
    CHECK_THROWS_AS(io::read_dataset_csv(a), io::IoError);
    std::stringstream b("y,x1\n2,0.5\n");
    CHECK_THROWS_AS(io::read_dataset_csv(b), io::IoError);
    std::stringstream c("y,x2\n");
    CHECK_THROWS_AS(io::read_dataset_csv(c), io::IoError);
    std::stringstream e("y,x1\n1,0.5,0.7\n");
    CHECK_THROWS_AS(io::read_dataset_csv(e), io::IoError);
}

TEST_CASE("weights CSV") {
    std::stringstream ss;
    io::write_run_weights_csv(ss, Weights{{1.5, -0.25}, 0.1}, std::vector<double>{0.4, 0.01}, 0.02);
    CHECK(ss.str() == "index,mu_i,is_robust,w_i\n1,0.40000000000000002,1,1.5\n2,0.01,0,-0.25\n");
}

TEST_CASE("trajectory CSV header") {
    Trajectory t;
    TrajectoryRecord r;
    r.t = 1;
    r.delta_w_norm = 0.5;
    t.records.push_back(r);
    std::stringstream ss;
    io::write_trajectory_csv(ss, t);
    CHECK(ss.str().rfind(
              "t,delta_w_norm,w_norm,nonrobust_mass,std_acc_train,std_acc_test,robust_acc_test,objective\n1,0.5,", 0) ==
          0);
}

TEST_CASE("SVG chart") {
    io::Series a{"at", {1, 2, 3}, {0.5, 0.1, 0.4}};
    io::Series b{"oat", {1, 2, 3}, {0.2, 0.2, 0.2}, true};
    const auto svg = io::svg_chart({a, b}, {"title <x>", "round", "norm"});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("title &lt;x&gt;") != std::string::npos);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);
    const auto empty = io::svg_chart({}, {"empty", "x", "y"});
    CHECK(empty.find("</svg>") != std::string::npos);
}

TEST_CASE("write_file creates directories and reports failures") {
    const auto dir = std::filesystem::temp_directory_path() / "slar_io_test" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    io::write_file(dir / "a.txt", "hello");
    CHECK(std::filesystem::file_size(dir / "a.txt") == 5);
    io::write_file(dir / "blocker", "x");
    CHECK_THROWS_AS(io::write_file(dir / "blocker" / "b.txt", "y"), io::IoError);
    std::filesystem::remove_all(dir.parent_path());
}

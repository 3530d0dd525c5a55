#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "slar/dist.hpp"
#include "slar/game.hpp"
#include "slar/model.hpp"

namespace slar::io {

/// Raised for unreadable/unwritable files and malformed CSV input.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip text is not used on purpose: every float is written
/// with 17 significant digits so files are stable across platforms.
std::string format_double(double x);

/// Header `y,x1,...,xD`; labels as -1/1.
void write_dataset_csv(std::ostream& os, const Dataset& data);
Dataset read_dataset_csv(std::istream& is);

/// Header `index,w`; 1-based indices.
void write_weights_csv(std::ostream& os, const Weights& w);
/// Header `index,v`.
void write_plan_csv(std::ostream& os, const PerturbationPlan& plan);
/// Header `index,mu_i,is_robust,w_i`.
void write_run_weights_csv(std::ostream& os, const Weights& w, std::span<const double> means, double eps);
/// Header `t,delta_w_norm,w_norm,nonrobust_mass,std_acc_train,std_acc_test,robust_acc_test,objective`.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_file(const std::filesystem::path& path, const std::string& text);

// SVG charts -----------------------------------------------------------------

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct ChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool stems = false;  // vertical bars from y = 0 instead of connected lines
    int width = 720;
    int height = 420;
};

std::string svg_chart(const std::vector<Series>& series, const ChartOptions& opts);

}  // namespace slar::io

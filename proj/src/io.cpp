#include "slar/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace slar::io {

std::string format_double(double x) {
    if (x == 0.0) return "0";  // also folds -0
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
    os << 'y';
    for (std::size_t j = 1; j <= data.dim; ++j) os << ",x" << j;
    os << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        os << data.labels[i];
        for (double v : data.row(i)) os << ',' << format_double(v);
        os << '\n';
    }
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto r = std::from_chars(s.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end)
        throw IoError("dataset CSV line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

}  // namespace

Dataset read_dataset_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("dataset CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    if (header.empty() || header[0] != "y") throw IoError("dataset CSV: header must start with 'y'");
    for (std::size_t j = 1; j < header.size(); ++j)
        if (header[j] != "x" + std::to_string(j)) throw IoError("dataset CSV: unexpected column '" + header[j] + "'");
    Dataset d;
    d.dim = header.size() - 1;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw IoError("dataset CSV line " + std::to_string(lineno) + ": expected " +
                          std::to_string(header.size()) + " columns");
        const double y = parse_double(cells[0], lineno);
        if (y != 1.0 && y != -1.0) throw IoError("dataset CSV line " + std::to_string(lineno) + ": label must be -1 or 1");
        d.labels.push_back(static_cast<int>(y));
        for (std::size_t j = 1; j < cells.size(); ++j) d.points.push_back(parse_double(cells[j], lineno));
    }
    return d;
}

void write_weights_csv(std::ostream& os, const Weights& w) {
    os << "index,w\n";
    for (std::size_t i = 0; i < w.dim(); ++i) os << i + 1 << ',' << format_double(w.w[i]) << '\n';
}

void write_plan_csv(std::ostream& os, const PerturbationPlan& plan) {
    os << "index,v\n";
    for (std::size_t i = 0; i < plan.dim(); ++i) os << i + 1 << ',' << format_double(plan.v()[i]) << '\n';
}

void write_run_weights_csv(std::ostream& os, const Weights& w, std::span<const double> means, double eps) {
    if (means.size() != w.dim()) throw std::invalid_argument("write_run_weights_csv: dimension mismatch");
    os << "index,mu_i,is_robust,w_i\n";
    for (std::size_t i = 0; i < w.dim(); ++i)
        os << i + 1 << ',' << format_double(means[i]) << ',' << (std::abs(means[i]) > eps ? 1 : 0) << ','
           << format_double(w.w[i]) << '\n';
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,delta_w_norm,w_norm,nonrobust_mass,std_acc_train,std_acc_test,robust_acc_test,objective\n";
    for (const auto& r : traj.records)
        os << r.t << ',' << format_double(r.delta_w_norm) << ',' << format_double(r.w_norm) << ','
           << format_double(r.nonrobust_mass) << ',' << format_double(r.std_acc_train) << ','
           << format_double(r.std_acc_test) << ',' << format_double(r.robust_acc_test) << ','
           << format_double(r.objective) << '\n';
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

std::string num(double x) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, 2);
    return std::string(buf, r.ptr);
}

std::string tick_label(double x) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 4);
    return std::string(buf, r.ptr);
}

// Roughly five round tick values covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

}  // namespace

std::string svg_chart(const std::vector<Series>& series, const ChartOptions& opts) {
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (opts.stems) ymin = std::min(ymin, 0.0), ymax = std::max(ymax, 0.0);
    if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
    if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    const double left = 70, right = 150, top = 40, bottom = 50;
    const double W = opts.width, H = opts.height;
    const double pw = W - left - right, ph = H - top - bottom;
    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\"" << opts.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(opts.title)
      << "</text>\n";
    for (double t : ticks(xmin, xmax)) {
        o << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(sx(t)) << "\" y2=\""
          << num(top + ph + 5) << "\" stroke=\"black\"/>";
        o << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">"
          << tick_label(t) << "</text>\n";
    }
    for (double t : ticks(ymin, ymax)) {
        o << "<line x1=\"" << num(left) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(left + pw) << "\" y2=\""
          << num(sy(t)) << "\" stroke=\"#e0e0e0\"/>";
        o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(sy(t) + 4) << "\" text-anchor=\"end\">"
          << tick_label(t) << "</text>\n";
    }
    o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(H - 10) << "\" text-anchor=\"middle\">"
      << esc(opts.x_label) << "</text>\n";
    o << "<text transform=\"translate(16," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << esc(opts.y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        const std::string dash = s.dashed ? " stroke-dasharray=\"6,4\"" : "";
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (opts.stems) {
            for (std::size_t i = 0; i < n; ++i)
                o << "<line x1=\"" << num(sx(s.x[i])) << "\" y1=\"" << num(sy(0.0)) << "\" x2=\"" << num(sx(s.x[i]))
                  << "\" y2=\"" << num(sy(s.y[i])) << "\" stroke=\"" << color << "\" stroke-opacity=\"0.6\"/>\n";
        } else {
            o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << dash << " points=\"";
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.y[i])) continue;
                o << num(sx(s.x[i])) << ',' << num(sy(s.y[i])) << ' ';
            }
            o << "\"/>\n";
        }
        const double ly = top + 14 + 18.0 * k;
        o << "<line x1=\"" << num(left + pw + 10) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + pw + 34)
          << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash << "/>";
        o << "<text x=\"" << num(left + pw + 40) << "\" y=\"" << num(ly + 4) << "\">" << esc(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace slar::io

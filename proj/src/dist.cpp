#include "slar/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace slar {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

FeatureSpec FeatureSpec::two_point(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("TwoPoint: p must lie in [0,1]");
    return FeatureSpec(TwoPoint{p});
}

FeatureSpec FeatureSpec::gaussian(double mean, double stdev) {
    if (!std::isfinite(mean)) throw std::invalid_argument("Gaussian: mean must be finite");
    if (!(stdev > 0.0) || !std::isfinite(stdev))
        throw std::invalid_argument("Gaussian: stdev must be positive");
    return FeatureSpec(Gaussian{mean, stdev});
}

FeatureSpec FeatureSpec::discrete(std::vector<double> values, std::vector<double> probs) {
    if (values.empty() || values.size() != probs.size())
        throw std::invalid_argument("DiscreteSymmetric: values and probs must be nonempty and equal length");
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i] >= 0.0) || !std::isfinite(values[i]))
            throw std::invalid_argument("DiscreteSymmetric: probabilities must be >= 0 and values finite");
        total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteSymmetric: probabilities must sum to 1");
    return FeatureSpec(DiscreteSymmetric{std::move(values), std::move(probs)});
}

double FeatureSpec::mean() const {
    return std::visit(overloaded{
                          [](const TwoPoint& t) { return 2.0 * t.p - 1.0; },
                          [](const Gaussian& g) { return g.mean; },
                          [](const DiscreteSymmetric& d) {
                              return std::inner_product(d.values.begin(), d.values.end(),
                                                        d.probs.begin(), 0.0);
                          },
                      },
                      kind_);
}

double FeatureSpec::variance() const {
    return std::visit(overloaded{
                          [](const TwoPoint& t) {
                              const double m = 2.0 * t.p - 1.0;
                              return 1.0 - m * m;
                          },
                          [](const Gaussian& g) { return g.stdev * g.stdev; },
                          [](const DiscreteSymmetric& d) {
                              double m = 0.0;
                              for (std::size_t i = 0; i < d.values.size(); ++i) m += d.probs[i] * d.values[i];
                              double v = 0.0;
                              for (std::size_t i = 0; i < d.values.size(); ++i)
                                  v += d.probs[i] * (d.values[i] - m) * (d.values[i] - m);
                              return v;
                          },
                      },
                      kind_);
}

double FeatureSpec::stdev() const { return std::sqrt(variance()); }

std::vector<std::pair<double, double>> FeatureSpec::support() const {
    return std::visit(overloaded{
                          [](const TwoPoint& t) {
                              return std::vector<std::pair<double, double>>{{1.0, t.p}, {-1.0, 1.0 - t.p}};
                          },
                          [](const Gaussian&) -> std::vector<std::pair<double, double>> {
                              throw std::invalid_argument("Gaussian feature has no finite support");
                          },
                          [](const DiscreteSymmetric& d) {
                              std::vector<std::pair<double, double>> out;
                              out.reserve(d.values.size());
                              for (std::size_t i = 0; i < d.values.size(); ++i)
                                  out.emplace_back(d.values[i], d.probs[i]);
                              return out;
                          },
                      },
                      kind_);
}

double FeatureSpec::draw(int y, std::mt19937_64& rng) const {
    const double sy = static_cast<double>(y);
    return std::visit(overloaded{
                          [&](const TwoPoint& t) {
                              std::bernoulli_distribution agree(t.p);
                              return agree(rng) ? sy : -sy;
                          },
                          [&](const Gaussian& g) {
                              std::normal_distribution<double> z(0.0, 1.0);
                              return sy * g.mean + g.stdev * z(rng);
                          },
                          [&](const DiscreteSymmetric& d) {
                              std::uniform_real_distribution<double> u(0.0, 1.0);
                              const double r = u(rng);
                              double acc = 0.0;
                              for (std::size_t i = 0; i < d.values.size(); ++i) {
                                  acc += d.probs[i];
                                  if (r < acc) return sy * d.values[i];
                              }
                              // r landed in the rounding slack above the last cumulative sum
                              for (std::size_t i = d.values.size(); i-- > 0;)
                                  if (d.probs[i] > 0.0) return sy * d.values[i];
                              return sy * d.values.back();
                          },
                      },
                      kind_);
}

std::vector<double> DistributionSpec::means() const {
    std::vector<double> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(f.mean());
    return out;
}

std::vector<double> DistributionSpec::variances() const {
    std::vector<double> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(f.variance());
    return out;
}

bool DistributionSpec::finite_support() const {
    return std::all_of(features.begin(), features.end(), [](const FeatureSpec& f) { return f.finite_support(); });
}

namespace {

void check_layout_args(int d, double p, double sigma) {
    if (d <= 0) throw std::invalid_argument("d must be positive");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0,1)");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
}

}  // namespace

DistributionSpec weak_feature_distribution(int d, double p, double mu, double sigma) {
    check_layout_args(d, p, sigma);
    DistributionSpec spec;
    spec.features.reserve(static_cast<std::size_t>(d) + 1);
    spec.features.push_back(FeatureSpec::two_point(p));
    for (int j = 0; j < d; ++j) spec.features.push_back(FeatureSpec::gaussian(mu, sigma));
    return spec;
}

DistributionSpec weak_feature_distribution_discrete(int d, double p, double mu, double sigma) {
    check_layout_args(d, p, sigma);
    DistributionSpec spec;
    spec.features.reserve(static_cast<std::size_t>(d) + 1);
    spec.features.push_back(FeatureSpec::two_point(p));
    for (int j = 0; j < d; ++j)
        spec.features.push_back(FeatureSpec::discrete({mu - sigma, mu + sigma}, {0.5, 0.5}));
    return spec;
}

void require_weak_feature_layout(const DistributionSpec& spec, double eps) {
    if (spec.dim() < 2) throw std::invalid_argument("weak-feature layout needs at least two features");
    if (!std::holds_alternative<TwoPoint>(spec.features[0].kind()))
        throw std::invalid_argument("weak-feature layout needs feature 1 to be TwoPoint");
    for (std::size_t j = 1; j < spec.dim(); ++j) {
        const double m = spec.features[j].mean();
        if (!(m > 0.0 && m < eps))
            throw std::invalid_argument("weak-feature layout needs 0 < mu_j < eps for feature " + std::to_string(j + 1));
    }
}

bool has_weak_feature_layout(const DistributionSpec& spec, double eps) {
    try {
        require_weak_feature_layout(spec, eps);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

std::mt19937_64 derived_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t tag) {
    std::seed_seq seq{lo32(seed), hi32(seed), lo32(index), hi32(index), lo32(tag), hi32(tag)};
    return std::mt19937_64(seq);
}

Dataset sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed, unsigned threads) {
    if (n == 0) throw std::invalid_argument("sample: n must be at least 1");
    if (spec.dim() == 0) throw std::invalid_argument("sample: empty spec");
    Dataset data;
    data.dim = spec.dim();
    data.seed = seed;
    data.points.resize(n * data.dim);
    data.labels.resize(n);

    auto fill = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto rng = derived_stream(seed, i);
            std::bernoulli_distribution coin(0.5);
            const int y = coin(rng) ? 1 : -1;
            data.labels[i] = y;
            double* row = data.points.data() + i * data.dim;
            for (std::size_t j = 0; j < data.dim; ++j) row[j] = spec.features[j].draw(y, rng);
        }
    };

    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads == 1) {
        fill(0, n);
        return data;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t b = t * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b < e) pool.emplace_back(fill, b, e);
    }
    pool.clear();
    return data;
}

bool is_non_robust(const DistributionSpec& spec, std::size_t i, double eps) {
    if (i >= spec.dim()) throw std::out_of_range("is_non_robust: feature index out of range");
    if (eps < 0.0) throw std::invalid_argument("is_non_robust: eps must be >= 0");
    return std::abs(spec.features[i].mean()) <= eps;
}

std::vector<bool> non_robust_mask(std::span<const double> means, double eps) {
    std::vector<bool> out(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) out[i] = std::abs(means[i]) <= eps;
    return out;
}

Support enumerate_support(const DistributionSpec& spec) {
    if (!spec.finite_support()) throw std::invalid_argument("enumerate_support: spec has a Gaussian feature");
    const std::size_t dim = spec.dim();
    std::vector<std::vector<std::pair<double, double>>> laws;
    laws.reserve(dim);
    std::size_t atoms = 2;
    for (const auto& f : spec.features) {
        laws.push_back(f.support());
        if (atoms > kMaxSupportAtoms / laws.back().size())
            throw std::length_error("enumerate_support: support exceeds the atom cap");
        atoms *= laws.back().size();
    }

    Support out;
    out.dim = dim;
    out.points.reserve(atoms * dim);
    out.labels.reserve(atoms);
    out.probs.reserve(atoms);
    std::vector<std::size_t> idx(dim, 0);
    for (int y : {1, -1}) {
        std::fill(idx.begin(), idx.end(), 0);
        bool more = true;
        while (more) {
            double prob = 0.5;
            for (std::size_t j = 0; j < dim; ++j) {
                const auto& [v, q] = laws[j][idx[j]];
                out.points.push_back(y * v);
                prob *= q;
            }
            out.labels.push_back(y);
            out.probs.push_back(prob);
            // odometer, last feature fastest
            more = false;
            for (std::size_t j = dim; j-- > 0;) {
                if (++idx[j] < laws[j].size()) {
                    more = true;
                    break;
                }
                idx[j] = 0;
            }
        }
    }
    return out;
}

MeanEstimate estimate_means(const Dataset& data) {
    const std::size_t n = data.size();
    if (n < 2) throw std::invalid_argument("estimate_means: need at least two samples");
    MeanEstimate est;
    est.means.assign(data.dim, 0.0);
    est.stderrs.assign(data.dim, 0.0);
    std::vector<double> sq(data.dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = data.row(i);
        const double y = data.labels[i];
        for (std::size_t j = 0; j < data.dim; ++j) {
            const double z = y * row[j];
            est.means[j] += z;
            sq[j] += z * z;
        }
    }
    const double nn = static_cast<double>(n);
    for (std::size_t j = 0; j < data.dim; ++j) {
        est.means[j] /= nn;
        const double var = std::max(0.0, (sq[j] - nn * est.means[j] * est.means[j]) / (nn - 1.0));
        est.stderrs[j] = std::sqrt(var / nn);
    }
    return est;
}

}  // namespace slar

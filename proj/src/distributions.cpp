#include "splicefit/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

namespace splicefit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this |xi| the (1 + xi z)^(-1/xi) branch loses all precision; the
// exponential limit is exact to machine accuracy there.
constexpr double kXiZeroTol = 1e-10;

}  // namespace

bool valid(const GpdParams& p) {
    return std::isfinite(p.xi) && p.sigma > 0.0 && std::isfinite(p.sigma) &&
           p.threshold > 0.0 && std::isfinite(p.threshold);
}

bool valid(const GammaComponent& c) {
    return c.mean > 0.0 && std::isfinite(c.mean) && c.shape > 0.0 && std::isfinite(c.shape);
}

BulkMixture::BulkMixture(std::vector<double> weights, std::vector<GammaComponent> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("BulkMixture: needs at least one component");
    if (weights_.size() != components_.size())
        throw std::invalid_argument("BulkMixture: weight/component count mismatch");
    double sum = 0.0;
    for (double w : weights_) {
        if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("BulkMixture: weights must be positive");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("BulkMixture: weights must sum to 1");
    double prev = 0.0;
    for (const auto& c : components_) {
        if (!valid(c)) throw std::invalid_argument("BulkMixture: invalid gamma component");
        if (!(c.mean > prev)) throw std::invalid_argument("BulkMixture: component means must be strictly increasing");
        prev = c.mean;
    }
}

SpliceModel::SpliceModel(BulkMixture bulk_in, GpdParams gpd_in)
    : bulk(std::move(bulk_in)), gpd(gpd_in) {
    if (!valid(gpd)) throw std::invalid_argument("SpliceModel: invalid GPD parameters");
}

OrderedSample::OrderedSample(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 3) throw std::invalid_argument("OrderedSample: need at least 3 observations");
    for (double v : values_) {
        if (!std::isfinite(v) || v <= 0.0)
            throw std::invalid_argument("OrderedSample: observations must be finite and positive");
    }
    sorted_ = values_;
    std::sort(sorted_.begin(), sorted_.end());
}

double OrderedSample::order_stat(std::size_t k) const {
    if (k < 1 || k > sorted_.size()) throw std::out_of_range("order_stat: index outside 1..n");
    return sorted_[k - 1];
}

// ---- GPD ----

double gpd_log_density(double x, const GpdParams& p) {
    if (!valid(p)) throw std::invalid_argument("gpd_log_density: invalid parameters");
    const double z = (x - p.threshold) / p.sigma;
    if (z < 0.0) return -kInf;
    if (std::abs(p.xi) < kXiZeroTol) return -std::log(p.sigma) - z;
    const double t = 1.0 + p.xi * z;
    if (t <= 0.0) {
        // xi < 0 beyond the upper endpoint, or exactly on it
        if (t == 0.0 && p.xi < 0.0) {
            // density -> 0 for xi in (-1,0), diverges for xi < -1
            return (p.xi > -1.0) ? -kInf : kInf;
        }
        return -kInf;
    }
    return -std::log(p.sigma) - (1.0 + p.xi) / p.xi * std::log1p(p.xi * z);
}

double gpd_cdf(double x, const GpdParams& p) {
    if (!valid(p)) throw std::invalid_argument("gpd_cdf: invalid parameters");
    const double z = (x - p.threshold) / p.sigma;
    if (z <= 0.0) return 0.0;
    if (std::abs(p.xi) < kXiZeroTol) return -std::expm1(-z);
    const double t = 1.0 + p.xi * z;
    if (t <= 0.0) return 1.0;  // above the upper endpoint (xi < 0)
    return -std::expm1(-std::log1p(p.xi * z) / p.xi);
}

double gpd_sample_one(const GpdParams& p, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    while (u <= 0.0) u = unif(rng);
    if (std::abs(p.xi) < kXiZeroTol) return p.threshold - p.sigma * std::log(u);
    return p.threshold + p.sigma / p.xi * std::expm1(-p.xi * std::log(u));
}

std::vector<double> gpd_sample(std::size_t n, const GpdParams& p, Rng& rng) {
    if (!valid(p)) throw std::invalid_argument("gpd_sample: invalid parameters");
    std::vector<double> out(n);
    for (auto& x : out) x = gpd_sample_one(p, rng);
    return out;
}

// ---- gamma mixture bulk ----

double gamma_ms_log_density(double x, const GammaComponent& c) {
    if (!valid(c)) throw std::invalid_argument("gamma_ms_log_density: invalid component");
    if (!(x > 0.0)) throw std::domain_error("gamma_ms_log_density: x must be positive");
    return c.shape * std::log(c.shape / c.mean) - std::lgamma(c.shape) +
           (c.shape - 1.0) * std::log(x) - x * c.shape / c.mean;
}

double bulk_log_density(double x, const BulkMixture& m) {
    if (!(x > 0.0)) throw std::domain_error("bulk_log_density: x must be positive");
    const std::size_t r = m.order();
    double best = -kInf;
    std::vector<double> terms(r);
    for (std::size_t j = 0; j < r; ++j) {
        terms[j] = std::log(m.weights()[j]) + gamma_ms_log_density(x, m.components()[j]);
        best = std::max(best, terms[j]);
    }
    if (!std::isfinite(best)) return -kInf;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - best);
    return best + std::log(s);
}

double bulk_cdf(double x, const BulkMixture& m) {
    if (!(x > 0.0)) throw std::domain_error("bulk_cdf: x must be positive");
    double acc = 0.0;
    for (std::size_t j = 0; j < m.order(); ++j) {
        const auto& c = m.components()[j];
        acc += m.weights()[j] * boost::math::gamma_p(c.shape, x * c.shape / c.mean);
    }
    return std::min(acc, 1.0);
}

double bulk_sf(double x, const BulkMixture& m) {
    if (!(x > 0.0)) throw std::domain_error("bulk_sf: x must be positive");
    double acc = 0.0;
    for (std::size_t j = 0; j < m.order(); ++j) {
        const auto& c = m.components()[j];
        acc += m.weights()[j] * boost::math::gamma_q(c.shape, x * c.shape / c.mean);
    }
    return std::min(acc, 1.0);
}

double bulk_sample_one(const BulkMixture& m, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double cum = 0.0;
    std::size_t pick = m.order() - 1;
    for (std::size_t j = 0; j < m.order(); ++j) {
        cum += m.weights()[j];
        if (u <= cum) {
            pick = j;
            break;
        }
    }
    const auto& c = m.components()[pick];
    std::gamma_distribution<double> gamma(c.shape, c.mean / c.shape);
    return gamma(rng);
}

// ---- spliced model ----

double splice_log_density(double x, const SpliceModel& s) {
    if (!(x > 0.0)) throw std::domain_error("splice_log_density: x must be positive");
    if (x < s.gpd.threshold) return bulk_log_density(x, s.bulk);
    const double sf = bulk_sf(s.gpd.threshold, s.bulk);
    if (sf <= 0.0) return -kInf;
    return std::log(sf) + gpd_log_density(x, s.gpd);
}

std::vector<double> splice_sample(std::size_t n, const SpliceModel& s, Rng& rng) {
    std::vector<double> out(n);
    for (auto& x : out) {
        const double y = bulk_sample_one(s.bulk, rng);
        x = (y < s.gpd.threshold) ? y : gpd_sample_one(s.gpd, rng);
    }
    return out;
}

}  // namespace splicefit

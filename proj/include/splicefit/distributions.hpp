#pragma once

#include <cstddef>
#include <vector>

#include "splicefit/common.hpp"

namespace splicefit {

/// Generalised Pareto parameters. Shape xi is unrestricted here; scale and
/// threshold must be positive. Support is x >= threshold for xi >= 0 and
/// threshold <= x <= threshold - sigma/xi for xi < 0.
struct GpdParams {
    double xi = 0.0;
    double sigma = 1.0;
    double threshold = 1.0;
};

bool valid(const GpdParams& p);

/// Gamma component in mean-shape form: density
///   f(x) = (shape/mean)^shape / Gamma(shape) * x^(shape-1) * exp(-x*shape/mean),
/// i.e. an ordinary gamma with shape `shape` and rate `shape/mean`.
struct GammaComponent {
    double mean = 1.0;
    double shape = 1.0;
};

bool valid(const GammaComponent& c);

/// Finite gamma mixture with simplex weights and strictly increasing
/// component means. The ordering is an identifiability constraint and is
/// rejected at construction rather than repaired.
class BulkMixture {
  public:
    BulkMixture(std::vector<double> weights, std::vector<GammaComponent> components);

    std::size_t order() const { return components_.size(); }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<GammaComponent>& components() const { return components_; }

  private:
    std::vector<double> weights_;
    std::vector<GammaComponent> components_;
};

/// Spliced density: bulk mixture below gpd.threshold, tail mass
/// 1 - H(threshold) spread over a GPD above it.
struct SpliceModel {
    SpliceModel(BulkMixture bulk_in, GpdParams gpd_in);
    BulkMixture bulk;
    GpdParams gpd;
};

/// A positive sample held together with its order statistics.
/// Order statistics use 1-based indices: order_stat(1) is the minimum.
class OrderedSample {
  public:
    explicit OrderedSample(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& sorted() const { return sorted_; }
    double order_stat(std::size_t k) const;

  private:
    std::vector<double> values_;
    std::vector<double> sorted_;
};

// ---- GPD ----

/// log g(x | xi, sigma, theta); -inf outside the support. |xi| < 1e-10 is
/// routed to the exponential-limit branch.
double gpd_log_density(double x, const GpdParams& p);

/// G(x | xi, sigma, theta); 0 at and below the threshold.
double gpd_cdf(double x, const GpdParams& p);

/// Quantile-inversion sampler: theta + (sigma/xi) * (U^-xi - 1).
std::vector<double> gpd_sample(std::size_t n, const GpdParams& p, Rng& rng);
double gpd_sample_one(const GpdParams& p, Rng& rng);

// ---- gamma mixture bulk ----

/// Throws std::domain_error for x <= 0.
double gamma_ms_log_density(double x, const GammaComponent& c);

double bulk_log_density(double x, const BulkMixture& m);
double bulk_cdf(double x, const BulkMixture& m);
/// Survival function 1 - H(x) evaluated on the complementary path, so it
/// stays accurate when H(x) is close to 1.
double bulk_sf(double x, const BulkMixture& m);
double bulk_sample_one(const BulkMixture& m, Rng& rng);

// ---- spliced model ----

double splice_log_density(double x, const SpliceModel& s);

/// Composition sampler: a bulk draw below the threshold is kept, otherwise it
/// is replaced by a GPD draw.
std::vector<double> splice_sample(std::size_t n, const SpliceModel& s, Rng& rng);

}  // namespace splicefit

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "splicefit/distributions.hpp"

namespace splicefit {

enum class ThresholdPriorKind { UniformOnOrderStats, KullbackLeibler };

/// Discrete prior over the order statistics x^(k), k in
/// {support_lo, ..., support_hi}. support_hi == 0 means "n of the sample".
/// The paper's parameter space starts at k = 2 so at least one observation
/// stays in the bulk.
struct ThresholdPriorSpec {
    ThresholdPriorKind kind = ThresholdPriorKind::UniformOnOrderStats;
    std::size_t support_lo = 2;
    std::size_t support_hi = 0;
};

struct SupportRange {
    std::size_t lo;
    std::size_t hi;
    std::size_t count() const { return hi - lo + 1; }
};

/// Validates 2 <= lo <= hi <= n and resolves the hi == 0 default.
SupportRange resolve_support(const ThresholdPriorSpec& spec, std::size_t n);

struct InverseGammaPrior {
    double shape = 2.1;
    double scale = 5.5;

    bool operator==(const InverseGammaPrior&) const = default;
};

struct GammaPrior {
    double shape = 6.0;
    double rate = 0.5;

    bool operator==(const GammaPrior&) const = default;
};

/// Hyperpriors for the bulk mixture: inverse gamma on each component mean,
/// gamma on each component shape, symmetric Dirichlet on the weights.
struct HyperPriors {
    InverseGammaPrior mean_prior{};
    GammaPrior shape_prior{};
    double dirichlet_concentration = 1.0;

    bool operator==(const HyperPriors&) const = default;
};

/// Kullback-Leibler divergence between GPDs sharing (xi, sigma) whose
/// thresholds differ by delta = x^(k) - x^(k-1), reduced to the single
/// scalar c = xi * delta / sigma:
///
///   D = ((1+xi)/xi) * Integral_0^1 log1p(c * u^xi) du.
///
/// Evaluated by a series for small c and adaptive quadrature otherwise,
/// to 1e-10 absolute; results are memoized on (xi, c) rounded to 12
/// significant digits. Strictly increasing in c, zero iff c == 0.
/// Throws std::domain_error for xi <= 0 (the prior is undefined for
/// light tails).
double kl_adjacent_gpd(double xi, double c);

/// log(exp(k) - 1) without overflow or cancellation; -inf at k == 0.
double stable_log_expm1(double k);

/// Normalized log-masses over the threshold support, plus the log of the
/// normalizing constant Z(xi, sigma) of the unnormalized masses (needed in
/// Metropolis ratios when (xi, sigma) moves under the KL prior).
struct ThresholdLogMasses {
    std::size_t lo = 2;
    std::size_t hi = 2;
    std::vector<double> log_mass;  // index i corresponds to k = lo + i
    double log_normalizer = 0.0;

    double at(std::size_t k) const { return log_mass[k - lo]; }
};

/// Uniform branch: equal mass on every supported order statistic.
/// KL branch: mass_k proportional to exp(D_KL(k, k-1)) - 1; tied order
/// statistics get exactly zero mass. Throws std::domain_error if every mass
/// vanishes (fully tied sample) or if xi <= 0 under the KL prior.
ThresholdLogMasses threshold_log_masses(const OrderedSample& sample, const ThresholdPriorSpec& spec,
                                        double xi, double sigma);

/// Jeffreys independent prior for (xi, sigma):
/// -log(sigma) - log(1+xi) - 0.5*log(1+2xi) on xi > -0.5, sigma > 0,
/// -inf outside.
double jeffreys_log_prior(double xi, double sigma);

/// Sum of hyperprior log-densities over the bulk parameters. The raw-vector
/// overload returns -inf when positivity or the increasing-means ordering is
/// violated, which lets proposal rejection flow through the Metropolis ratio.
double bulk_hyper_log_prior(std::span<const double> weights, std::span<const double> means,
                            std::span<const double> shapes, const HyperPriors& h);
double bulk_hyper_log_prior(const BulkMixture& m, const HyperPriors& h);

}  // namespace splicefit

#pragma once

#include "splicefit/distributions.hpp"
#include "splicefit/priors.hpp"

namespace splicefit {

/// Full parameter vector of the spliced model: bulk mixture parameters,
/// GPD shape and scale, and the threshold as a 1-based order-statistic index.
struct ModelState {
    BulkMixture bulk;
    double xi = 0.1;
    double sigma = 1.0;
    std::size_t k = 2;
};

/// Sum of log bulk densities over the sub-threshold order statistics
/// x^(1), ..., x^(k-1).
double bulk_loglik_part(const OrderedSample& sample, const BulkMixture& bulk, std::size_t k);

/// Tail contribution: (n - k + 1) * log[1 - H(x^(k))] plus the sum of GPD
/// log densities of x^(k), ..., x^(n) with threshold x^(k).
double tail_loglik_part(const OrderedSample& sample, const BulkMixture& bulk, double xi,
                        double sigma, std::size_t k);

/// Spliced-model log likelihood with theta = x^(k). The bulk term uses the
/// untruncated mixture density. -inf when a tail point falls outside the GPD
/// support (possible only for xi < 0). Requires k in {2, ..., n}.
double log_likelihood(const OrderedSample& sample, const ModelState& state);

/// Unnormalized log posterior: likelihood + normalized threshold log-mass
/// (including Z(xi, sigma) under the KL prior) + Jeffreys + bulk hyperpriors.
/// -inf encodes impossible states (k outside support, xi <= 0 under the KL
/// prior, sigma <= 0, tail support violations).
double log_posterior(const OrderedSample& sample, const ModelState& state,
                     const ThresholdPriorSpec& spec, const HyperPriors& hyp);

/// Same, but with the threshold masses already evaluated at (state.xi,
/// state.sigma); the sampler caches them between moves that leave (xi, sigma)
/// unchanged.
double log_posterior_with_masses(const OrderedSample& sample, const ModelState& state,
                                 const ThresholdLogMasses& masses, const HyperPriors& hyp);

}  // namespace splicefit

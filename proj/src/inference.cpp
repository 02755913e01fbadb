#include "splicefit/inference.hpp"

#include <cmath>
#include <limits>

namespace splicefit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double bulk_loglik_part(const OrderedSample& sample, const BulkMixture& bulk, std::size_t k) {
    if (k < 2 || k > sample.size()) throw std::invalid_argument("bulk_loglik_part: k outside 2..n");
    const auto& x = sample.sorted();
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < k; ++j) acc += bulk_log_density(x[j], bulk);
    return acc;
}

double tail_loglik_part(const OrderedSample& sample, const BulkMixture& bulk, double xi,
                        double sigma, std::size_t k) {
    if (k < 2 || k > sample.size()) throw std::invalid_argument("tail_loglik_part: k outside 2..n");
    if (!(sigma > 0.0)) return -kInf;
    const auto& x = sample.sorted();
    const std::size_t n = sample.size();
    const double theta = x[k - 1];
    const double sf = bulk_sf(theta, bulk);
    if (!(sf > 0.0)) return -kInf;
    double acc = static_cast<double>(n - k + 1) * std::log(sf);
    const GpdParams gpd{xi, sigma, theta};
    for (std::size_t j = k - 1; j < n; ++j) {
        acc += gpd_log_density(x[j], gpd);
        if (acc == -kInf) return -kInf;
    }
    return acc;
}

double log_likelihood(const OrderedSample& sample, const ModelState& state) {
    return bulk_loglik_part(sample, state.bulk, state.k) +
           tail_loglik_part(sample, state.bulk, state.xi, state.sigma, state.k);
}

double log_posterior_with_masses(const OrderedSample& sample, const ModelState& state,
                                 const ThresholdLogMasses& masses, const HyperPriors& hyp) {
    if (state.k < masses.lo || state.k > masses.hi) return -kInf;
    if (!(state.sigma > 0.0)) return -kInf;
    const double prior = masses.at(state.k) + jeffreys_log_prior(state.xi, state.sigma) +
                         bulk_hyper_log_prior(state.bulk, hyp);
    if (prior == -kInf) return -kInf;
    return log_likelihood(sample, state) + prior;
}

double log_posterior(const OrderedSample& sample, const ModelState& state,
                     const ThresholdPriorSpec& spec, const HyperPriors& hyp) {
    if (!(state.sigma > 0.0)) return -kInf;
    if (spec.kind == ThresholdPriorKind::KullbackLeibler && !(state.xi > 0.0)) return -kInf;
    const auto range = resolve_support(spec, sample.size());
    if (state.k < range.lo || state.k > range.hi) return -kInf;
    const auto masses = threshold_log_masses(sample, spec, state.xi, state.sigma);
    return log_posterior_with_masses(sample, state, masses, hyp);
}

}  // namespace splicefit

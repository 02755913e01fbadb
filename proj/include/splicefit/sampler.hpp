#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "splicefit/inference.hpp"

namespace splicefit {

/// Random-walk scales for the Metropolis blocks. All walks run on log scales
/// except xi, which is updated additively.
struct StepSizes {
    double xi = 0.1;
    double log_sigma = 0.1;
    double log_mean = 0.1;
    double log_shape = 0.1;
    double weight_logit = 0.1;

    bool operator==(const StepSizes&) const = default;
};

struct ChainConfig {
    std::size_t iterations = 20000;
    std::size_t burn_in = 10000;
    std::uint64_t seed = 1;
    StepSizes steps{};
    std::size_t k_step = 5;  // max threshold index jump
    bool adapt = true;       // Robbins-Monro scale adaptation during burn-in, target 0.3

    bool operator==(const ChainConfig&) const = default;
};

struct BlockTally {
    std::uint64_t proposed = 0;
    std::uint64_t accepted = 0;
    double rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
};

struct AcceptanceRates {
    BlockTally bulk_means, bulk_shapes, bulk_weights, gpd, threshold;
};

/// One post-burn-in draw of the full parameter vector.
struct ChainRecord {
    std::vector<double> means, shapes, weights;
    double xi = 0.0;
    double sigma = 0.0;
    double threshold = 0.0;  // x^(k)
    std::size_t k = 0;
    double log_post = 0.0;
};

struct PosteriorSamples {
    std::size_t r = 1;
    ChainConfig config{};
    AcceptanceRates acceptance{};
    std::vector<ChainRecord> records;
};

/// Metropolis-within-Gibbs sampler over (gamma, xi, sigma, k). One instance
/// drives one chain; the update blocks are public so kernel-level tests can
/// exercise them in isolation.
class MwgSampler {
  public:
    MwgSampler(const OrderedSample& sample, const ThresholdPriorSpec& spec, const HyperPriors& hyp,
               const ChainConfig& config, std::size_t r);

    void step_bulk();
    void step_gpd();
    void step_threshold();

    /// Runs the full configured chain: cycles bulk -> gpd -> threshold each
    /// iteration and records states after burn-in.
    PosteriorSamples run();

    ModelState state() const;
    double log_post() const { return log_post_; }
    const AcceptanceRates& acceptance() const { return tallies_; }

  private:
    void refresh_log_post();
    double adapt_gain() const;
    void adapt_scale(double& log_factor, double log_accept_prob);
    bool mh_accept(double log_ratio);

    const OrderedSample& sample_;
    ThresholdPriorSpec spec_;
    HyperPriors hyp_;
    ChainConfig config_;
    SupportRange support_;
    std::size_t r_;
    Rng rng_;

    std::vector<double> means_, shapes_, weights_;
    double xi_ = 0.1;
    double sigma_ = 1.0;
    std::size_t k_ = 2;

    // cached posterior pieces for the current state
    double bulk_sum_ = 0.0;
    double log_sf_ = 0.0;
    double gpd_sum_ = 0.0;
    double jeff_ = 0.0;
    double bulk_prior_ = 0.0;
    ThresholdLogMasses masses_;
    double log_post_ = 0.0;

    // adapted log scale factors per block
    std::vector<double> adapt_mean_, adapt_shape_;
    double adapt_weight_ = 0.0;
    double adapt_gpd_ = 0.0;
    std::size_t iteration_ = 0;
    bool adapting_ = false;

    AcceptanceRates tallies_;
};

PosteriorSamples run_chain(const OrderedSample& sample, const ThresholdPriorSpec& spec,
                           const HyperPriors& hyp, const ChainConfig& config, std::size_t r);

/// Independent parallel chains with per-chain seeds derived from config.seed.
/// threads == 0 picks the hardware concurrency.
std::vector<PosteriorSamples> run_chains(const OrderedSample& sample, const ThresholdPriorSpec& spec,
                                         const HyperPriors& hyp, const ChainConfig& config,
                                         std::size_t r, std::size_t n_chains, std::size_t threads = 0);

/// Gelman-Rubin potential scale reduction factor over >= 2 equal-length
/// traces. Throws std::domain_error when the within-chain variance is zero.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

struct ScalarSummary {
    double mean = 0.0;
    double median = 0.0;
    double lo95 = 0.0;
    double hi95 = 0.0;

    bool operator==(const ScalarSummary&) const = default;
};

struct ThresholdMassPoint {
    std::size_t k = 0;
    double value = 0.0;
    double mass = 0.0;

    bool operator==(const ThresholdMassPoint&) const = default;
};

struct SummaryStats {
    std::vector<ScalarSummary> means, shapes, weights;
    ScalarSummary xi, sigma, threshold;
    std::vector<ThresholdMassPoint> threshold_posterior;

    bool operator==(const SummaryStats&) const = default;
};

SummaryStats summarize(const PosteriorSamples& samples);
SummaryStats summarize(std::span<const PosteriorSamples> chains);

/// Canonical parameter names: alpha_j, beta_j, omega_j, xi, sigma, theta.
std::vector<std::string> parameter_names(std::size_t r);
/// Pooled-or-single trace of one named parameter (theta yields x^(k) values).
std::vector<double> parameter_trace(const PosteriorSamples& samples, const std::string& name);

namespace detail {

struct DiscreteWalk {
    std::size_t k;
    bool accepted;
    bool proposed;
};

/// One Metropolis-Hastings move of the threshold index: uniform proposal on
/// the window {k-k_step, ..., k+k_step} \ {k} clipped to the support, with
/// the window-size Hastings correction for the clipping asymmetry.
DiscreteWalk threshold_walk_step(std::size_t k, SupportRange range, std::size_t k_step,
                                 double cur_log_target,
                                 const std::function<double(std::size_t)>& log_target, Rng& rng);

}  // namespace detail

}  // namespace splicefit

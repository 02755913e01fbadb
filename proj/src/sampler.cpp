#include "splicefit/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

namespace splicefit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTargetAccept = 0.3;

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

ScalarSummary summarize_scalar(std::vector<double> trace) {
    ScalarSummary s;
    double acc = 0.0;
    for (double x : trace) acc += x;
    s.mean = acc / static_cast<double>(trace.size());
    std::sort(trace.begin(), trace.end());
    s.median = quantile_type7(trace, 0.5);
    s.lo95 = quantile_type7(trace, 0.025);
    s.hi95 = quantile_type7(trace, 0.975);
    return s;
}

}  // namespace

namespace detail {

DiscreteWalk threshold_walk_step(std::size_t k, SupportRange range, std::size_t k_step,
                                 double cur_log_target,
                                 const std::function<double(std::size_t)>& log_target, Rng& rng) {
    if (k < range.lo || k > range.hi) throw std::invalid_argument("threshold_walk_step: k outside support");
    if (k_step == 0) throw std::invalid_argument("threshold_walk_step: k_step must be positive");
    const std::size_t wlo = (k >= range.lo + k_step) ? k - k_step : range.lo;
    const std::size_t whi = std::min(range.hi, k + k_step);
    const std::size_t wsize = whi - wlo;  // window minus the current point
    if (wsize == 0) return {k, false, false};

    std::uniform_int_distribution<std::size_t> pick(0, wsize - 1);
    std::size_t kp = wlo + pick(rng);
    if (kp >= k) ++kp;

    const std::size_t rlo = (kp >= range.lo + k_step) ? kp - k_step : range.lo;
    const std::size_t rhi = std::min(range.hi, kp + k_step);
    const std::size_t rsize = rhi - rlo;

    // Hastings correction for the clipped window asymmetry
    const double log_ratio = log_target(kp) - cur_log_target +
                             std::log(static_cast<double>(wsize)) -
                             std::log(static_cast<double>(rsize));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (std::log(unif(rng)) < log_ratio) return {kp, true, true};
    return {k, false, true};
}

}  // namespace detail

MwgSampler::MwgSampler(const OrderedSample& sample, const ThresholdPriorSpec& spec,
                       const HyperPriors& hyp, const ChainConfig& config, std::size_t r)
    : sample_(sample),
      spec_(spec),
      hyp_(hyp),
      config_(config),
      support_(resolve_support(spec, sample.size())),
      r_(r),
      rng_(config.seed) {
    if (r_ == 0) throw std::invalid_argument("MwgSampler: need at least one bulk component");
    if (config_.burn_in >= config_.iterations)
        throw std::invalid_argument("MwgSampler: burn_in must be smaller than iterations");
    const auto& s = config_.steps;
    if (!(s.xi > 0.0) || !(s.log_sigma > 0.0) || !(s.log_mean > 0.0) || !(s.log_shape > 0.0) ||
        !(s.weight_logit > 0.0))
        throw std::invalid_argument("MwgSampler: step sizes must be positive");

    const auto& x = sample_.sorted();
    const std::size_t n = sample_.size();

    // start at the 90% quantile index, clipped into the support
    auto k0 = static_cast<std::size_t>(std::llround(0.9 * static_cast<double>(n)));
    k_ = std::clamp(k0, support_.lo, support_.hi);

    xi_ = 0.1;
    std::vector<double> excesses;
    excesses.reserve(n - k_ + 1);
    for (std::size_t j = k_ - 1; j < n; ++j) excesses.push_back(x[j] - x[k_ - 1]);
    const double sd = sample_sd(excesses);
    sigma_ = (sd > 1e-12) ? sd : 1.0;

    // bulk means at r equally spaced quantiles of the sub-threshold data
    std::span<const double> below(x.data(), k_ - 1);
    means_.resize(r_);
    for (std::size_t j = 0; j < r_; ++j) {
        means_[j] = quantile_type7(below, static_cast<double>(j + 1) / static_cast<double>(r_ + 1));
        if (j > 0 && means_[j] <= means_[j - 1]) means_[j] = means_[j - 1] * 1.001 + 1e-9;
    }
    shapes_.assign(r_, 2.0);
    weights_.assign(r_, 1.0 / static_cast<double>(r_));

    adapt_mean_.assign(r_, 0.0);
    adapt_shape_.assign(r_, 0.0);

    BulkMixture mix = state().bulk;
    bulk_prior_ = bulk_hyper_log_prior(mix, hyp_);
    bulk_sum_ = bulk_loglik_part(sample_, mix, k_);
    log_sf_ = std::log(bulk_sf(x[k_ - 1], mix));
    gpd_sum_ = 0.0;
    const GpdParams gpd{xi_, sigma_, x[k_ - 1]};
    for (std::size_t j = k_ - 1; j < n; ++j) gpd_sum_ += gpd_log_density(x[j], gpd);
    jeff_ = jeffreys_log_prior(xi_, sigma_);
    masses_ = threshold_log_masses(sample_, spec_, xi_, sigma_);
    refresh_log_post();
    if (!std::isfinite(log_post_))
        throw std::runtime_error("MwgSampler: no valid starting state for this sample and prior");
}

ModelState MwgSampler::state() const {
    std::vector<GammaComponent> comps(r_);
    for (std::size_t j = 0; j < r_; ++j) comps[j] = {means_[j], shapes_[j]};
    return ModelState{BulkMixture(weights_, std::move(comps)), xi_, sigma_, k_};
}

void MwgSampler::refresh_log_post() {
    const auto n = static_cast<double>(sample_.size());
    log_post_ = bulk_sum_ + (n - static_cast<double>(k_) + 1.0) * log_sf_ + gpd_sum_ +
                masses_.at(k_) + jeff_ + bulk_prior_;
}

double MwgSampler::adapt_gain() const {
    return std::pow(static_cast<double>(iteration_ + 1), -0.6);
}

void MwgSampler::adapt_scale(double& log_factor, double log_accept_prob) {
    if (!adapting_) return;
    const double alpha = std::exp(std::min(0.0, log_accept_prob));
    log_factor = std::clamp(log_factor + adapt_gain() * (alpha - kTargetAccept), -8.0, 8.0);
}

bool MwgSampler::mh_accept(double log_ratio) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return std::log(unif(rng_)) < log_ratio;
}

void MwgSampler::step_bulk() {
    const auto& x = sample_.sorted();
    const double n = static_cast<double>(sample_.size());
    const double tail_count = n - static_cast<double>(k_) + 1.0;
    std::normal_distribution<double> normal(0.0, 1.0);

    struct Candidate {
        double bulk_sum, log_sf, prior;
        bool possible;
    };
    auto evaluate = [&](const std::vector<double>& means, const std::vector<double>& shapes,
                        const std::vector<double>& weights) -> Candidate {
        const double prior = bulk_hyper_log_prior(weights, means, shapes, hyp_);
        if (prior == -kInf) return {0.0, 0.0, -kInf, false};
        std::vector<GammaComponent> comps(r_);
        for (std::size_t j = 0; j < r_; ++j) comps[j] = {means[j], shapes[j]};
        const BulkMixture mix(weights, std::move(comps));
        const double sf = bulk_sf(x[k_ - 1], mix);
        if (!(sf > 0.0)) return {0.0, 0.0, -kInf, false};
        return {bulk_loglik_part(sample_, mix, k_), std::log(sf), prior, true};
    };
    auto current_piece = [&] { return bulk_sum_ + tail_count * log_sf_ + bulk_prior_; };

    // component means, one at a time on the log scale
    for (std::size_t j = 0; j < r_; ++j) {
        tallies_.bulk_means.proposed++;
        const double scale = config_.steps.log_mean * std::exp(adapt_mean_[j]);
        std::vector<double> cand = means_;
        cand[j] = means_[j] * std::exp(scale * normal(rng_));
        const auto eval = evaluate(cand, shapes_, weights_);
        double log_ratio = -kInf;
        if (eval.possible) {
            log_ratio = eval.bulk_sum + tail_count * eval.log_sf + eval.prior - current_piece() +
                        std::log(cand[j] / means_[j]);
            if (mh_accept(log_ratio)) {
                means_ = std::move(cand);
                bulk_sum_ = eval.bulk_sum;
                log_sf_ = eval.log_sf;
                bulk_prior_ = eval.prior;
                tallies_.bulk_means.accepted++;
            }
        }
        adapt_scale(adapt_mean_[j], log_ratio);
    }

    for (std::size_t j = 0; j < r_; ++j) {
        tallies_.bulk_shapes.proposed++;
        const double scale = config_.steps.log_shape * std::exp(adapt_shape_[j]);
        std::vector<double> cand = shapes_;
        cand[j] = shapes_[j] * std::exp(scale * normal(rng_));
        const auto eval = evaluate(means_, cand, weights_);
        double log_ratio = -kInf;
        if (eval.possible) {
            log_ratio = eval.bulk_sum + tail_count * eval.log_sf + eval.prior - current_piece() +
                        std::log(cand[j] / shapes_[j]);
            if (mh_accept(log_ratio)) {
                shapes_ = std::move(cand);
                bulk_sum_ = eval.bulk_sum;
                log_sf_ = eval.log_sf;
                bulk_prior_ = eval.prior;
                tallies_.bulk_shapes.accepted++;
            }
        }
        adapt_scale(adapt_shape_[j], log_ratio);
    }

    // weights via a random walk on the multinomial logit scale
    if (r_ >= 2) {
        tallies_.bulk_weights.proposed++;
        const double scale = config_.steps.weight_logit * std::exp(adapt_weight_);
        std::vector<double> logits(r_, 0.0);  // last category is the reference
        double biggest = 0.0;
        for (std::size_t j = 0; j + 1 < r_; ++j) {
            logits[j] = std::log(weights_[j] / weights_[r_ - 1]) + scale * normal(rng_);
            biggest = std::max(biggest, logits[j]);
        }
        std::vector<double> cand(r_);
        double norm = 0.0;
        for (std::size_t j = 0; j < r_; ++j) {
            cand[j] = std::exp(logits[j] - biggest);
            norm += cand[j];
        }
        for (auto& w : cand) w /= norm;

        const auto eval = evaluate(means_, shapes_, cand);
        double log_ratio = -kInf;
        if (eval.possible) {
            double jac = 0.0;  // softmax Jacobian: product of the weights
            for (std::size_t j = 0; j < r_; ++j) jac += std::log(cand[j]) - std::log(weights_[j]);
            log_ratio = eval.bulk_sum + tail_count * eval.log_sf + eval.prior - current_piece() + jac;
            if (mh_accept(log_ratio)) {
                weights_ = std::move(cand);
                bulk_sum_ = eval.bulk_sum;
                log_sf_ = eval.log_sf;
                bulk_prior_ = eval.prior;
                tallies_.bulk_weights.accepted++;
            }
        }
        adapt_scale(adapt_weight_, log_ratio);
    }
    refresh_log_post();
}

void MwgSampler::step_gpd() {
    tallies_.gpd.proposed++;
    std::normal_distribution<double> normal(0.0, 1.0);
    const double factor = std::exp(adapt_gpd_);
    const double cand_xi = xi_ + config_.steps.xi * factor * normal(rng_);
    const double cand_log_sigma = std::log(sigma_) + config_.steps.log_sigma * factor * normal(rng_);
    const double cand_sigma = std::exp(cand_log_sigma);

    double log_ratio = -kInf;
    const bool kl = spec_.kind == ThresholdPriorKind::KullbackLeibler;
    if ((!kl || cand_xi > 0.0) && jeffreys_log_prior(cand_xi, cand_sigma) > -kInf) {
        const double cand_jeff = jeffreys_log_prior(cand_xi, cand_sigma);
        ThresholdLogMasses cand_masses;
        const ThresholdLogMasses* masses = &masses_;
        if (kl) {
            cand_masses = threshold_log_masses(sample_, spec_, cand_xi, cand_sigma);
            masses = &cand_masses;
        }
        const auto& x = sample_.sorted();
        const GpdParams gpd{cand_xi, cand_sigma, x[k_ - 1]};
        double cand_gpd_sum = 0.0;
        for (std::size_t j = k_ - 1; j < sample_.size(); ++j) {
            cand_gpd_sum += gpd_log_density(x[j], gpd);
            if (cand_gpd_sum == -kInf) break;
        }
        log_ratio = cand_gpd_sum + masses->at(k_) + cand_jeff -
                    (gpd_sum_ + masses_.at(k_) + jeff_) + (cand_log_sigma - std::log(sigma_));
        if (mh_accept(log_ratio)) {
            xi_ = cand_xi;
            sigma_ = cand_sigma;
            gpd_sum_ = cand_gpd_sum;
            jeff_ = cand_jeff;
            if (kl) masses_ = std::move(cand_masses);
            tallies_.gpd.accepted++;
        }
    }
    adapt_scale(adapt_gpd_, log_ratio);
    refresh_log_post();
}

void MwgSampler::step_threshold() {
    const auto& x = sample_.sorted();
    const double n = static_cast<double>(sample_.size());
    auto target = [&](std::size_t kp) {
        const BulkMixture mix = state().bulk;
        const double sf = bulk_sf(x[kp - 1], mix);
        if (!(sf > 0.0)) return -kInf;
        const GpdParams gpd{xi_, sigma_, x[kp - 1]};
        double gsum = 0.0;
        for (std::size_t j = kp - 1; j < sample_.size(); ++j) {
            gsum += gpd_log_density(x[j], gpd);
            if (gsum == -kInf) return -kInf;
        }
        return bulk_loglik_part(sample_, mix, kp) +
               (n - static_cast<double>(kp) + 1.0) * std::log(sf) + gsum + masses_.at(kp) +
               jeff_ + bulk_prior_;
    };
    const auto walk = detail::threshold_walk_step(k_, support_, config_.k_step, log_post_, target, rng_);
    if (walk.proposed) tallies_.threshold.proposed++;
    if (walk.accepted) {
        tallies_.threshold.accepted++;
        k_ = walk.k;
        const BulkMixture mix = state().bulk;
        bulk_sum_ = bulk_loglik_part(sample_, mix, k_);
        log_sf_ = std::log(bulk_sf(x[k_ - 1], mix));
        const GpdParams gpd{xi_, sigma_, x[k_ - 1]};
        gpd_sum_ = 0.0;
        for (std::size_t j = k_ - 1; j < sample_.size(); ++j) gpd_sum_ += gpd_log_density(x[j], gpd);
        refresh_log_post();
    }
}

PosteriorSamples MwgSampler::run() {
    PosteriorSamples out;
    out.r = r_;
    out.config = config_;
    out.records.reserve(config_.iterations - config_.burn_in);
    const auto& x = sample_.sorted();
    for (iteration_ = 1; iteration_ <= config_.iterations; ++iteration_) {
        adapting_ = config_.adapt && iteration_ <= config_.burn_in;
        step_bulk();
        step_gpd();
        step_threshold();
        if (iteration_ > config_.burn_in)
            out.records.push_back(
                {means_, shapes_, weights_, xi_, sigma_, x[k_ - 1], k_, log_post_});
    }
    out.acceptance = tallies_;
    return out;
}

PosteriorSamples run_chain(const OrderedSample& sample, const ThresholdPriorSpec& spec,
                           const HyperPriors& hyp, const ChainConfig& config, std::size_t r) {
    MwgSampler sampler(sample, spec, hyp, config, r);
    return sampler.run();
}

std::vector<PosteriorSamples> run_chains(const OrderedSample& sample, const ThresholdPriorSpec& spec,
                                         const HyperPriors& hyp, const ChainConfig& config,
                                         std::size_t r, std::size_t n_chains, std::size_t threads) {
    if (n_chains == 0) throw std::invalid_argument("run_chains: need at least one chain");
    std::vector<PosteriorSamples> out(n_chains);
    if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    threads = std::min(threads, n_chains);

    std::vector<std::exception_ptr> errors(n_chains);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n_chains; i = next.fetch_add(1)) {
            try {
                ChainConfig cfg = config;
                cfg.seed = mix_seed(config.seed, i);
                out[i] = run_chain(sample, spec, hyp, cfg, r);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
    if (chains.size() < 2) throw std::invalid_argument("gelman_rubin: need at least two chains");
    const std::size_t n = chains.front().size();
    if (n < 2) throw std::invalid_argument("gelman_rubin: chains must have length >= 2");
    for (const auto& c : chains)
        if (c.size() != n) throw std::invalid_argument("gelman_rubin: chains must have equal length");

    const auto m = static_cast<double>(chains.size());
    const auto len = static_cast<double>(n);
    std::vector<double> means;
    means.reserve(chains.size());
    double w = 0.0;
    for (const auto& c : chains) {
        double mean = 0.0;
        for (double v : c) mean += v;
        mean /= len;
        double ss = 0.0;
        for (double v : c) ss += (v - mean) * (v - mean);
        w += ss / (len - 1.0);
        means.push_back(mean);
    }
    w /= m;
    if (!(w > 0.0)) throw std::domain_error("gelman_rubin: zero within-chain variance");

    double grand = 0.0;
    for (double v : means) grand += v;
    grand /= m;
    double b_over_n = 0.0;
    for (double v : means) b_over_n += (v - grand) * (v - grand);
    b_over_n /= (m - 1.0);

    return std::sqrt(((len - 1.0) / len * w + b_over_n) / w);
}

SummaryStats summarize(std::span<const PosteriorSamples> chains) {
    if (chains.empty()) throw std::invalid_argument("summarize: no chains");
    const std::size_t r = chains.front().r;
    std::size_t total = 0;
    for (const auto& c : chains) {
        if (c.r != r) throw std::invalid_argument("summarize: mixed component counts");
        total += c.records.size();
    }
    if (total == 0) throw std::invalid_argument("summarize: empty samples");

    SummaryStats out;
    std::vector<double> trace;
    trace.reserve(total);
    auto collect = [&](auto&& getter) {
        trace.clear();
        for (const auto& c : chains)
            for (const auto& rec : c.records) trace.push_back(getter(rec));
        return summarize_scalar(trace);
    };
    for (std::size_t j = 0; j < r; ++j) {
        out.means.push_back(collect([j](const ChainRecord& rec) { return rec.means[j]; }));
        out.shapes.push_back(collect([j](const ChainRecord& rec) { return rec.shapes[j]; }));
        out.weights.push_back(collect([j](const ChainRecord& rec) { return rec.weights[j]; }));
    }
    out.xi = collect([](const ChainRecord& rec) { return rec.xi; });
    out.sigma = collect([](const ChainRecord& rec) { return rec.sigma; });
    out.threshold = collect([](const ChainRecord& rec) { return rec.threshold; });

    std::map<std::size_t, ThresholdMassPoint> mass;
    for (const auto& c : chains)
        for (const auto& rec : c.records) {
            auto& point = mass[rec.k];
            point.k = rec.k;
            point.value = rec.threshold;
            point.mass += 1.0;
        }
    for (auto& [k, point] : mass) {
        point.mass /= static_cast<double>(total);
        out.threshold_posterior.push_back(point);
    }
    return out;
}

SummaryStats summarize(const PosteriorSamples& samples) {
    return summarize(std::span<const PosteriorSamples>(&samples, 1));
}

std::vector<std::string> parameter_names(std::size_t r) {
    std::vector<std::string> names;
    for (std::size_t j = 1; j <= r; ++j) names.push_back("alpha_" + std::to_string(j));
    for (std::size_t j = 1; j <= r; ++j) names.push_back("beta_" + std::to_string(j));
    for (std::size_t j = 1; j <= r; ++j) names.push_back("omega_" + std::to_string(j));
    names.emplace_back("xi");
    names.emplace_back("sigma");
    names.emplace_back("theta");
    return names;
}

std::vector<double> parameter_trace(const PosteriorSamples& samples, const std::string& name) {
    auto indexed = [&](const std::string& prefix) -> long {
        if (name.rfind(prefix, 0) != 0) return -1;
        const long j = std::stol(name.substr(prefix.size()));
        if (j < 1 || static_cast<std::size_t>(j) > samples.r)
            throw std::invalid_argument("parameter_trace: component index out of range: " + name);
        return j - 1;
    };
    std::vector<double> out;
    out.reserve(samples.records.size());
    if (long j = indexed("alpha_"); j >= 0) {
        for (const auto& rec : samples.records) out.push_back(rec.means[j]);
    } else if (long j2 = indexed("beta_"); j2 >= 0) {
        for (const auto& rec : samples.records) out.push_back(rec.shapes[j2]);
    } else if (long j3 = indexed("omega_"); j3 >= 0) {
        for (const auto& rec : samples.records) out.push_back(rec.weights[j3]);
    } else if (name == "xi") {
        for (const auto& rec : samples.records) out.push_back(rec.xi);
    } else if (name == "sigma") {
        for (const auto& rec : samples.records) out.push_back(rec.sigma);
    } else if (name == "theta") {
        for (const auto& rec : samples.records) out.push_back(rec.threshold);
    } else {
        throw std::invalid_argument("parameter_trace: unknown parameter: " + name);
    }
    return out;
}

}  // namespace splicefit

#include "splicefit/priors.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <limits>

namespace splicefit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// E[log(U^-xi + c)] = xi + Integral_0^1 log1p(c u^xi) du, so the divergence
// reduces to ((1+xi)/xi) * I(xi, c) with a bounded, singularity-free
// integrand. I is in [0, log1p(c)].

double kl_series(double xi, double c, double tol) {
    // alternating series sum_m (-1)^(m+1) c^m / (m (1 + m xi)), c <= 0.8
    double sum = 0.0;
    double cpow = 1.0;
    for (int m = 1; m < 4000; ++m) {
        cpow *= c;
        const double term = cpow / (m * (1.0 + m * xi));
        sum += (m & 1) ? term : -term;
        if (term < tol) break;
    }
    return sum;
}

double kl_integrand(double u, double xi, double c) {
    if (u <= 0.0) return 0.0;
    return std::log1p(c * std::exp(xi * std::log(u)));
}

double simpson_recurse(double xi, double c, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = kl_integrand(lm, xi, c);
    const double frm = kl_integrand(rm, xi, c);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_recurse(xi, c, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(xi, c, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double kl_quadrature(double xi, double c, double tol) {
    const double fa = 0.0;
    const double fb = std::log1p(c);
    const double fm = kl_integrand(0.5, xi, c);
    const double whole = (fa + 4.0 * fm + fb) / 6.0;
    return simpson_recurse(xi, c, 0.0, 1.0, fa, fm, fb, whole, tol, 48);
}

double round_sig12(double v) {
    if (v == 0.0 || !std::isfinite(v)) return v;
    const double mag = std::floor(std::log10(std::abs(v)));
    const double scale = std::pow(10.0, 11.0 - mag);
    return std::round(v * scale) / scale;
}

struct KlCacheEntry {
    double xi = -1.0;
    double c = -1.0;
    double value = 0.0;
};

constexpr std::size_t kKlCacheSize = 1 << 14;  // direct-mapped, bounded

std::size_t kl_cache_slot(double xi, double c) {
    std::uint64_t a, b;
    std::memcpy(&a, &xi, sizeof a);
    std::memcpy(&b, &c, sizeof b);
    std::uint64_t h = a * 0x9e3779b97f4a7c15ULL ^ (b + 0xbf58476d1ce4e5b9ULL + (a << 6));
    h ^= h >> 29;
    return static_cast<std::size_t>(h) & (kKlCacheSize - 1);
}

double log_inverse_gamma(double x, const InverseGammaPrior& p) {
    if (!(x > 0.0)) return -kInf;
    return p.shape * std::log(p.scale) - std::lgamma(p.shape) - (p.shape + 1.0) * std::log(x) -
           p.scale / x;
}

double log_gamma_shape_rate(double x, const GammaPrior& p) {
    if (!(x > 0.0)) return -kInf;
    return p.shape * std::log(p.rate) - std::lgamma(p.shape) + (p.shape - 1.0) * std::log(x) -
           p.rate * x;
}

}  // namespace

SupportRange resolve_support(const ThresholdPriorSpec& spec, std::size_t n) {
    const std::size_t hi = spec.support_hi == 0 ? n : spec.support_hi;
    if (spec.support_lo < 2 || spec.support_lo > hi || hi > n)
        throw std::invalid_argument("threshold prior support must satisfy 2 <= lo <= hi <= n");
    return {spec.support_lo, hi};
}

double kl_adjacent_gpd(double xi, double c) {
    if (!(xi > 0.0)) throw std::domain_error("kl_adjacent_gpd: requires xi > 0");
    if (c < 0.0 || !std::isfinite(c)) throw std::invalid_argument("kl_adjacent_gpd: c must be finite and >= 0");
    if (c == 0.0) return 0.0;

    const double rxi = round_sig12(xi);
    const double rc = round_sig12(c);
    thread_local std::array<KlCacheEntry, kKlCacheSize> cache;
    auto& slot = cache[kl_cache_slot(rxi, rc)];
    if (slot.xi == rxi && slot.c == rc) return slot.value;

    const double factor = (1.0 + xi) / xi;
    // keep the final divergence accurate to ~1e-10 absolute
    const double tol = std::min(1e-11, 1e-11 / factor);
    const double integral = (c <= 0.8) ? kl_series(xi, c, tol) : kl_quadrature(xi, c, tol);
    const double value = factor * integral;
    slot = {rxi, rc, value};
    return value;
}

double stable_log_expm1(double k) {
    if (k < 0.0 || std::isnan(k)) throw std::invalid_argument("stable_log_expm1: k must be >= 0");
    if (k == 0.0) return -kInf;
    if (k <= 0.6931471805599453) return std::log(std::expm1(k));
    return k + std::log1p(-std::exp(-k));
}

ThresholdLogMasses threshold_log_masses(const OrderedSample& sample, const ThresholdPriorSpec& spec,
                                        double xi, double sigma) {
    const auto range = resolve_support(spec, sample.size());
    ThresholdLogMasses out;
    out.lo = range.lo;
    out.hi = range.hi;
    out.log_mass.resize(range.count());

    if (spec.kind == ThresholdPriorKind::UniformOnOrderStats) {
        const double lm = -std::log(static_cast<double>(range.count()));
        for (auto& v : out.log_mass) v = lm;
        out.log_normalizer = std::log(static_cast<double>(range.count()));
        return out;
    }

    if (!(xi > 0.0)) throw std::domain_error("KL threshold prior requires xi > 0");
    if (!(sigma > 0.0)) throw std::invalid_argument("threshold_log_masses: sigma must be positive");

    const auto& x = sample.sorted();
    for (std::size_t k = range.lo; k <= range.hi; ++k) {
        const double delta = x[k - 1] - x[k - 2];
        const double divergence = kl_adjacent_gpd(xi, xi * delta / sigma);
        out.log_mass[k - range.lo] = stable_log_expm1(divergence);
    }
    out.log_normalizer = log_sum_exp(out.log_mass);
    if (!std::isfinite(out.log_normalizer))
        throw std::domain_error("KL threshold prior is degenerate: all supported order statistics tied");
    for (auto& v : out.log_mass) v -= out.log_normalizer;
    return out;
}

double jeffreys_log_prior(double xi, double sigma) {
    if (!(xi > -0.5) || !(sigma > 0.0)) return -kInf;
    return -std::log(sigma) - std::log1p(xi) - 0.5 * std::log1p(2.0 * xi);
}

double bulk_hyper_log_prior(std::span<const double> weights, std::span<const double> means,
                            std::span<const double> shapes, const HyperPriors& h) {
    const std::size_t r = means.size();
    if (r == 0 || shapes.size() != r || weights.size() != r)
        throw std::invalid_argument("bulk_hyper_log_prior: inconsistent parameter vector sizes");
    double prev = 0.0;
    for (double m : means) {
        if (!(m > prev)) return -kInf;  // ordering constraint encodes as impossibility
        prev = m;
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
        acc += log_inverse_gamma(means[j], h.mean_prior);
        acc += log_gamma_shape_rate(shapes[j], h.shape_prior);
    }
    // symmetric Dirichlet over the weights
    const double kappa = h.dirichlet_concentration;
    double wsum = 0.0;
    acc += std::lgamma(kappa * r) - r * std::lgamma(kappa);
    for (double w : weights) {
        if (!(w > 0.0) || w >= 1.0) {
            if (r == 1 && w == 1.0) continue;  // degenerate one-component simplex
            return -kInf;
        }
        acc += (kappa - 1.0) * std::log(w);
        wsum += w;
    }
    if (r > 1 && std::abs(wsum - 1.0) > 1e-9) return -kInf;
    return acc;
}

double bulk_hyper_log_prior(const BulkMixture& m, const HyperPriors& h) {
    std::vector<double> means, shapes;
    means.reserve(m.order());
    shapes.reserve(m.order());
    for (const auto& c : m.components()) {
        means.push_back(c.mean);
        shapes.push_back(c.shape);
    }
    return bulk_hyper_log_prior(m.weights(), means, shapes, h);
}

}  // namespace splicefit

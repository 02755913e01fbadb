#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace splicefit {

using Rng = std::mt19937_64;

/// Error for malformed or unusable input data (CSV parse failures,
/// non-positive observations, too-few rows). The CLI maps this to exit 3.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// log(sum(exp(v))) with max-shift stabilization. Empty input -> -inf.
double log_sum_exp(std::span<const double> v);

/// Deterministic 64-bit mix used to derive per-chain / per-replication seeds
/// from a master seed and a counter.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter);

/// Type-7 empirical quantile (linear interpolation between order statistics).
/// `sorted` must be non-empty and ascending; p in [0, 1].
double quantile_type7(std::span<const double> sorted, double p);

}  // namespace splicefit

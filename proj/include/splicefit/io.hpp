#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "splicefit/sampler.hpp"

namespace splicefit {

/// A single numeric column inside a delimited text file. `column` is either a
/// 1-based index ("2") or a header name; the empty string means column 1.
struct SeriesFile {
    std::filesystem::path path;
    std::string column;
    char delimiter = ',';
    bool header = false;
};

/// Parses, validates positivity, and sorts. Throws DataError with the
/// offending line number on malformed input, on non-positive values, and when
/// fewer than 3 rows survive. Handles both LF and CRLF endings.
OrderedSample read_series(const SeriesFile& file);

/// Absolute relative price moves in percent: |p_t / p_{t-1} - 1| * 100.
/// Output has length prices.size() - 1. Exact zeros (tied prices) are legal
/// but recorded, since downstream models require positive data.
struct Increments {
    std::vector<double> values;
    std::vector<std::size_t> zero_positions;  // 0-based index into values
};
Increments nasdaq_increments(const std::vector<double>& prices);

/// Everything needed to reproduce and report one fit. Serialized as a
/// versioned key-value text file (see docs/report-format.md).
struct RunReport {
    int schema_version = 1;
    std::string data_path;
    std::size_t data_n = 0;
    std::string prior;  // "uniform" or "kl"
    std::size_t support_lo = 2;
    std::size_t support_hi = 0;
    std::size_t r = 1;
    std::size_t chains = 1;
    ChainConfig config{};
    HyperPriors hyper{};
    SummaryStats summary{};
    std::map<std::string, double> acceptance;    // block -> rate
    std::map<std::string, double> gelman_rubin;  // parameter -> PSRF
    std::vector<ThresholdMassPoint> prior_curve;

    bool operator==(const RunReport&) const = default;
};

void write_report(const RunReport& report, const std::filesystem::path& path);
RunReport read_report(const std::filesystem::path& path);

/// One iteration per row, comma separated, parameters in parameter_names()
/// order plus k and the log posterior. Byte-deterministic for fixed inputs.
void write_chain(const PosteriorSamples& samples, const std::filesystem::path& path);

/// 17-significant-digit lowercase scientific rendering used by all writers.
std::string format_double(double v);

}  // namespace splicefit

#pragma once

// Domain types shared by every stage of the frame-error-probability lab:
// link configurations, per-subcarrier SINR channel states, ACK/NACK records
// and the dataset container, plus the small metric kernels used for
// training and evaluation.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace feplab {

// Error categories. The CLI maps them onto exit codes 2, 3 and 4.
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Randomness
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

/// Mixes a base seed with a stream tag and an index into an independent
/// 64-bit seed (splitmix64 finaliser applied twice).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

// ---------------------------------------------------------------------------
// Link configurations
// ---------------------------------------------------------------------------

struct LinkConfig {
    std::size_t subcarriers = 64;     // M
    std::size_t frame_symbols = 4;    // S
    std::size_t modulation_order = 2; // J, bits per symbol
    double code_rate = 0.04;          // R
    std::size_t payload_bits = 0;     // T = round(M*S*J*R)
    std::size_t config_id = 1;        // k, 1-based

    std::size_t coded_positions() const { return subcarriers * frame_symbols * modulation_order; }
    bool operator==(const LinkConfig&) const = default;
};

/// Ordered set of K configurations that share M, S and J and differ in code
/// rate. Rates must be strictly increasing and not exceed `max_rate`.
class ConfigSet {
public:
    ConfigSet() = default;
    ConfigSet(std::size_t subcarriers, std::size_t frame_symbols, std::size_t modulation_order,
              std::vector<double> rates, double max_rate = 1.0 / 3.0);

    std::size_t size() const { return configs_.size(); }
    bool empty() const { return configs_.empty(); }
    const LinkConfig& operator[](std::size_t index) const { return configs_[index]; }
    const LinkConfig& by_id(std::size_t config_id) const;
    const std::vector<LinkConfig>& configs() const { return configs_; }

    std::size_t subcarriers() const { return subcarriers_; }
    std::size_t frame_symbols() const { return frame_symbols_; }
    std::size_t modulation_order() const { return modulation_order_; }
    std::vector<double> rates() const;
    std::vector<double> payload_bits() const;

    bool operator==(const ConfigSet&) const = default;

private:
    std::size_t subcarriers_ = 0;
    std::size_t frame_symbols_ = 0;
    std::size_t modulation_order_ = 0;
    std::vector<LinkConfig> configs_;
};

// ---------------------------------------------------------------------------
// Channel state
// ---------------------------------------------------------------------------

inline constexpr double kSinrDbFloor = -40.0;

double linear_to_db(double linear);
double db_to_linear(double db);

/// Per-subcarrier SINRs. Linear values are the source of truth; the dB view
/// clamps zero (and anything below the floor) to kSinrDbFloor.
class SinrVector {
public:
    SinrVector() = default;
    explicit SinrVector(std::vector<double> linear);
    static SinrVector from_db(std::span<const double> db);

    std::size_t size() const { return linear_.size(); }
    bool empty() const { return linear_.empty(); }
    std::span<const double> linear() const { return linear_; }
    double operator[](std::size_t m) const { return linear_[m]; }
    std::vector<double> db() const;

    /// Copy quantised to the dataset storage representation: dB values at
    /// 6 significant digits held as float32, linear recomputed from them.
    /// Idempotent; a canonical vector survives a dataset round trip bit-exactly.
    SinrVector storage_canonical() const;

    bool operator==(const SinrVector&) const = default;

private:
    std::vector<double> linear_;
};

/// Ascending sort of the subcarrier SINRs.
SinrVector sort_sinrs(const SinrVector& sinr);

// ---------------------------------------------------------------------------
// Observations
// ---------------------------------------------------------------------------

inline constexpr std::int8_t kUnobserved = -1;

struct FrameObservation {
    SinrVector sinr;
    std::vector<std::int8_t> events; // index k-1 -> 0 (ACK), 1 (NACK) or kUnobserved
    std::uint64_t seed = 0;
    double avg_snr_db = 0.0;

    bool observed(std::size_t index) const { return events[index] != kUnobserved; }
    std::size_t observed_count() const;
    bool operator==(const FrameObservation&) const = default;
};

struct Dataset {
    ConfigSet config_set;
    std::vector<FrameObservation> records;

    std::size_t size() const { return records.size(); }
    /// Throws DataError when a record disagrees with the config set.
    void validate() const;
    bool operator==(const Dataset&) const = default;
};

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

inline constexpr double kProbabilityEpsilon = 1e-12;

double clamp_probability(double p, double epsilon = kProbabilityEpsilon);

/// -[e ln p + (1-e) ln(1-p)] with p clamped into [eps, 1-eps].
double bernoulli_nll(int event, double predicted);

/// Root mean squared difference. Throws std::invalid_argument on empty or
/// mismatched inputs.
double rmse(std::span<const double> predictions, std::span<const double> references);

} // namespace feplab

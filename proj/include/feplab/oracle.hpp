#pragma once

// Synthetic event generators with analytically known FEP. They make the
// maximum-likelihood convergence and the prediction-accuracy comparisons
// measurable without Monte Carlo ground-truth error.

#include "feplab/core.hpp"

#include <functional>
#include <string>
#include <vector>

namespace feplab {

enum class OracleFamily { kInFamily, kOutFamily };

OracleFamily parse_oracle_family(const std::string& text);
std::string to_string(OracleFamily family);

/// Per-configuration oracle parameters.
///   in_family:  rho = 1 / (1 + exp(slope * (eesm_dB(gamma; beta) - midpoint)))
///   out_family: rho = 1 / (1 + exp(slope * (w_min * min_dB + w_mean * mean_dB
///                                           - w_spread * std_dB - midpoint)))
struct OracleTerm {
    double beta = 2.0;
    double slope = 1.2;       // per dB
    double midpoint_db = 0.0;
    double w_min = 0.0;
    double w_mean = 1.0;
    double w_spread = 1.5;
};

struct OracleSpec {
    OracleFamily family = OracleFamily::kInFamily;
    std::vector<OracleTerm> terms; // index k-1

    std::size_t size() const { return terms.size(); }
    void validate() const;

    /// beta* = 2, slope 1.2/dB, midpoints first_midpoint_db + 0.8 (k-1).
    static OracleSpec in_family_default(std::size_t configs, double first_midpoint_db = 0.0);
    /// Weights (0, 1, 1.5), slope 1.2/dB, same midpoints.
    static OracleSpec out_family_default(std::size_t configs, double first_midpoint_db = 0.0);
};

inline constexpr double kOracleMidpointStepDb = 0.8;

double oracle_fep(const OracleSpec& spec, std::size_t config_id, const SinrVector& sinr);
std::vector<double> oracle_fep_all(const OracleSpec& spec, const SinrVector& sinr);

/// One draw u ~ U[0,1) per configuration; e_k = [u < rho_k]. Per-k seeds are
/// derive_seed(seed, k), the same stream the oracle event source uses.
FrameObservation sample_observation(const OracleSpec& spec, const SinrVector& sinr, std::uint64_t seed,
                                    double avg_snr_db = 0.0);

/// Bernoulli draw used by sample_observation and the oracle event source.
int bernoulli_event(double probability, std::uint64_t seed);

using FepPredictor = std::function<std::vector<double>(const SinrVector&)>;

struct KlReport {
    std::vector<double> per_config; // mean KL in nats, index k-1
    double average = 0.0;
};

/// KL(Bern(rho) || Bern(rho_hat)) with rho_hat clamped and 0 ln 0 = 0.
double bernoulli_kl(double rho, double rho_hat);
/// Entropy of Bern(rho) in nats.
double bernoulli_entropy(double rho);
/// -[rho ln rho_hat + (1 - rho) ln(1 - rho_hat)] with rho_hat clamped.
double bernoulli_cross_entropy(double rho, double rho_hat);

KlReport kl_to_oracle(const FepPredictor& predictor, const OracleSpec& spec, std::span<const SinrVector> test_states);

/// Mean over states and configurations of the cross entropy of `predictor`
/// under the oracle's true rho, and the oracle's own entropy. Their
/// difference equals the average KL.
double expected_cross_entropy(const FepPredictor& predictor, const OracleSpec& spec,
                              std::span<const SinrVector> test_states);
double oracle_entropy(const OracleSpec& spec, std::span<const SinrVector> test_states);

} // namespace feplab

#include "feplab/oracle.hpp"

#include "feplab/eesm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace feplab {

namespace {

double logistic_tail(double x) { return 1.0 / (1.0 + std::exp(x)); }

double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

} // namespace

OracleFamily parse_oracle_family(const std::string& text) {
    if (text == "in_family") return OracleFamily::kInFamily;
    if (text == "out_family") return OracleFamily::kOutFamily;
    throw ConfigError("oracle family must be 'in_family' or 'out_family', got '" + text + "'");
}

std::string to_string(OracleFamily family) {
    return family == OracleFamily::kInFamily ? "in_family" : "out_family";
}

void OracleSpec::validate() const {
    for (const auto& t : terms) {
        if (!(t.slope > 0.0)) throw ConfigError("oracle: slopes must be positive");
        if (!(t.beta > 0.0)) throw ConfigError("oracle: beta must be positive");
        if (!std::isfinite(t.midpoint_db) || !std::isfinite(t.w_min) || !std::isfinite(t.w_mean) ||
            !std::isfinite(t.w_spread)) {
            throw ConfigError("oracle: non-finite parameter");
        }
    }
}

OracleSpec OracleSpec::in_family_default(std::size_t configs, double first_midpoint_db) {
    OracleSpec spec;
    spec.family = OracleFamily::kInFamily;
    for (std::size_t k = 0; k < configs; ++k) {
        OracleTerm t;
        t.midpoint_db = first_midpoint_db + kOracleMidpointStepDb * static_cast<double>(k);
        spec.terms.push_back(t);
    }
    return spec;
}

OracleSpec OracleSpec::out_family_default(std::size_t configs, double first_midpoint_db) {
    OracleSpec spec = in_family_default(configs, first_midpoint_db);
    spec.family = OracleFamily::kOutFamily;
    return spec;
}

double oracle_fep(const OracleSpec& spec, std::size_t config_id, const SinrVector& sinr) {
    const OracleTerm& t = spec.terms.at(config_id - 1);
    if (spec.family == OracleFamily::kInFamily) {
        const double g_db = linear_to_db(eesm_compress(sinr, t.beta, EesmSign::kStandard));
        return logistic_tail(t.slope * (g_db - t.midpoint_db));
    }
    const auto db = sinr.db();
    const double n = static_cast<double>(db.size());
    const double lo = *std::min_element(db.begin(), db.end());
    const double mean = std::accumulate(db.begin(), db.end(), 0.0) / n;
    double var = 0.0;
    for (double x : db) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / n);
    const double feature = t.w_min * lo + t.w_mean * mean - t.w_spread * sd;
    return logistic_tail(t.slope * (feature - t.midpoint_db));
}

std::vector<double> oracle_fep_all(const OracleSpec& spec, const SinrVector& sinr) {
    std::vector<double> out(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) out[k] = oracle_fep(spec, k + 1, sinr);
    return out;
}

int bernoulli_event(double probability, std::uint64_t seed) {
    Rng rng(seed);
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53; // [0, 1) on the 2^-53 lattice
    return u < probability ? 1 : 0;
}

FrameObservation sample_observation(const OracleSpec& spec, const SinrVector& sinr, std::uint64_t seed,
                                    double avg_snr_db) {
    FrameObservation obs;
    obs.sinr = sinr;
    obs.seed = seed;
    obs.avg_snr_db = avg_snr_db;
    obs.events.resize(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        obs.events[k] = static_cast<std::int8_t>(bernoulli_event(oracle_fep(spec, k + 1, sinr), derive_seed(seed, k + 1)));
    }
    return obs;
}

double bernoulli_kl(double rho, double rho_hat) {
    const double q = clamp_probability(rho_hat);
    return xlogy(rho, rho) - xlogy(rho, q) + xlogy(1.0 - rho, 1.0 - rho) - xlogy(1.0 - rho, 1.0 - q);
}

double bernoulli_entropy(double rho) { return -xlogy(rho, rho) - xlogy(1.0 - rho, 1.0 - rho); }

double bernoulli_cross_entropy(double rho, double rho_hat) {
    const double q = clamp_probability(rho_hat);
    return -xlogy(rho, q) - xlogy(1.0 - rho, 1.0 - q);
}

KlReport kl_to_oracle(const FepPredictor& predictor, const OracleSpec& spec, std::span<const SinrVector> test_states) {
    if (test_states.empty()) throw std::invalid_argument("kl_to_oracle: empty test set");
    KlReport report;
    report.per_config.assign(spec.size(), 0.0);
    for (const auto& state : test_states) {
        const auto predicted = predictor(state);
        if (predicted.size() != spec.size()) throw std::invalid_argument("kl_to_oracle: predictor width != K");
        for (std::size_t k = 0; k < spec.size(); ++k) {
            report.per_config[k] += bernoulli_kl(oracle_fep(spec, k + 1, state), predicted[k]);
        }
    }
    const double n = static_cast<double>(test_states.size());
    for (double& v : report.per_config) v /= n;
    report.average = spec.size() == 0 ? 0.0
                                      : std::accumulate(report.per_config.begin(), report.per_config.end(), 0.0) /
                                            static_cast<double>(spec.size());
    return report;
}

double expected_cross_entropy(const FepPredictor& predictor, const OracleSpec& spec,
                              std::span<const SinrVector> test_states) {
    if (test_states.empty() || spec.size() == 0) throw std::invalid_argument("expected_cross_entropy: empty input");
    double acc = 0.0;
    for (const auto& state : test_states) {
        const auto predicted = predictor(state);
        for (std::size_t k = 0; k < spec.size(); ++k) {
            acc += bernoulli_cross_entropy(oracle_fep(spec, k + 1, state), predicted[k]);
        }
    }
    return acc / static_cast<double>(test_states.size() * spec.size());
}

double oracle_entropy(const OracleSpec& spec, std::span<const SinrVector> test_states) {
    if (test_states.empty() || spec.size() == 0) throw std::invalid_argument("oracle_entropy: empty input");
    double acc = 0.0;
    for (const auto& state : test_states) {
        for (std::size_t k = 0; k < spec.size(); ++k) acc += bernoulli_entropy(oracle_fep(spec, k + 1, state));
    }
    return acc / static_cast<double>(test_states.size() * spec.size());
}

} // namespace feplab

#include "feplab/core.hpp"

#include "storage_format.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace feplab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t h = splitmix64(base);
    h = splitmix64(h ^ (stream * 0xd6e8feb86659fd93ULL));
    return splitmix64(h ^ (index * 0xa0761d6478bd642fULL));
}

// ---------------------------------------------------------------------------

ConfigSet::ConfigSet(std::size_t subcarriers, std::size_t frame_symbols, std::size_t modulation_order,
                     std::vector<double> rates, double max_rate)
    : subcarriers_(subcarriers), frame_symbols_(frame_symbols), modulation_order_(modulation_order) {
    if (subcarriers == 0 || frame_symbols == 0 || modulation_order == 0) {
        throw ConfigError("config set: M, S and J must be positive");
    }
    if (modulation_order != 2) {
        throw ConfigError("config set: only QPSK (J = 2) is supported");
    }
    const std::size_t positions = subcarriers * frame_symbols * modulation_order;
    configs_.reserve(rates.size());
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const double rate = rates[i];
        if (!std::isfinite(rate) || rate <= 0.0 || rate > max_rate + 1e-12) {
            throw ConfigError("config set: code rate " + std::to_string(rate) +
                              " outside (0, " + std::to_string(max_rate) + "]");
        }
        if (i > 0 && rate <= rates[i - 1]) {
            throw ConfigError("config set: code rates must be strictly increasing");
        }
        LinkConfig cfg;
        cfg.subcarriers = subcarriers;
        cfg.frame_symbols = frame_symbols;
        cfg.modulation_order = modulation_order;
        cfg.code_rate = rate;
        cfg.payload_bits = static_cast<std::size_t>(std::llround(static_cast<double>(positions) * rate));
        cfg.config_id = i + 1;
        if (cfg.payload_bits < 1) {
            throw ConfigError("config set: code rate " + std::to_string(rate) + " yields an empty payload");
        }
        configs_.push_back(cfg);
    }
}

const LinkConfig& ConfigSet::by_id(std::size_t config_id) const {
    if (config_id < 1 || config_id > configs_.size()) {
        throw std::out_of_range("config id " + std::to_string(config_id) + " not in 1.." +
                                std::to_string(configs_.size()));
    }
    return configs_[config_id - 1];
}

std::vector<double> ConfigSet::rates() const {
    std::vector<double> out;
    out.reserve(configs_.size());
    for (const auto& c : configs_) out.push_back(c.code_rate);
    return out;
}

std::vector<double> ConfigSet::payload_bits() const {
    std::vector<double> out;
    out.reserve(configs_.size());
    for (const auto& c : configs_) out.push_back(static_cast<double>(c.payload_bits));
    return out;
}

// ---------------------------------------------------------------------------

double linear_to_db(double linear) {
    if (!(linear > 0.0)) return kSinrDbFloor;
    return std::max(10.0 * std::log10(linear), kSinrDbFloor);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

SinrVector::SinrVector(std::vector<double> linear) : linear_(std::move(linear)) {
    for (double v : linear_) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument("SINR values must be finite and non-negative");
        }
    }
}

SinrVector SinrVector::from_db(std::span<const double> db) {
    std::vector<double> lin(db.size());
    std::transform(db.begin(), db.end(), lin.begin(), db_to_linear);
    return SinrVector(std::move(lin));
}

std::vector<double> SinrVector::db() const {
    std::vector<double> out(linear_.size());
    std::transform(linear_.begin(), linear_.end(), out.begin(), linear_to_db);
    return out;
}

SinrVector SinrVector::storage_canonical() const {
    std::vector<double> lin(linear_.size());
    for (std::size_t m = 0; m < linear_.size(); ++m) {
        lin[m] = detail::linear_from_stored_db(detail::quantize_db(linear_to_db(linear_[m])));
    }
    return SinrVector(std::move(lin));
}

SinrVector sort_sinrs(const SinrVector& sinr) {
    std::vector<double> v(sinr.linear().begin(), sinr.linear().end());
    std::sort(v.begin(), v.end());
    return SinrVector(std::move(v));
}

// ---------------------------------------------------------------------------

std::size_t FrameObservation::observed_count() const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [](std::int8_t e) { return e != kUnobserved; }));
}

void Dataset::validate() const {
    for (std::size_t n = 0; n < records.size(); ++n) {
        const auto& r = records[n];
        if (r.sinr.size() != config_set.subcarriers()) {
            throw DataError("record " + std::to_string(n) + ": SINR length " + std::to_string(r.sinr.size()) +
                            " != M = " + std::to_string(config_set.subcarriers()));
        }
        if (r.events.size() != config_set.size()) {
            throw DataError("record " + std::to_string(n) + ": event count != K");
        }
        for (auto e : r.events) {
            if (e != 0 && e != 1 && e != kUnobserved) {
                throw DataError("record " + std::to_string(n) + ": invalid event value");
            }
        }
        if (r.observed_count() == 0) {
            throw DataError("record " + std::to_string(n) + ": no configuration observed");
        }
    }
}

// ---------------------------------------------------------------------------

double clamp_probability(double p, double epsilon) { return std::clamp(p, epsilon, 1.0 - epsilon); }

double bernoulli_nll(int event, double predicted) {
    const double p = clamp_probability(predicted);
    return event != 0 ? -std::log(p) : -std::log1p(-p);
}

double rmse(std::span<const double> predictions, std::span<const double> references) {
    if (predictions.empty()) throw std::invalid_argument("rmse: empty input");
    if (predictions.size() != references.size()) throw std::invalid_argument("rmse: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - references[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(predictions.size()));
}

} // namespace feplab

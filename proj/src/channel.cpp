#include "feplab/channel.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace feplab {

TapProfile::TapProfile(std::string name, std::vector<double> delays_ns, std::vector<double> powers_db)
    : name_(std::move(name)), delays_ns_(std::move(delays_ns)), powers_db_(std::move(powers_db)) {
    if (delays_ns_.empty() || delays_ns_.size() != powers_db_.size()) {
        throw ConfigError("tap profile '" + name_ + "': delays and powers must be non-empty and of equal length");
    }
    for (std::size_t t = 0; t < delays_ns_.size(); ++t) {
        if (!std::isfinite(delays_ns_[t]) || delays_ns_[t] < 0.0 || !std::isfinite(powers_db_[t])) {
            throw ConfigError("tap profile '" + name_ + "': non-finite or negative tap");
        }
        if (t > 0 && delays_ns_[t] <= delays_ns_[t - 1]) {
            throw ConfigError("tap profile '" + name_ + "': delays must be strictly increasing");
        }
    }
    linear_powers_.resize(powers_db_.size());
    for (std::size_t t = 0; t < powers_db_.size(); ++t) linear_powers_[t] = db_to_linear(powers_db_[t]);
    const double total = std::accumulate(linear_powers_.begin(), linear_powers_.end(), 0.0);
    for (double& p : linear_powers_) p /= total;
}

TapProfile epa_profile() {
    return TapProfile("EPA", {0, 30, 70, 90, 110, 190, 410}, {0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8});
}

ChannelRealization ChannelRealization::from_sinrs(const SinrVector& sinr) {
    ChannelRealization ch;
    ch.h.resize(sinr.size());
    for (std::size_t m = 0; m < sinr.size(); ++m) ch.h[m] = std::sqrt(sinr[m]);
    ch.noise_variance = 1.0;
    return ch;
}

ChannelRealization ChannelRealization::flat(std::size_t subcarriers, double snr_db) {
    ChannelRealization ch;
    ch.h.assign(subcarriers, {1.0, 0.0});
    ch.noise_variance = 1.0 / db_to_linear(snr_db);
    return ch;
}

FadingChannel::FadingChannel(TapProfile profile, std::size_t subcarriers, double subcarrier_spacing_hz)
    : profile_(std::move(profile)), subcarriers_(subcarriers), spacing_hz_(subcarrier_spacing_hz) {
    if (subcarriers_ == 0) throw ConfigError("channel: M must be at least 1");
    if (!std::isfinite(spacing_hz_) || spacing_hz_ <= 0.0) throw ConfigError("channel: subcarrier spacing must be > 0");
    const std::size_t taps = profile_.tap_count();
    steering_.resize(subcarriers_ * taps);
    for (std::size_t m = 0; m < subcarriers_; ++m) {
        const double f = static_cast<double>(m) * spacing_hz_;
        for (std::size_t t = 0; t < taps; ++t) {
            const double phase = -2.0 * std::numbers::pi * f * profile_.delays_ns()[t] * 1e-9;
            steering_[m * taps + t] = std::polar(1.0, phase);
        }
    }
}

ChannelRealization FadingChannel::draw(double avg_snr_db, std::uint64_t seed) const {
    if (!std::isfinite(avg_snr_db)) throw std::invalid_argument("channel: average SNR must be finite");
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t taps = profile_.tap_count();
    std::vector<std::complex<double>> amplitude(taps);
    for (std::size_t t = 0; t < taps; ++t) {
        const double sd = std::sqrt(profile_.linear_powers()[t] / 2.0);
        const double re = gauss(rng);
        const double im = gauss(rng);
        amplitude[t] = {sd * re, sd * im};
    }
    ChannelRealization ch;
    ch.h.resize(subcarriers_);
    for (std::size_t m = 0; m < subcarriers_; ++m) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t t = 0; t < taps; ++t) acc += amplitude[t] * steering_[m * taps + t];
        ch.h[m] = acc;
    }
    ch.noise_variance = 1.0 / db_to_linear(avg_snr_db);
    return ch;
}

ChannelRealization draw_channel(const TapProfile& profile, std::size_t subcarriers, double subcarrier_spacing_hz,
                                double avg_snr_db, std::uint64_t seed) {
    return FadingChannel(profile, subcarriers, subcarrier_spacing_hz).draw(avg_snr_db, seed);
}

SinrVector compute_sinrs(const ChannelRealization& channel) {
    if (!(channel.noise_variance > 0.0)) throw std::invalid_argument("compute_sinrs: noise variance must be > 0");
    std::vector<double> gamma(channel.h.size());
    for (std::size_t m = 0; m < channel.h.size(); ++m) gamma[m] = std::norm(channel.h[m]) / channel.noise_variance;
    return SinrVector(std::move(gamma));
}

} // namespace feplab

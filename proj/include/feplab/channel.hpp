#pragma once

#include "feplab/core.hpp"

#include <complex>
#include <string>
#include <vector>

namespace feplab {

inline constexpr double kDefaultSubcarrierSpacingHz = 15e3;

/// Tapped-delay-line power profile. Linear tap powers are normalised to sum
/// to one on construction.
class TapProfile {
public:
    TapProfile(std::string name, std::vector<double> delays_ns, std::vector<double> powers_db);

    const std::string& name() const { return name_; }
    const std::vector<double>& delays_ns() const { return delays_ns_; }
    const std::vector<double>& powers_db() const { return powers_db_; }
    const std::vector<double>& linear_powers() const { return linear_powers_; }
    std::size_t tap_count() const { return delays_ns_.size(); }

private:
    std::string name_;
    std::vector<double> delays_ns_;
    std::vector<double> powers_db_;
    std::vector<double> linear_powers_;
};

/// 3GPP Extended Pedestrian A.
TapProfile epa_profile();

/// Frequency-domain block-fading realisation: one coefficient per subcarrier,
/// shared by every OFDM symbol of the frame.
struct ChannelRealization {
    std::vector<std::complex<double>> h;
    double noise_variance = 1.0; // total complex variance sigma^2

    std::size_t size() const { return h.size(); }

    /// A realisation with h_m = sqrt(gamma_m) and sigma^2 = 1. After
    /// zero-forcing this is indistinguishable from any channel with the same
    /// per-subcarrier SINRs.
    static ChannelRealization from_sinrs(const SinrVector& sinr);
    static ChannelRealization flat(std::size_t subcarriers, double snr_db);
};

/// Draws realisations for a fixed (profile, M, spacing); caches the per-tap
/// subcarrier phase rotations.
class FadingChannel {
public:
    FadingChannel(TapProfile profile, std::size_t subcarriers,
                  double subcarrier_spacing_hz = kDefaultSubcarrierSpacingHz);

    ChannelRealization draw(double avg_snr_db, std::uint64_t seed) const;

    const TapProfile& profile() const { return profile_; }
    std::size_t subcarriers() const { return subcarriers_; }
    double subcarrier_spacing_hz() const { return spacing_hz_; }

private:
    TapProfile profile_;
    std::size_t subcarriers_;
    double spacing_hz_;
    std::vector<std::complex<double>> steering_; // [m * taps + t] = exp(-j 2 pi f_m tau_t)
};

ChannelRealization draw_channel(const TapProfile& profile, std::size_t subcarriers, double subcarrier_spacing_hz,
                                double avg_snr_db, std::uint64_t seed);

/// gamma_m = |h_m|^2 / sigma^2.
SinrVector compute_sinrs(const ChannelRealization& channel);

} // namespace feplab

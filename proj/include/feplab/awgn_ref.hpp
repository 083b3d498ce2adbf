#pragma once

#include "feplab/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace feplab {

class EventSource;

/// Frame error probability versus SNR on a flat channel for one
/// configuration. After construction `fep` is non-increasing in SNR.
struct AwgnCurve {
    std::size_t config_id = 1;
    double code_rate = 0.0;
    std::vector<double> grid_snr_db;
    std::vector<double> fep;
    std::size_t frames_per_point = 0;

    void validate() const;
    bool operator==(const AwgnCurve&) const = default;
};

/// Pool-adjacent-violators projection onto non-increasing sequences
/// (equal weights).
std::vector<double> isotonic_nonincreasing(std::span<const double> values);

/// grid from `start` to `stop` inclusive in `step` increments.
std::vector<double> snr_grid(double start_db, double stop_db, double step_db);

/// Monte Carlo curve: at each grid point simulate `frames_per_point` frames of
/// `cfg` over a flat channel (gamma_m = SNR for every m), then project onto
/// non-increasing sequences.
AwgnCurve build_awgn_curve(const LinkConfig& cfg, std::span<const double> grid_snr_db, std::size_t frames_per_point,
                           const EventSource& source, std::uint64_t seed);

inline constexpr double kCurveProbabilityFloor = 1e-6;

/// Interpolates logit(fep) linearly in dB between bracketing knots, with fep
/// clamped to [1e-6, 1 - 1e-6]. Queries outside the grid clamp to the end
/// values.
double lookup_fep(const AwgnCurve& curve, double effective_sinr_linear);

// `#awgncurve v1 k=<id> rate=<R>` header, then `snr_db fep` per line.
void write_curve(std::ostream& out, const AwgnCurve& curve);
void write_curve(const std::filesystem::path& path, const AwgnCurve& curve);
AwgnCurve read_curve(std::istream& in, const std::string& source_name = "<stream>");
AwgnCurve read_curve(const std::filesystem::path& path);

} // namespace feplab

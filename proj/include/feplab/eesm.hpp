#pragma once

#include "feplab/awgn_ref.hpp"
#include "feplab/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace feplab {

/// `standard`: g = -beta ln(mean exp(-gamma_m / beta)), pessimistic and
/// dominated by weak subcarriers. `as_printed`: g = beta ln(mean exp(gamma_m / beta)).
enum class EesmSign { kStandard, kAsPrinted };

EesmSign parse_eesm_sign(const std::string& text);
std::string to_string(EesmSign sign);

/// Exponential effective SINR (linear units). Evaluated around min(gamma)
/// (or max for the printed sign) so large gamma / beta never overflows.
double eesm_compress(const SinrVector& sinr, double beta, EesmSign sign = EesmSign::kStandard);
double eesm_compress(std::span<const double> sinr_linear, double beta, EesmSign sign = EesmSign::kStandard);

class EesmPredictor {
public:
    EesmPredictor() = default;
    EesmPredictor(std::vector<double> betas, std::vector<AwgnCurve> curves, EesmSign sign = EesmSign::kStandard);

    std::size_t size() const { return betas_.size(); }
    double beta(std::size_t config_id) const { return betas_.at(config_id - 1); }
    const AwgnCurve& curve(std::size_t config_id) const { return curves_.at(config_id - 1); }
    EesmSign sign() const { return sign_; }

    double predict(std::size_t config_id, const SinrVector& sinr) const;
    std::vector<double> predict_all(const SinrVector& sinr) const;

private:
    std::vector<double> betas_;
    std::vector<AwgnCurve> curves_;
    EesmSign sign_ = EesmSign::kStandard;
};

double predict_fep_eesm(const EesmPredictor& predictor, std::size_t config_id, const SinrVector& sinr);

/// One labelled training point for calibrating a single configuration.
struct LabelledSinr {
    const SinrVector* sinr;
    int event;
};

/// Extracts the observed (sinr, e_k) pairs for one configuration.
std::vector<LabelledSinr> observations_for(const Dataset& dataset, std::size_t config_id);

struct BetaSearch {
    double beta_min = 0.05;
    double beta_max = 200.0;
    std::size_t grid_points = 40;
    std::size_t refine_iterations = 40;

    std::vector<double> grid() const; // log-spaced, ascending
};

struct CalibrationResult {
    double beta = 0.0;
    double objective = 0.0;
    std::vector<double> grid;
    std::vector<double> grid_objective;
};

/// Sum over samples of (lookup_fep(curve, g_beta(gamma)) - e)^2.
double calibration_objective(std::span<const LabelledSinr> samples, const AwgnCurve& curve, double beta,
                             EesmSign sign = EesmSign::kStandard);

/// Coarse log-spaced grid followed by golden-section refinement (in log beta)
/// on the interval bracketing the best grid point. Ties resolve toward the
/// smaller beta. Throws DataError on an empty sample.
CalibrationResult calibrate_beta(std::span<const LabelledSinr> samples, const AwgnCurve& curve,
                                 const BetaSearch& search = {}, EesmSign sign = EesmSign::kStandard);

// `#eesm v1` header, then `k beta` lines.
void write_eesm(std::ostream& out, std::span<const double> betas);
void write_eesm(const std::filesystem::path& path, std::span<const double> betas);
std::vector<double> read_eesm(std::istream& in, const std::string& source_name = "<stream>");
std::vector<double> read_eesm(const std::filesystem::path& path);

} // namespace feplab

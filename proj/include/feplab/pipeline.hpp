#pragma once
// Experiment stages. Each command reads its inputs from and writes its
// outputs to the configured output directory:
//
//   generate   train.fepds, test/snr_XX.fepds
//   curves     curves/awgn_k<k>.txt, curves/manifest.txt
//   calibrate  eesm.txt, calibration.csv (builds missing curves)
//   train      model.txt, train_log.csv
//   evaluate   rmse.csv, throughput.csv, decisions.csv
//
// Every stage also writes config.json so a run directory is self-describing.

#include "feplab/awgn_ref.hpp"
#include "feplab/core.hpp"
#include "feplab/eesm.hpp"
#include "feplab/experiment.hpp"
#include "feplab/neural.hpp"
#include "feplab/oracle.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace feplab {

class EventSource;
class FadingChannel;

/// One frame per index: channel drawn at `fixed_snr_db` (or at an SNR drawn
/// uniformly from the sweep range), SINRs canonicalised, then one event per
/// configuration on the shared channel with independent per-k seeds.
Dataset generate_frames(const ExperimentConfig& config, const FadingChannel& channel, const EventSource& source,
                        std::size_t count, std::uint64_t seed, std::optional<double> fixed_snr_db = std::nullopt);

/// Reference FEP of every configuration for one stored channel state.
using ReferenceFep = std::function<std::vector<double>(const SinrVector& sinr, std::uint64_t seed)>;

/// The oracle's analytic FEP when the source knows it, otherwise a Monte Carlo
/// estimate with `experiment.reference_trials` runs per configuration.
ReferenceFep make_reference(const ExperimentConfig& config, const EventSource& source);

struct SweepPoint {
    double avg_snr_db = 0.0;
    std::size_t frames = 0;
    double rmse_eesm = 0.0;
    double rmse_nn = 0.0;
    double tput_eesm = 0.0;
    double tput_nn = 0.0;
    double tput_genie = 0.0;
};

struct DecisionRow {
    std::size_t frame = 0;
    double avg_snr_db = 0.0;
    std::size_t k_eesm = 1;
    std::size_t k_nn = 1;
    std::size_t k_genie = 1; // 1 when every configuration failed
    double tput_eesm = 0.0;
    double tput_nn = 0.0;
    double tput_genie = 0.0;
};

struct EvaluationResult {
    std::vector<SweepPoint> points;
    std::vector<DecisionRow> decisions;
};

/// Scores two predictors on per-SNR test sets: RMSE over all (frame, k)
/// pairs against the reference, and realized throughput of the
/// rate-selection policies next to the Genie.
EvaluationResult evaluate_sets(std::span<const Dataset> test_sets, std::span<const double> sweep_snrs_db,
                               const FepPredictor& eesm, const FepPredictor& nn, const ReferenceFep& reference,
                               std::uint64_t seed);

struct Paths {
    std::filesystem::path root;
    std::filesystem::path train() const { return root / "train.fepds"; }
    std::filesystem::path test_dir() const { return root / "test"; }
    std::filesystem::path test(std::size_t index) const;
    std::filesystem::path curves_dir() const { return root / "curves"; }
    std::filesystem::path curve(std::size_t config_id) const;
    std::filesystem::path eesm() const { return root / "eesm.txt"; }
    std::filesystem::path calibration() const { return root / "calibration.csv"; }
    std::filesystem::path model() const { return root / "model.txt"; }
    std::filesystem::path train_log() const { return root / "train_log.csv"; }
    std::filesystem::path rmse() const { return root / "rmse.csv"; }
    std::filesystem::path throughput() const { return root / "throughput.csv"; }
    std::filesystem::path decisions() const { return root / "decisions.csv"; }
    std::filesystem::path config() const { return root / "config.json"; }
};

void cmd_generate(const ExperimentConfig& config);
std::vector<AwgnCurve> cmd_curves(const ExperimentConfig& config);
std::vector<double> cmd_calibrate(const ExperimentConfig& config);
TrainResult cmd_train(const ExperimentConfig& config);
EvaluationResult cmd_evaluate(const ExperimentConfig& config);
/// Pretty-prints the CSVs present in the output directory.
void cmd_report(const ExperimentConfig& config, std::ostream& out);

/// generate, curves, calibrate, train, evaluate in order.
EvaluationResult run_pipeline(const ExperimentConfig& config);

extern const std::vector<std::string> kRmseHeader;
extern const std::vector<std::string> kThroughputHeader;
extern const std::vector<std::string> kDecisionsHeader;
extern const std::vector<std::string> kTrainLogHeader;

} // namespace feplab

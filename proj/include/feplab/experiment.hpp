#pragma once
// Declarative experiment configuration. One JSON document whose sections
// mirror the modules; any key can be overridden with `section.key=value`.

#include "feplab/channel.hpp"
#include "feplab/core.hpp"
#include "feplab/eesm.hpp"
#include "feplab/neural.hpp"
#include "feplab/oracle.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace feplab {

class EventSource;

enum class SourceKind { kLink, kOracle };
SourceKind parse_source(const std::string& text);
std::string to_string(SourceKind source);

struct ChannelSection {
    std::string profile = "EPA";
    std::vector<double> delays_ns;
    std::vector<double> powers_db;
    double subcarrier_spacing_hz = 140625.0; // 64 subcarriers across 9 MHz
};

struct LinkSection {
    std::size_t subcarriers = 64;
    std::size_t frame_symbols = 4;
    std::size_t modulation_order = 2;
    std::vector<double> rates{0.04, 0.08, 0.12, 0.16, 0.20, 0.24, 0.28, 0.32};
    std::string codec = "conv_k7_r13";
    std::uint64_t interleaver_seed = 0;
};

struct SweepSection {
    double snr_min_db = -10.0;
    double snr_max_db = 20.0;
    std::size_t snr_points = 10;
    std::size_t frames_per_rate = 20000; // training records, each carries all K events
    std::size_t test_frames_per_snr = 1000;
    std::size_t reference_trials = 200;
};

struct AwgnSection {
    double grid_min_db = -16.0;
    double grid_max_db = 14.0;
    double grid_step_db = 0.5;
    std::size_t frames_per_point = 2000;
};

struct EesmSection {
    EesmSign sign = EesmSign::kStandard;
    BetaSearch search;
};

struct NeuralSection {
    std::vector<std::size_t> hidden{60, 10, 60};
    Activation activation = Activation::kRelu;
    InputNormalizer normalizer;
    TrainConfig train;
};

struct OracleSection {
    OracleFamily family = OracleFamily::kOutFamily;
    double beta = 2.0;
    double slope = 1.2;
    double first_midpoint_db = 0.0;
    double midpoint_step_db = kOracleMidpointStepDb;
    double w_min = 0.0;
    double w_mean = 1.0;
    double w_spread = 1.5;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    SourceKind source = SourceKind::kOracle;
    std::filesystem::path out_dir = "out";
    ChannelSection channel;
    LinkSection link;
    SweepSection experiment;
    AwgnSection awgn;
    EesmSection eesm;
    NeuralSection neural;
    OracleSection oracle;

    /// Throws ConfigError on empty ranges, bad sizes or unknown names.
    void validate() const;

    ConfigSet config_set() const;
    TapProfile tap_profile() const;
    OracleSpec oracle_spec() const;
    std::vector<std::size_t> layer_dims() const;
    std::vector<double> awgn_grid() const;
    /// Sweep points min + i (max - min) / count, i = 0..count-1.
    std::vector<double> sweep_snrs_db() const;
    std::unique_ptr<EventSource> make_event_source() const;
};

/// Independent seeds for the stochastic stages, all derived from the
/// top-level seed.
enum class Stage : std::uint64_t {
    kTrainFrames = 0x7261696e,
    kTestFrames = 0x74657374,
    kCurves = 0x63757276,
    kNetwork = 0x6e657477,
    kReference = 0x72656665,
};
std::uint64_t stage_seed(const ExperimentConfig& config, Stage stage);

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

/// Applies `dotted.key=value` to a config document. The value is parsed as
/// JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

} // namespace feplab

#pragma once

// Fully connected FEP predictor. Input: ascending per-subcarrier SINRs in dB,
// affinely normalised. Output: K sigmoid units read as frame error
// probabilities. Training minimises the masked mean Bernoulli cross entropy
// against observed ACK/NACK events, i.e. maximum-likelihood estimation of the
// network parameters.

#include "feplab/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace feplab {

enum class Activation { kRelu, kIdentity };

Activation parse_activation(const std::string& text);
std::string to_string(Activation activation);

struct InputNormalizer {
    double offset_db = 5.0;
    double scale_db = 15.0;

    double apply(double db) const { return (db - offset_db) / scale_db; }
    bool operator==(const InputNormalizer&) const = default;
};

class MlpModel {
public:
    MlpModel() = default;
    /// All parameters zero. layer_dims = (M, hidden..., K), at least two entries.
    MlpModel(std::vector<std::size_t> layer_dims, Activation hidden = Activation::kRelu, InputNormalizer normalizer = {});

    /// He initialisation: weights ~ N(0, 2 / fan_in), biases zero.
    static MlpModel he_initialized(std::vector<std::size_t> layer_dims, std::uint64_t seed,
                                   Activation hidden = Activation::kRelu, InputNormalizer normalizer = {});

    const std::vector<std::size_t>& layer_dims() const { return dims_; }
    std::size_t input_size() const { return dims_.front(); }
    std::size_t output_size() const { return dims_.back(); }
    std::size_t layer_count() const { return dims_.size() - 1; }
    Activation hidden_activation() const { return hidden_; }
    const InputNormalizer& normalizer() const { return normalizer_; }

    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }
    /// Row-major (out x in) weight block of layer l (0-based).
    std::span<double> weights(std::size_t l);
    std::span<const double> weights(std::size_t l) const;
    std::span<double> biases(std::size_t l);
    std::span<const double> biases(std::size_t l) const;
    std::size_t weight_offset(std::size_t l) const { return offsets_[l]; }
    std::size_t bias_offset(std::size_t l) const { return offsets_[l] + dims_[l + 1] * dims_[l]; }

    /// Sorted, dB-converted, normalised network input for a channel state.
    std::vector<double> input_features(const SinrVector& sinr) const;
    std::vector<double> forward_features(std::span<const double> features) const;
    /// Predicted FEP for every configuration. Throws std::invalid_argument on
    /// a length mismatch.
    std::vector<double> forward(const SinrVector& sinr) const;

    /// Parameters rounded to float32 (the precision of the model file).
    MlpModel quantized() const;
    bool all_finite() const;

    bool operator==(const MlpModel&) const = default;

private:
    std::vector<std::size_t> dims_;
    Activation hidden_ = Activation::kRelu;
    InputNormalizer normalizer_;
    std::vector<double> params_;
    std::vector<std::size_t> offsets_;
};

std::vector<double> mlp_forward(const MlpModel& model, const SinrVector& sinr);

/// A frame prepared for the network: normalised input and its event mask.
struct TrainingExample {
    std::vector<double> input;
    std::vector<std::int8_t> events;
};

std::vector<TrainingExample> make_examples(const MlpModel& model, std::span<const FrameObservation> records);

struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient; // same layout as MlpModel::parameters()
};

/// Mean over frames of (1/K_obs) sum over observed k of bernoulli_nll, and
/// its exact gradient by backpropagation (ReLU derivative 0 at 0).
LossGradient loss_and_gradients(const MlpModel& model, std::span<const TrainingExample> batch);
LossGradient loss_and_gradients(const MlpModel& model, std::span<const FrameObservation> batch);
double batch_loss(const MlpModel& model, std::span<const TrainingExample> batch);

/// max over parameters of |analytic - numeric| / max(1e-8, |analytic| + |numeric|),
/// numeric from a fourth-order central difference with step `epsilon`.
double grad_check(const MlpModel& model, std::span<const TrainingExample> batch, double epsilon = 1e-6);

struct TrainConfig {
    std::size_t batch_size = 64;
    double step_size = 1e-3;
    std::size_t max_epochs = 200;
    std::size_t patience = 5;
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;
    std::string optimizer = "adam";
    double moment_decay = 0.9;
    double second_moment_decay = 0.999;
    double adam_epsilon = 1e-8;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_ce = 0.0;
    double validation_ce = 0.0;
};

struct TrainResult {
    MlpModel model; // best-validation snapshot, float32-quantised
    std::vector<EpochRecord> log;
    std::size_t best_epoch = 0;
    double best_validation_ce = 0.0;
};

/// Mini-batch Adam with per-epoch validation and early stopping. Fully
/// determined by `config.seed`. Throws NumericError naming the epoch if the
/// loss becomes non-finite.
TrainResult train(const MlpModel& initial, const Dataset& dataset, const TrainConfig& config);

void write_model(std::ostream& out, const MlpModel& model);
void write_model(const std::filesystem::path& path, const MlpModel& model);
MlpModel read_model(std::istream& in, const std::string& source_name = "<stream>");
MlpModel read_model(const std::filesystem::path& path);

void write_training_log(const std::filesystem::path& path, std::span<const EpochRecord> log);

} // namespace feplab

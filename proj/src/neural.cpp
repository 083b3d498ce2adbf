#include "feplab/neural.hpp"

#include "storage_format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

namespace feplab {

namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kSplitStream = 0x5b17;
constexpr std::uint64_t kShuffleStream = 0x5f1e;
constexpr int kModelDigits = 9;

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

using ExampleRefs = std::vector<const TrainingExample*>;

ExampleRefs refs_of(std::span<const TrainingExample> batch) {
    ExampleRefs out(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) out[i] = &batch[i];
    return out;
}

// Per-layer pre-activations z[l] and activations a[l] (a[0] is the input).
struct Trace {
    std::vector<std::vector<double>> z;
    std::vector<std::vector<double>> a;
};

void run_forward(const MlpModel& model, std::span<const double> input, Trace& trace) {
    const auto& dims = model.layer_dims();
    const std::size_t layers = model.layer_count();
    trace.z.resize(layers);
    trace.a.resize(layers + 1);
    trace.a[0].assign(input.begin(), input.end());
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = dims[l];
        const std::size_t out = dims[l + 1];
        const auto w = model.weights(l);
        const auto b = model.biases(l);
        const auto& prev = trace.a[l];
        auto& z = trace.z[l];
        auto& a = trace.a[l + 1];
        z.resize(out);
        a.resize(out);
        const bool last = l + 1 == layers;
        for (std::size_t i = 0; i < out; ++i) {
            const double* row = w.data() + i * in;
            double acc = b[i];
            for (std::size_t j = 0; j < in; ++j) acc += row[j] * prev[j];
            z[i] = acc;
            if (last) {
                a[i] = sigmoid(acc);
            } else if (model.hidden_activation() == Activation::kRelu) {
                a[i] = acc > 0.0 ? acc : 0.0;
            } else {
                a[i] = acc;
            }
        }
    }
}

double example_loss(const std::vector<double>& predicted, const std::vector<std::int8_t>& events) {
    double acc = 0.0;
    std::size_t observed = 0;
    for (std::size_t k = 0; k < events.size(); ++k) {
        if (events[k] == kUnobserved) continue;
        acc += bernoulli_nll(events[k], predicted[k]);
        ++observed;
    }
    return observed == 0 ? 0.0 : acc / static_cast<double>(observed);
}

LossGradient loss_and_gradients_refs(const MlpModel& model, const ExampleRefs& batch) {
    if (batch.empty()) throw std::invalid_argument("loss_and_gradients: empty batch");
    LossGradient out;
    out.gradient.assign(model.parameters().size(), 0.0);
    const auto& dims = model.layer_dims();
    const std::size_t layers = model.layer_count();
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    Trace trace;
    std::vector<double> delta;
    std::vector<double> delta_prev;
    for (const TrainingExample* ex : batch) {
        if (ex->input.size() != model.input_size() || ex->events.size() != model.output_size()) {
            throw std::invalid_argument("loss_and_gradients: example does not match model dimensions");
        }
        run_forward(model, ex->input, trace);
        const auto& rho = trace.a[layers];
        out.loss += example_loss(rho, ex->events) * inv_batch;

        std::size_t observed = 0;
        for (auto e : ex->events) observed += e != kUnobserved;
        if (observed == 0) continue;
        const double scale = inv_batch / static_cast<double>(observed);
        delta.assign(model.output_size(), 0.0);
        for (std::size_t k = 0; k < delta.size(); ++k) {
            if (ex->events[k] != kUnobserved) delta[k] = (rho[k] - static_cast<double>(ex->events[k])) * scale;
        }
        for (std::size_t l = layers; l-- > 0;) {
            const std::size_t in = dims[l];
            const std::size_t outd = dims[l + 1];
            double* gw = out.gradient.data() + model.weight_offset(l);
            double* gb = out.gradient.data() + model.bias_offset(l);
            const auto& prev = trace.a[l];
            for (std::size_t i = 0; i < outd; ++i) {
                const double d = delta[i];
                if (d == 0.0) continue;
                gb[i] += d;
                double* row = gw + i * in;
                for (std::size_t j = 0; j < in; ++j) row[j] += d * prev[j];
            }
            if (l == 0) break;
            const auto w = model.weights(l);
            delta_prev.assign(in, 0.0);
            for (std::size_t i = 0; i < outd; ++i) {
                const double d = delta[i];
                if (d == 0.0) continue;
                const double* row = w.data() + i * in;
                for (std::size_t j = 0; j < in; ++j) delta_prev[j] += row[j] * d;
            }
            if (model.hidden_activation() == Activation::kRelu) {
                const auto& z = trace.z[l - 1];
                for (std::size_t j = 0; j < in; ++j) {
                    if (!(z[j] > 0.0)) delta_prev[j] = 0.0;
                }
            }
            delta.swap(delta_prev);
        }
    }
    return out;
}

double batch_loss_refs(const MlpModel& model, const ExampleRefs& batch) {
    if (batch.empty()) return 0.0;
    Trace trace;
    double acc = 0.0;
    for (const TrainingExample* ex : batch) {
        run_forward(model, ex->input, trace);
        acc += example_loss(trace.a[model.layer_count()], ex->events);
    }
    return acc / static_cast<double>(batch.size());
}

} // namespace

Activation parse_activation(const std::string& text) {
    if (text == "relu") return Activation::kRelu;
    if (text == "identity") return Activation::kIdentity;
    throw ConfigError("activation must be 'relu' or 'identity', got '" + text + "'");
}

std::string to_string(Activation activation) { return activation == Activation::kRelu ? "relu" : "identity"; }

// ---------------------------------------------------------------------------

MlpModel::MlpModel(std::vector<std::size_t> layer_dims, Activation hidden, InputNormalizer normalizer)
    : dims_(std::move(layer_dims)), hidden_(hidden), normalizer_(normalizer) {
    if (dims_.size() < 2) throw ConfigError("mlp: need at least input and output dimensions");
    if (std::any_of(dims_.begin(), dims_.end(), [](std::size_t d) { return d == 0; })) {
        throw ConfigError("mlp: layer dimensions must be positive");
    }
    if (!(normalizer_.scale_db != 0.0) || !std::isfinite(normalizer_.scale_db) || !std::isfinite(normalizer_.offset_db)) {
        throw ConfigError("mlp: invalid input normaliser");
    }
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        offsets_.push_back(total);
        total += dims_[l + 1] * dims_[l] + dims_[l + 1];
    }
    params_.assign(total, 0.0);
}

MlpModel MlpModel::he_initialized(std::vector<std::size_t> layer_dims, std::uint64_t seed, Activation hidden,
                                  InputNormalizer normalizer) {
    MlpModel model(std::move(layer_dims), hidden, normalizer);
    Rng rng(derive_seed(seed, kInitStream));
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / static_cast<double>(model.dims_[l])));
        for (double& w : model.weights(l)) w = gauss(rng);
    }
    return model;
}

std::span<double> MlpModel::weights(std::size_t l) {
    return std::span<double>(params_).subspan(offsets_[l], dims_[l + 1] * dims_[l]);
}
std::span<const double> MlpModel::weights(std::size_t l) const {
    return std::span<const double>(params_).subspan(offsets_[l], dims_[l + 1] * dims_[l]);
}
std::span<double> MlpModel::biases(std::size_t l) {
    return std::span<double>(params_).subspan(bias_offset(l), dims_[l + 1]);
}
std::span<const double> MlpModel::biases(std::size_t l) const {
    return std::span<const double>(params_).subspan(bias_offset(l), dims_[l + 1]);
}

std::vector<double> MlpModel::input_features(const SinrVector& sinr) const {
    if (sinr.size() != input_size()) {
        throw std::invalid_argument("mlp: SINR length " + std::to_string(sinr.size()) + " != input dimension " +
                                    std::to_string(input_size()));
    }
    auto db = sort_sinrs(sinr).db();
    for (double& x : db) x = normalizer_.apply(x);
    return db;
}

std::vector<double> MlpModel::forward_features(std::span<const double> features) const {
    if (features.size() != input_size()) throw std::invalid_argument("mlp: feature length != input dimension");
    Trace trace;
    run_forward(*this, features, trace);
    return trace.a.back();
}

std::vector<double> MlpModel::forward(const SinrVector& sinr) const { return forward_features(input_features(sinr)); }

MlpModel MlpModel::quantized() const {
    MlpModel out = *this;
    for (double& p : out.params_) p = static_cast<double>(static_cast<float>(p));
    return out;
}

bool MlpModel::all_finite() const {
    return std::all_of(params_.begin(), params_.end(), [](double p) { return std::isfinite(p); });
}

std::vector<double> mlp_forward(const MlpModel& model, const SinrVector& sinr) { return model.forward(sinr); }

// ---------------------------------------------------------------------------

std::vector<TrainingExample> make_examples(const MlpModel& model, std::span<const FrameObservation> records) {
    std::vector<TrainingExample> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (r.events.size() != model.output_size()) throw DataError("record event count != model outputs");
        out.push_back({model.input_features(r.sinr), r.events});
    }
    return out;
}

LossGradient loss_and_gradients(const MlpModel& model, std::span<const TrainingExample> batch) {
    return loss_and_gradients_refs(model, refs_of(batch));
}

LossGradient loss_and_gradients(const MlpModel& model, std::span<const FrameObservation> batch) {
    const auto examples = make_examples(model, batch);
    return loss_and_gradients(model, examples);
}

double batch_loss(const MlpModel& model, std::span<const TrainingExample> batch) {
    return batch_loss_refs(model, refs_of(batch));
}

double grad_check(const MlpModel& model, std::span<const TrainingExample> batch, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("grad_check: epsilon must be positive");
    const auto analytic = loss_and_gradients(model, batch).gradient;
    MlpModel probe = model;
    auto params = probe.parameters();
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        auto at = [&](double offset) {
            params[i] = saved + offset;
            return batch_loss(probe, batch);
        };
        // Fourth-order central stencil, grouped so a parameter the loss does
        // not depend on yields exactly zero.
        const double near = at(epsilon) - at(-epsilon);
        const double far = at(2.0 * epsilon) - at(-2.0 * epsilon);
        params[i] = saved;
        const double numeric = (8.0 * near - far) / (12.0 * epsilon);
        const double denom = std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (!(step_size > 0.0)) throw ConfigError("train: step_size must be > 0");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw ConfigError("train: validation_fraction must lie in (0, 1)");
    }
    if (optimizer != "adam") throw ConfigError("train: unsupported optimizer '" + optimizer + "'");
    if (!(moment_decay >= 0.0 && moment_decay < 1.0) || !(second_moment_decay >= 0.0 && second_moment_decay < 1.0)) {
        throw ConfigError("train: moment decays must lie in [0, 1)");
    }
}

TrainResult train(const MlpModel& initial, const Dataset& dataset, const TrainConfig& config) {
    config.validate();
    if (dataset.config_set.subcarriers() != initial.input_size()) {
        throw DataError("train: dataset M = " + std::to_string(dataset.config_set.subcarriers()) +
                        " does not match model input " + std::to_string(initial.input_size()));
    }
    if (dataset.config_set.size() != initial.output_size()) {
        throw DataError("train: dataset K does not match model outputs");
    }
    if (dataset.size() < 2) throw DataError("train: need at least two records");

    const auto examples = make_examples(initial, dataset.records);
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    {
        Rng rng(derive_seed(config.seed, kSplitStream));
        std::shuffle(order.begin(), order.end(), rng);
    }
    auto n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(order.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, order.size() - 1);
    ExampleRefs validation;
    ExampleRefs training;
    for (std::size_t i = 0; i < order.size(); ++i) (i < n_val ? validation : training).push_back(&examples[order[i]]);

    MlpModel model = initial;
    auto params = model.parameters();
    std::vector<double> m1(params.size(), 0.0);
    std::vector<double> m2(params.size(), 0.0);
    std::size_t step = 0;

    TrainResult result;
    result.model = model.quantized();
    result.best_validation_ce = batch_loss_refs(model, validation);
    std::size_t stale = 0;
    ExampleRefs batch;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        Rng rng(derive_seed(config.seed, kShuffleStream, epoch));
        std::shuffle(training.begin(), training.end(), rng);
        double train_acc = 0.0;
        for (std::size_t start = 0; start < training.size(); start += config.batch_size) {
            const std::size_t stop = std::min(training.size(), start + config.batch_size);
            batch.assign(training.begin() + static_cast<std::ptrdiff_t>(start),
                         training.begin() + static_cast<std::ptrdiff_t>(stop));
            const auto lg = loss_and_gradients_refs(model, batch);
            if (!std::isfinite(lg.loss)) {
                throw NumericError("training diverged (non-finite loss) at epoch " + std::to_string(epoch));
            }
            train_acc += lg.loss * static_cast<double>(batch.size());
            ++step;
            const double c1 = 1.0 - std::pow(config.moment_decay, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(config.second_moment_decay, static_cast<double>(step));
            for (std::size_t i = 0; i < params.size(); ++i) {
                const double g = lg.gradient[i];
                m1[i] = config.moment_decay * m1[i] + (1.0 - config.moment_decay) * g;
                m2[i] = config.second_moment_decay * m2[i] + (1.0 - config.second_moment_decay) * g * g;
                params[i] -= config.step_size * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + config.adam_epsilon);
            }
        }
        const double train_ce = train_acc / static_cast<double>(training.size());
        const double val_ce = batch_loss_refs(model, validation);
        if (!std::isfinite(train_ce) || !std::isfinite(val_ce) || !model.all_finite()) {
            throw NumericError("training diverged (non-finite loss) at epoch " + std::to_string(epoch));
        }
        result.log.push_back({epoch, train_ce, val_ce});
        if (val_ce < result.best_validation_ce) {
            result.best_validation_ce = val_ce;
            result.best_epoch = epoch;
            result.model = model.quantized();
            stale = 0;
        } else if (++stale >= config.patience) {
            break;
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

void write_model(std::ostream& out, const MlpModel& model) {
    out << "#mlp v1\nlayer_dims";
    for (auto d : model.layer_dims()) out << ' ' << d;
    out << "\nhidden_activation " << to_string(model.hidden_activation()) << "\noutput_activation sigmoid\n";
    out << "normalizer " << detail::format_shortest(model.normalizer().offset_db) << ' '
        << detail::format_shortest(model.normalizer().scale_db) << '\n';
    const auto& dims = model.layer_dims();
    auto emit = [&](double v) { return detail::format_significant(static_cast<float>(v), kModelDigits); };
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        out << "weights " << (l + 1) << ' ' << dims[l + 1] << ' ' << dims[l] << '\n';
        const auto w = model.weights(l);
        for (std::size_t i = 0; i < dims[l + 1]; ++i) {
            for (std::size_t j = 0; j < dims[l]; ++j) out << (j ? " " : "") << emit(w[i * dims[l] + j]);
            out << '\n';
        }
        out << "bias " << (l + 1) << ' ' << dims[l + 1] << '\n';
        const auto b = model.biases(l);
        for (std::size_t i = 0; i < b.size(); ++i) out << (i ? " " : "") << emit(b[i]);
        out << '\n';
    }
}

void write_model(const std::filesystem::path& path, const MlpModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    write_model(out, model);
}

MlpModel read_model(std::istream& in, const std::string& source) {
    std::size_t line_no = 0;
    std::string line;
    auto next_tokens = [&]() {
        while (std::getline(in, line)) {
            ++line_no;
            auto t = detail::split_ws(line);
            if (!t.empty()) return t;
        }
        throw DataError(source + ": unexpected end of model file");
    };
    auto fail = [&](const std::string& what) -> MlpModel {
        throw DataError(source + ":" + std::to_string(line_no) + ": " + what);
    };

    auto t = next_tokens();
    if (t.size() != 2 || t[0] != "#mlp" || t[1] != "v1") return fail("expected '#mlp v1'");
    t = next_tokens();
    if (t.size() < 3 || t[0] != "layer_dims") return fail("expected layer_dims");
    std::vector<std::size_t> dims;
    for (std::size_t i = 1; i < t.size(); ++i) {
        auto d = detail::parse_number<std::size_t>(t[i]);
        if (!d) return fail("bad layer dimension");
        dims.push_back(*d);
    }
    t = next_tokens();
    if (t.size() != 2 || t[0] != "hidden_activation") return fail("expected hidden_activation");
    Activation hidden;
    try {
        hidden = parse_activation(std::string(t[1]));
    } catch (const ConfigError& e) {
        return fail(e.what());
    }
    t = next_tokens();
    if (t.size() != 2 || t[0] != "output_activation" || t[1] != "sigmoid") return fail("output activation must be sigmoid");
    t = next_tokens();
    if (t.size() != 3 || t[0] != "normalizer") return fail("expected normalizer");
    auto offset = detail::parse_number<double>(t[1]);
    auto scale = detail::parse_number<double>(t[2]);
    if (!offset || !scale) return fail("bad normalizer constants");

    MlpModel model;
    try {
        model = MlpModel(dims, hidden, InputNormalizer{*offset, *scale});
    } catch (const ConfigError& e) {
        return fail(e.what());
    }
    auto read_values = [&](std::span<double> dst, std::size_t per_line) {
        std::size_t filled = 0;
        while (filled < dst.size()) {
            auto row = next_tokens();
            if (row.size() != per_line) fail("expected " + std::to_string(per_line) + " values per line");
            for (auto tok : row) {
                auto v = detail::parse_number<float>(tok);
                if (!v || !std::isfinite(*v)) fail("bad parameter value");
                dst[filled++] = static_cast<double>(*v);
            }
        }
    };
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        t = next_tokens();
        if (t.size() != 4 || t[0] != "weights" || detail::parse_number<std::size_t>(t[1]) != l + 1 ||
            detail::parse_number<std::size_t>(t[2]) != dims[l + 1] || detail::parse_number<std::size_t>(t[3]) != dims[l]) {
            return fail("expected 'weights " + std::to_string(l + 1) + " " + std::to_string(dims[l + 1]) + " " +
                        std::to_string(dims[l]) + "'");
        }
        read_values(model.weights(l), dims[l]);
        t = next_tokens();
        if (t.size() != 3 || t[0] != "bias" || detail::parse_number<std::size_t>(t[1]) != l + 1 ||
            detail::parse_number<std::size_t>(t[2]) != dims[l + 1]) {
            return fail("expected 'bias " + std::to_string(l + 1) + " " + std::to_string(dims[l + 1]) + "'");
        }
        read_values(model.biases(l), dims[l + 1]);
    }
    return model;
}

MlpModel read_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model " + path.string());
    return read_model(in, path.string());
}

void write_training_log(const std::filesystem::path& path, std::span<const EpochRecord> log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "epoch,train_ce,validation_ce\n";
    for (const auto& r : log) {
        out << r.epoch << ',' << detail::format_significant(r.train_ce, 9) << ','
            << detail::format_significant(r.validation_ce, 9) << '\n';
    }
}

} // namespace feplab

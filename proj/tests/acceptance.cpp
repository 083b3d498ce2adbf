// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Run from a scratch directory: pipeline runs
// are written under ./acceptance_runs.

#include "feplab/awgn_ref.hpp"
#include "feplab/channel.hpp"
#include "feplab/codec.hpp"
#include "feplab/dataset_io.hpp"
#include "feplab/eesm.hpp"
#include "feplab/events.hpp"
#include "feplab/experiment.hpp"
#include "feplab/link.hpp"
#include "feplab/neural.hpp"
#include "feplab/oracle.hpp"
#include "feplab/pipeline.hpp"

#include "helpers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace feplab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), format, args...);
    return buf;
}

fs::path run_root() { return fs::current_path() / "acceptance_runs"; }

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = run_root() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<SinrVector> test_states(const ExperimentConfig& config) {
    const Paths paths{config.out_dir};
    std::vector<SinrVector> states;
    for (std::size_t i = 0; i < config.experiment.snr_points; ++i) {
        for (auto& r : read_dataset(paths.test(i)).records) states.push_back(std::move(r.sinr));
    }
    return states;
}

// --- 1 ---------------------------------------------------------------------

Outcome gradient_check() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto model = MlpModel::he_initialized({8, 5, 3}, derive_seed(seed, 1));
        std::vector<FrameObservation> records;
        for (std::uint64_t n = 0; n < 16; ++n) {
            FrameObservation r;
            r.sinr = testutil::random_sinrs(8, derive_seed(seed, 2, n));
            Rng rng(derive_seed(seed, 3, n));
            for (int k = 0; k < 3; ++k) r.events.push_back(static_cast<std::int8_t>(rng() % 3) - 1);
            if (r.observed_count() == 0) r.events[0] = 1;
            records.push_back(std::move(r));
        }
        worst = std::max(worst, grad_check(model, make_examples(model, records)));
    }
    return {worst <= 1e-5, fmt("worst relative error %.3g over 10 seeds", worst)};
}

// --- 2, 3 ------------------------------------------------------------------

ExperimentConfig in_family_config() {
    ExperimentConfig c;
    c.source = SourceKind::kOracle;
    c.oracle.family = OracleFamily::kInFamily;
    c.out_dir = fresh_dir("in_family");
    return c;
}

Outcome eesm_recovery(const ExperimentConfig& config) {
    cmd_generate(config);
    cmd_curves(config);
    const auto betas = cmd_calibrate(config);
    double worst = 0.0;
    std::string list;
    for (double b : betas) {
        worst = std::max(worst, std::abs(b / config.oracle.beta - 1.0));
        list += fmt(" %.3f", b);
    }
    return {worst <= 0.15, fmt("N=%zu betas%s, worst deviation %.1f%%", config.experiment.frames_per_rate,
                               list.c_str(), 100.0 * worst)};
}

Outcome ml_consistency(const ExperimentConfig& config) {
    const auto trained = cmd_train(config);
    const auto states = test_states(config);
    const auto spec = config.oracle_spec();
    const FepPredictor nn = [&](const SinrVector& s) { return trained.model.forward(s); };
    const double ce = expected_cross_entropy(nn, spec, states);
    const double h = oracle_entropy(spec, states);
    const auto kl = kl_to_oracle(nn, spec, states);

    // Cross entropy against the sampled labels of the test sets, for reference.
    double sampled = 0.0;
    std::size_t count = 0;
    const Paths paths{config.out_dir};
    for (std::size_t i = 0; i < config.experiment.snr_points; ++i) {
        for (const auto& r : read_dataset(paths.test(i)).records) {
            const auto p = trained.model.forward(r.sinr);
            for (std::size_t k = 0; k < p.size(); ++k) {
                if (!r.observed(k)) continue;
                sampled += bernoulli_nll(r.events[k], p[k]);
                ++count;
            }
        }
    }
    sampled /= static_cast<double>(count);

    const double gap = ce - h;
    return {gap <= 0.02 && kl.average <= 0.02,
            fmt("CE %.4f - H %.4f = %.4f nats, KL %.4f nats, sampled-label CE %.4f, best epoch %zu", ce, h, gap,
                kl.average, sampled, trained.best_epoch)};
}

// --- 4, 5 ------------------------------------------------------------------

ExperimentConfig out_family_config() {
    ExperimentConfig c;
    c.source = SourceKind::kOracle;
    c.oracle.family = OracleFamily::kOutFamily;
    c.out_dir = fresh_dir("out_family");
    return c;
}

// Realized throughput takes one Bernoulli draw per frame, and below 0 dB the
// expected gap between the policies is a fraction of a bit. The trained
// predictors are therefore scored a second time on a large fresh test set,
// point by point, without writing it to disk.
constexpr std::size_t kLargeFramesPerSnr = 100000;

std::vector<SweepPoint> large_sample_points(const ExperimentConfig& config) {
    const Paths paths{config.out_dir};
    const ConfigSet set = config.config_set();
    std::vector<AwgnCurve> curves;
    for (const auto& cfg : set.configs()) curves.push_back(read_curve(paths.curve(cfg.config_id)));
    const EesmPredictor eesm(read_eesm(paths.eesm()), curves, config.eesm.sign);
    const MlpModel model = read_model(paths.model());
    const FepPredictor eesm_fn = [&eesm](const SinrVector& s) { return eesm.predict_all(s); };
    const FepPredictor nn_fn = [&model](const SinrVector& s) { return model.forward(s); };

    const auto source = config.make_event_source();
    const FadingChannel channel(config.tap_profile(), config.link.subcarriers, config.channel.subcarrier_spacing_hz);
    const auto reference = make_reference(config, *source);
    const std::uint64_t seed = derive_seed(stage_seed(config, Stage::kTestFrames), 0x6c61726765);
    std::vector<SweepPoint> points;
    const auto snrs = config.sweep_snrs_db();
    for (std::size_t i = 0; i < snrs.size(); ++i) {
        const Dataset ds = generate_frames(config, channel, *source, kLargeFramesPerSnr, derive_seed(seed, i), snrs[i]);
        const auto r = evaluate_sets(std::span(&ds, 1), std::span(&snrs[i], 1), eesm_fn, nn_fn, reference, seed);
        points.push_back(r.points.front());
    }
    return points;
}

Outcome rmse_trend(const EvaluationResult& r) {
    double eesm = 0.0, nn = 0.0;
    for (const auto& p : r.points) {
        eesm += p.rmse_eesm;
        nn += p.rmse_nn;
    }
    eesm /= static_cast<double>(r.points.size());
    nn /= static_cast<double>(r.points.size());
    return {nn <= 0.9 * eesm, fmt("mean RMSE nn %.4f, eesm %.4f, ratio %.3f", nn, eesm, nn / eesm)};
}

struct Ordering {
    std::size_t ordered = 0;
    bool genie_bound = true;
};

Ordering throughput_ordering(std::span<const SweepPoint> points) {
    Ordering o;
    for (const auto& p : points) {
        if (p.tput_genie >= p.tput_nn && p.tput_nn >= p.tput_eesm) ++o.ordered;
        o.genie_bound = o.genie_bound && p.tput_genie >= p.tput_nn && p.tput_genie >= p.tput_eesm;
    }
    return o;
}

Outcome throughput_trend(const EvaluationResult& protocol, std::span<const SweepPoint> large) {
    const Ordering small = throughput_ordering(protocol.points);
    const Ordering big = throughput_ordering(large);
    std::string misses;
    for (const auto& p : large) {
        if (p.tput_nn < p.tput_eesm) misses += fmt(" %gdB(%.4f<%.4f)", p.avg_snr_db, p.tput_nn, p.tput_eesm);
    }
    return {big.ordered >= 8 && big.genie_bound && small.genie_bound,
            fmt("ordering at %zu/%zu points with %zu frames/point (%zu/%zu at %zu), nn<eesm at%s; genie bound %s",
                big.ordered, large.size(), kLargeFramesPerSnr, small.ordered, protocol.points.size(),
                protocol.points.empty() ? 0 : protocol.points.front().frames, misses.empty() ? " none" : misses.c_str(),
                big.genie_bound && small.genie_bound ? "everywhere" : "violated")};
}

// --- 6 ---------------------------------------------------------------------

Outcome link_physics() {
    std::string notes;
    bool ok = true;

    // Uncoded QPSK: symbol SINR gamma = 2 gamma_b.
    constexpr std::size_t kBits = 100000;
    for (double gb_db : {2.0, 4.0, 6.0}) {
        const double gb = db_to_linear(gb_db);
        const double expect = testutil::q_function(std::sqrt(2.0 * gb));
        const double ber =
            static_cast<double>(count_uncoded_bit_errors(2.0 * gb, kBits, derive_seed(0xbe7, gb_db * 10))) / kBits;
        const double sigma = std::sqrt(expect * (1.0 - expect) / kBits);
        const bool pass = std::abs(ber - expect) <= 3.0 * sigma;
        ok = ok && pass;
        notes += fmt("BER@%gdB %.5f/%.5f%s ", gb_db, ber, expect, pass ? "" : "!");
    }

    const ExperimentConfig defaults;
    const ConfigSet set = defaults.config_set();
    const ConvolutionalCodec codec;
    constexpr std::size_t kTrials = 2000;
    auto noise = [](double a, double b) {
        return 3.0 * std::sqrt((a * (1.0 - a) + b * (1.0 - b)) / kTrials) + 1e-12;
    };

    // FEP over SNR on a flat channel, every rate.
    std::size_t snr_violations = 0;
    for (const auto& cfg : set.configs()) {
        double prev = 1.0;
        for (double snr : {-2.0, 0.0, 2.0, 4.0}) {
            const auto ch = ChannelRealization::flat(cfg.subcarriers, snr);
            const double fep =
                estimate_fep_mc(cfg, ch, codec, kTrials, derive_seed(0x5e, cfg.config_id, snr + 100)).fep;
            if (fep > prev + noise(fep, prev)) ++snr_violations;
            prev = fep;
        }
    }
    ok = ok && snr_violations == 0;
    notes += fmt("snr-monotone violations %zu, ", snr_violations);

    // FEP over rate on fixed fading channels.
    std::size_t rate_violations = 0;
    std::string profile;
    for (std::uint64_t c = 0; c < 6; ++c) {
        const double snr = -4.0 + 4.0 * static_cast<double>(c % 3);
        const auto ch = draw_channel(defaults.tap_profile(), defaults.link.subcarriers,
                                     defaults.channel.subcarrier_spacing_hz, snr, derive_seed(0xfade, c));
        double prev = 0.0;
        for (const auto& cfg : set.configs()) {
            const double fep = estimate_fep_mc(cfg, ch, codec, kTrials, derive_seed(0x7a, cfg.config_id, c)).fep;
            if (fep < prev - noise(fep, prev)) ++rate_violations;
            prev = fep;
            if (c == 1) profile += fmt("%.2f ", fep);
        }
    }
    ok = ok && rate_violations == 0;
    notes += fmt("rate-monotone violations %zu (0 dB: %s), ", rate_violations, profile.c_str());

    // Noiseless link.
    std::size_t noiseless_errors = 0;
    for (std::uint64_t n = 0; n < 1000; ++n) {
        auto ch = draw_channel(defaults.tap_profile(), defaults.link.subcarriers,
                               defaults.channel.subcarrier_spacing_hz, 0.0, derive_seed(0x9c, n));
        ch.noise_variance = 0.0;
        const auto& cfg = set[n % set.size()];
        noiseless_errors += simulate_frame(cfg, ch, codec, 0, derive_seed(0x9d, n));
    }
    ok = ok && noiseless_errors == 0;
    notes += fmt("noiseless errors %zu/1000", noiseless_errors);
    return {ok, notes};
}

// --- 7 ---------------------------------------------------------------------

std::map<fs::path, std::string> snapshot(const fs::path& root) {
    std::map<fs::path, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        files[fs::relative(entry.path(), root)] = std::string(std::istreambuf_iterator<char>(in), {});
    }
    return files;
}

ExperimentConfig small_config(SourceKind source, const fs::path& dir) {
    ExperimentConfig c;
    c.seed = 2024;
    c.source = source;
    c.out_dir = dir;
    c.experiment.frames_per_rate = source == SourceKind::kLink ? 300 : 3000;
    c.experiment.test_frames_per_snr = source == SourceKind::kLink ? 20 : 200;
    c.experiment.reference_trials = 10;
    c.awgn.frames_per_point = source == SourceKind::kLink ? 20 : 200;
    c.neural.train.max_epochs = 5;
    return c;
}

Outcome determinism() {
    std::string notes;
    bool ok = true;
    for (SourceKind source : {SourceKind::kOracle, SourceKind::kLink}) {
        const std::string name = to_string(source);
        std::map<fs::path, std::string> runs[2];
        for (int i = 0; i < 2; ++i) {
            const auto config = small_config(source, fresh_dir("determinism_" + name + "_" + std::to_string(i)));
            run_pipeline(config);
            runs[i] = snapshot(config.out_dir);
        }
        std::size_t differing = 0;
        for (const auto& [path, bytes] : runs[0]) {
            const auto it = runs[1].find(path);
            if (it == runs[1].end() || it->second != bytes) ++differing;
        }
        const bool same = differing == 0 && runs[0].size() == runs[1].size() && runs[0].size() >= 10;
        ok = ok && same;
        notes += fmt("%s: %zu files, %zu differ; ", name.c_str(), runs[0].size(), differing);
    }
    return {ok, notes};
}

// --- 8 ---------------------------------------------------------------------

Outcome round_trips() {
    bool ok = true;
    std::string notes;

    bool interleave = true;
    for (std::size_t len : {1u, 7u, 96u, 512u, 1000u}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Interleaver il(len, seed);
            std::vector<double> x(len);
            std::iota(x.begin(), x.end(), 0.5);
            const auto y = il.interleave<double>(x);
            interleave = interleave && il.deinterleave<double>(y) == x;
        }
    }
    ok = ok && interleave;
    notes += fmt("interleaver %s, ", interleave ? "ok" : "FAILED");

    bool pattern = true;
    for (std::size_t len : {3u, 57u, 100u}) {
        Bits coded(len);
        Rng rng(len);
        for (auto& b : coded) b = static_cast<std::uint8_t>(rng() & 1u);
        for (std::size_t target : {len, len + 1, 3 * len + 5, 512 * len / 57}) {
            const auto r = rate_match(coded, target);
            pattern = pattern && r.size() == target;
            for (std::size_t i = 0; i < r.size() && pattern; ++i) pattern = r[i] == coded[i % len];
        }
    }
    ok = ok && pattern;
    notes += fmt("rate-match %s, ", pattern ? "ok" : "FAILED");

    const ExperimentConfig defaults;
    const OracleEventSource oracle(defaults.oracle_spec());
    const FadingChannel channel(defaults.tap_profile(), defaults.link.subcarriers, defaults.channel.subcarrier_spacing_hz);
    Dataset data = generate_frames(defaults, channel, oracle, 500, 99);
    for (std::size_t n = 0; n < data.size(); n += 7) data.records[n].events[n % data.config_set.size()] = kUnobserved;
    std::stringstream ds;
    write_dataset(ds, data);
    const bool dataset = read_dataset(ds) == data;
    ok = ok && dataset;
    notes += fmt("dataset %s, ", dataset ? "ok" : "FAILED");

    const auto model = MlpModel::he_initialized(defaults.layer_dims(), 5).quantized();
    std::stringstream ms;
    write_model(ms, model);
    const bool model_ok = read_model(ms) == model;
    ok = ok && model_ok;
    notes += fmt("model %s", model_ok ? "ok" : "FAILED");
    return {ok, notes};
}

// ---------------------------------------------------------------------------

int failures = 0;

void report(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
    const auto start = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double t = seconds_since(start);
    const bool in_time = limit_s <= 0.0 || t <= limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("criterion %d %-22s %s  (%.1f s%s) %s\n", id, name.c_str(), pass ? "PASS" : "FAIL", t,
                in_time ? "" : ", over time limit", o.detail.c_str());
    std::fflush(stdout);
}

} // namespace

int main() {
    report(1, "gradient-check", 10.0, gradient_check);

    const ExperimentConfig in_family = in_family_config();
    report(3, "eesm-recovery", 120.0, [&] { return eesm_recovery(in_family); });
    report(2, "ml-consistency", 300.0, [&] { return ml_consistency(in_family); });

    const ExperimentConfig out_config = out_family_config();
    EvaluationResult out_family;
    const auto start = Clock::now();
    std::string run_error;
    try {
        out_family = run_pipeline(out_config);
    } catch (const std::exception& e) {
        run_error = e.what();
    }
    const double run_s = seconds_since(start);
    report(4, "rmse-trend", 0.0, [&] {
        if (!run_error.empty()) return Outcome{false, "pipeline failed: " + run_error};
        Outcome o = rmse_trend(out_family);
        o.pass = o.pass && run_s <= 600.0;
        o.detail += fmt(" [pipeline %.1f s]", run_s);
        return o;
    });
    report(5, "throughput-trend", 600.0, [&] {
        if (!run_error.empty()) return Outcome{false, "pipeline failed: " + run_error};
        return throughput_trend(out_family, large_sample_points(out_config));
    });

    report(6, "link-physics", 300.0, link_physics);
    report(7, "determinism", 0.0, determinism);
    report(8, "round-trips", 0.0, round_trips);

    std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}

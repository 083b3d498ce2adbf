#include "feplab/pipeline.hpp"

#include "feplab/channel.hpp"
#include "feplab/csv.hpp"
#include "feplab/dataset_io.hpp"
#include "feplab/events.hpp"
#include "feplab/selection.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace feplab {

namespace fs = std::filesystem;

const std::vector<std::string> kRmseHeader{"avg_snr_db", "rmse_eesm", "rmse_nn", "frames"};
const std::vector<std::string> kThroughputHeader{"avg_snr_db", "tput_eesm", "tput_nn", "tput_genie"};
const std::vector<std::string> kDecisionsHeader{"n",       "avg_snr_db", "k_eesm",  "k_nn",
                                                "k_genie", "tput_eesm",  "tput_nn", "tput_genie"};
const std::vector<std::string> kTrainLogHeader{"epoch", "train_ce", "validation_ce"};

namespace {

constexpr std::uint64_t kSnrStream = 0x736e72;
constexpr std::uint64_t kChannelStream = 0x6368616e;

double unit_uniform(std::uint64_t seed) {
    Rng rng(seed);
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

void save_run_config(const ExperimentConfig& config) {
    ensure_dir(config.out_dir);
    auto doc = to_json(config);
    doc.erase("out_dir"); // keeps run directories comparable byte for byte
    const fs::path path = Paths{config.out_dir}.config();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << '\n';
}

Dataset load_matching(const fs::path& path, const ConfigSet& expected, const char* hint) {
    if (!fs::exists(path)) throw DataError("missing " + path.string() + " (run '" + hint + "' first)");
    Dataset ds = read_dataset(path);
    if (ds.config_set.subcarriers() != expected.subcarriers()) {
        throw DataError(path.string() + ": dataset has M = " + std::to_string(ds.config_set.subcarriers()) +
                        ", config has M = " + std::to_string(expected.subcarriers()));
    }
    if (!(ds.config_set == expected)) throw DataError(path.string() + ": configuration set differs from config");
    return ds;
}

bool curve_matches(const AwgnCurve& curve, const LinkConfig& cfg, const std::vector<double>& grid) {
    return curve.config_id == cfg.config_id && curve.code_rate == cfg.code_rate && curve.grid_snr_db == grid;
}

std::vector<AwgnCurve> load_or_build_curves(const ExperimentConfig& config, bool rebuild) {
    const Paths paths{config.out_dir};
    const ConfigSet set = config.config_set();
    const auto grid = config.awgn_grid();
    ensure_dir(paths.curves_dir());
    std::unique_ptr<EventSource> source;
    std::vector<AwgnCurve> curves;
    for (const auto& cfg : set.configs()) {
        const fs::path path = paths.curve(cfg.config_id);
        if (!rebuild && fs::exists(path)) {
            AwgnCurve c = read_curve(path);
            if (curve_matches(c, cfg, grid)) {
                curves.push_back(std::move(c));
                continue;
            }
        }
        if (!source) source = config.make_event_source();
        curves.push_back(build_awgn_curve(cfg, grid, config.awgn.frames_per_point, *source,
                                          stage_seed(config, Stage::kCurves)));
        write_curve(path, curves.back());
    }
    std::ofstream manifest(paths.curves_dir() / "manifest.txt", std::ios::binary);
    if (!manifest) throw DataError("cannot write " + (paths.curves_dir() / "manifest.txt").string());
    manifest << "# k rate file source=" << to_string(config.source) << '\n';
    for (const auto& c : curves) {
        manifest << c.config_id << ' ' << c.code_rate << ' ' << paths.curve(c.config_id).filename().string() << '\n';
    }
    return curves;
}

std::vector<AwgnCurve> load_curves(const ExperimentConfig& config) {
    const Paths paths{config.out_dir};
    const ConfigSet set = config.config_set();
    std::vector<AwgnCurve> curves;
    for (const auto& cfg : set.configs()) {
        const fs::path path = paths.curve(cfg.config_id);
        if (!fs::exists(path)) throw DataError("missing " + path.string() + " (run 'curves' or 'calibrate' first)");
        curves.push_back(read_curve(path));
        if (curves.back().config_id != cfg.config_id) throw DataError(path.string() + ": wrong configuration id");
    }
    return curves;
}

std::vector<std::size_t> column_widths(const CsvTable& table, const std::vector<std::vector<std::string>>& cells) {
    std::vector<std::size_t> w;
    for (const auto& h : table.header) w.push_back(h.size());
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) w[i] = std::max(w[i], row[i].size());
    }
    return w;
}

void print_table(std::ostream& out, const std::string& title, const CsvTable& table) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : table.rows) {
        std::vector<std::string> r;
        for (double v : row) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.6g", v);
            r.emplace_back(buf);
        }
        cells.push_back(std::move(r));
    }
    const auto w = column_widths(table, cells);
    out << title << '\n';
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        out << (i ? "  " : "") << std::setw(static_cast<int>(w[i])) << table.header[i];
    }
    out << '\n';
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "  " : "") << std::setw(static_cast<int>(w[i])) << row[i];
        out << '\n';
    }
    out << '\n';
}

} // namespace

fs::path Paths::test(std::size_t index) const {
    char name[32];
    std::snprintf(name, sizeof(name), "snr_%02zu.fepds", index);
    return test_dir() / name;
}

fs::path Paths::curve(std::size_t config_id) const {
    return curves_dir() / ("awgn_k" + std::to_string(config_id) + ".txt");
}

Dataset generate_frames(const ExperimentConfig& config, const FadingChannel& channel, const EventSource& source,
                        std::size_t count, std::uint64_t seed, std::optional<double> fixed_snr_db) {
    Dataset ds;
    ds.config_set = config.config_set();
    ds.records.reserve(count);
    const double lo = config.experiment.snr_min_db;
    const double hi = config.experiment.snr_max_db;
    for (std::size_t n = 0; n < count; ++n) {
        FrameObservation rec;
        rec.seed = derive_seed(seed, n);
        rec.avg_snr_db = fixed_snr_db ? *fixed_snr_db : lo + (hi - lo) * unit_uniform(derive_seed(rec.seed, kSnrStream));
        const auto h = channel.draw(rec.avg_snr_db, derive_seed(rec.seed, kChannelStream));
        rec.sinr = compute_sinrs(h).storage_canonical();
        rec.events.resize(ds.config_set.size());
        for (const auto& cfg : ds.config_set.configs()) {
            rec.events[cfg.config_id - 1] =
                static_cast<std::int8_t>(source.frame_event(cfg, rec.sinr, derive_seed(rec.seed, cfg.config_id)));
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

ReferenceFep make_reference(const ExperimentConfig& config, const EventSource& source) {
    const ConfigSet set = config.config_set();
    const std::size_t trials = config.experiment.reference_trials;
    return [set, trials, &source](const SinrVector& sinr, std::uint64_t seed) {
        std::vector<double> out(set.size());
        for (const auto& cfg : set.configs()) {
            if (auto exact = source.true_fep(cfg, sinr)) {
                out[cfg.config_id - 1] = *exact;
                continue;
            }
            std::size_t errors = 0;
            for (std::size_t r = 0; r < trials; ++r) {
                errors += static_cast<std::size_t>(source.frame_event(cfg, sinr, derive_seed(seed, cfg.config_id, r)));
            }
            out[cfg.config_id - 1] = static_cast<double>(errors) / static_cast<double>(trials);
        }
        return out;
    };
}

EvaluationResult evaluate_sets(std::span<const Dataset> test_sets, std::span<const double> sweep_snrs_db,
                               const FepPredictor& eesm, const FepPredictor& nn, const ReferenceFep& reference,
                               std::uint64_t seed) {
    if (test_sets.size() != sweep_snrs_db.size()) throw DataError("evaluate: one test set per sweep point required");
    EvaluationResult result;
    for (std::size_t i = 0; i < test_sets.size(); ++i) {
        const Dataset& ds = test_sets[i];
        if (ds.records.empty()) throw DataError("evaluate: test set " + std::to_string(i) + " is empty");
        const auto payload = ds.config_set.payload_bits();
        std::vector<double> pred_e, pred_n, ref;
        std::vector<PolicyDecision> dec_e, dec_n;
        std::vector<std::vector<std::int8_t>> events;
        for (std::size_t n = 0; n < ds.records.size(); ++n) {
            const auto& rec = ds.records[n];
            const auto pe = eesm(rec.sinr);
            const auto pn = nn(rec.sinr);
            const auto rho = reference(rec.sinr, derive_seed(seed, i, n));
            if (pe.size() != payload.size() || pn.size() != payload.size() || rho.size() != payload.size()) {
                throw DataError("evaluate: predictor output size != K");
            }
            pred_e.insert(pred_e.end(), pe.begin(), pe.end());
            pred_n.insert(pred_n.end(), pn.begin(), pn.end());
            ref.insert(ref.end(), rho.begin(), rho.end());

            const std::size_t ke = select_rate(pe, payload);
            const std::size_t kn = select_rate(pn, payload);
            const std::size_t kg = genie_choice(rec.events, payload);
            dec_e.push_back({n, ke, pe, payload[ke - 1], rec.events[ke - 1]});
            dec_n.push_back({n, kn, pn, payload[kn - 1], rec.events[kn - 1]});
            events.push_back(rec.events);

            DecisionRow row;
            row.frame = n;
            row.avg_snr_db = sweep_snrs_db[i];
            row.k_eesm = ke;
            row.k_nn = kn;
            row.k_genie = kg == 0 ? 1 : kg;
            row.tput_eesm = rec.events[ke - 1] == 0 ? payload[ke - 1] : 0.0;
            row.tput_nn = rec.events[kn - 1] == 0 ? payload[kn - 1] : 0.0;
            row.tput_genie = kg == 0 ? 0.0 : payload[kg - 1];
            result.decisions.push_back(row);
        }
        SweepPoint p;
        p.avg_snr_db = sweep_snrs_db[i];
        p.frames = ds.records.size();
        p.rmse_eesm = rmse(pred_e, ref);
        p.rmse_nn = rmse(pred_n, ref);
        p.tput_eesm = realized_throughput(dec_e);
        p.tput_nn = realized_throughput(dec_n);
        p.tput_genie = genie_throughput(events, payload);
        result.points.push_back(p);
    }
    return result;
}

void cmd_generate(const ExperimentConfig& config) {
    const Paths paths{config.out_dir};
    save_run_config(config);
    ensure_dir(paths.test_dir());
    const auto source = config.make_event_source();
    const FadingChannel channel(config.tap_profile(), config.link.subcarriers, config.channel.subcarrier_spacing_hz);

    write_dataset(paths.train(), generate_frames(config, channel, *source, config.experiment.frames_per_rate,
                                                 stage_seed(config, Stage::kTrainFrames)));
    const auto snrs = config.sweep_snrs_db();
    for (std::size_t i = 0; i < snrs.size(); ++i) {
        write_dataset(paths.test(i), generate_frames(config, channel, *source, config.experiment.test_frames_per_snr,
                                                     derive_seed(stage_seed(config, Stage::kTestFrames), i), snrs[i]));
    }
}

std::vector<AwgnCurve> cmd_curves(const ExperimentConfig& config) {
    save_run_config(config);
    return load_or_build_curves(config, true);
}

std::vector<double> cmd_calibrate(const ExperimentConfig& config) {
    const Paths paths{config.out_dir};
    save_run_config(config);
    const ConfigSet set = config.config_set();
    const Dataset train = load_matching(paths.train(), set, "generate");
    const auto curves = load_or_build_curves(config, false);
    std::vector<double> betas;
    CsvTable table{{"k", "beta", "objective", "samples"}, {}};
    for (const auto& cfg : set.configs()) {
        const auto samples = observations_for(train, cfg.config_id);
        const auto fit = calibrate_beta(samples, curves[cfg.config_id - 1], config.eesm.search, config.eesm.sign);
        betas.push_back(fit.beta);
        table.rows.push_back({static_cast<double>(cfg.config_id), fit.beta, fit.objective,
                              static_cast<double>(samples.size())});
    }
    write_eesm(paths.eesm(), betas);
    write_csv(paths.calibration(), table);
    return betas;
}

TrainResult cmd_train(const ExperimentConfig& config) {
    const Paths paths{config.out_dir};
    save_run_config(config);
    const Dataset train_set = load_matching(paths.train(), config.config_set(), "generate");
    const std::uint64_t seed = stage_seed(config, Stage::kNetwork);
    const MlpModel initial = MlpModel::he_initialized(config.layer_dims(), derive_seed(seed, 1),
                                                      config.neural.activation, config.neural.normalizer);
    TrainConfig tc = config.neural.train;
    tc.seed = derive_seed(seed, 2);
    TrainResult result = train(initial, train_set, tc);
    write_model(paths.model(), result.model);
    write_training_log(paths.train_log(), result.log);
    return result;
}

EvaluationResult cmd_evaluate(const ExperimentConfig& config) {
    const Paths paths{config.out_dir};
    save_run_config(config);
    const ConfigSet set = config.config_set();

    if (!fs::exists(paths.eesm())) throw DataError("missing " + paths.eesm().string() + " (run 'calibrate' first)");
    if (!fs::exists(paths.model())) throw DataError("missing " + paths.model().string() + " (run 'train' first)");
    const EesmPredictor eesm(read_eesm(paths.eesm()), load_curves(config), config.eesm.sign);
    if (eesm.size() != set.size()) throw DataError(paths.eesm().string() + ": expected " + std::to_string(set.size()) + " betas");
    const MlpModel model = read_model(paths.model());
    if (model.input_size() != set.subcarriers()) {
        throw DataError(paths.model().string() + ": model input M = " + std::to_string(model.input_size()) +
                        ", config has M = " + std::to_string(set.subcarriers()));
    }
    if (model.output_size() != set.size()) throw DataError(paths.model().string() + ": model outputs != K");

    const auto snrs = config.sweep_snrs_db();
    std::vector<Dataset> tests;
    for (std::size_t i = 0; i < snrs.size(); ++i) tests.push_back(load_matching(paths.test(i), set, "generate"));

    const auto source = config.make_event_source();
    const FepPredictor eesm_fn = [&eesm](const SinrVector& s) { return eesm.predict_all(s); };
    const FepPredictor nn_fn = [&model](const SinrVector& s) { return model.forward(s); };
    const auto result =
        evaluate_sets(tests, snrs, eesm_fn, nn_fn, make_reference(config, *source), stage_seed(config, Stage::kReference));

    CsvTable rmse_table{kRmseHeader, {}};
    CsvTable tput_table{kThroughputHeader, {}};
    for (const auto& p : result.points) {
        rmse_table.rows.push_back({p.avg_snr_db, p.rmse_eesm, p.rmse_nn, static_cast<double>(p.frames)});
        tput_table.rows.push_back({p.avg_snr_db, p.tput_eesm, p.tput_nn, p.tput_genie});
    }
    CsvTable dec_table{kDecisionsHeader, {}};
    for (const auto& d : result.decisions) {
        dec_table.rows.push_back({static_cast<double>(d.frame), d.avg_snr_db, static_cast<double>(d.k_eesm),
                                  static_cast<double>(d.k_nn), static_cast<double>(d.k_genie), d.tput_eesm, d.tput_nn,
                                  d.tput_genie});
    }
    write_csv(paths.rmse(), rmse_table);
    write_csv(paths.throughput(), tput_table);
    write_csv(paths.decisions(), dec_table);
    return result;
}

void cmd_report(const ExperimentConfig& config, std::ostream& out) {
    const Paths paths{config.out_dir};
    const std::vector<std::pair<fs::path, const std::vector<std::string>*>> files{
        {paths.train_log(), &kTrainLogHeader},
        {paths.rmse(), &kRmseHeader},
        {paths.throughput(), &kThroughputHeader},
    };
    bool any = false;
    for (const auto& [path, header] : files) {
        if (!fs::exists(path)) continue;
        print_table(out, path.filename().string(), read_csv(path, *header));
        any = true;
    }
    if (!any) throw DataError("no CSV results in " + config.out_dir.string() + " (run 'evaluate' first)");
}

EvaluationResult run_pipeline(const ExperimentConfig& config) {
    cmd_generate(config);
    cmd_curves(config);
    cmd_calibrate(config);
    cmd_train(config);
    return cmd_evaluate(config);
}

} // namespace feplab

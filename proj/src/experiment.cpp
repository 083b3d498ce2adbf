#include "feplab/experiment.hpp"

#include "feplab/awgn_ref.hpp"
#include "feplab/codec.hpp"
#include "feplab/events.hpp"

#include <cmath>
#include <fstream>

namespace feplab {

using nlohmann::json;

SourceKind parse_source(const std::string& text) {
    if (text == "link") return SourceKind::kLink;
    if (text == "oracle") return SourceKind::kOracle;
    throw ConfigError("source must be 'link' or 'oracle', got '" + text + "'");
}

std::string to_string(SourceKind source) { return source == SourceKind::kLink ? "link" : "oracle"; }

void ExperimentConfig::validate() const {
    (void)config_set();
    (void)tap_profile();
    if (!(channel.subcarrier_spacing_hz > 0.0)) throw ConfigError("channel.subcarrier_spacing_hz must be positive");
    (void)make_codec(link.codec);
    if (!(experiment.snr_max_db > experiment.snr_min_db)) throw ConfigError("experiment: snr_max_db must exceed snr_min_db");
    if (experiment.snr_points == 0) throw ConfigError("experiment.snr_points must be positive");
    if (experiment.reference_trials == 0) throw ConfigError("experiment.reference_trials must be positive");
    (void)awgn_grid();
    if (awgn.frames_per_point == 0) throw ConfigError("awgn.frames_per_point must be positive");
    if (!(eesm.search.beta_min > 0.0) || !(eesm.search.beta_max > eesm.search.beta_min) ||
        eesm.search.grid_points < 2) {
        throw ConfigError("eesm: need 0 < beta_min < beta_max and at least two grid points");
    }
    for (std::size_t h : neural.hidden) {
        if (h == 0) throw ConfigError("neural.hidden: layer widths must be positive");
    }
    if (!(neural.normalizer.scale_db != 0.0)) throw ConfigError("neural.normalizer.scale_db must be non-zero");
    neural.train.validate();
    oracle_spec().validate();
}

ConfigSet ExperimentConfig::config_set() const {
    return ConfigSet(link.subcarriers, link.frame_symbols, link.modulation_order, link.rates);
}

TapProfile ExperimentConfig::tap_profile() const {
    if (channel.delays_ns.empty() && channel.powers_db.empty()) {
        if (channel.profile == "EPA") return epa_profile();
        throw ConfigError("channel: unknown profile '" + channel.profile + "' without explicit taps");
    }
    return TapProfile(channel.profile, channel.delays_ns, channel.powers_db);
}

OracleSpec ExperimentConfig::oracle_spec() const {
    OracleSpec spec;
    spec.family = oracle.family;
    for (std::size_t k = 0; k < link.rates.size(); ++k) {
        OracleTerm t;
        t.beta = oracle.beta;
        t.slope = oracle.slope;
        t.midpoint_db = oracle.first_midpoint_db + oracle.midpoint_step_db * static_cast<double>(k);
        t.w_min = oracle.w_min;
        t.w_mean = oracle.w_mean;
        t.w_spread = oracle.w_spread;
        spec.terms.push_back(t);
    }
    return spec;
}

std::vector<std::size_t> ExperimentConfig::layer_dims() const {
    std::vector<std::size_t> dims{link.subcarriers};
    dims.insert(dims.end(), neural.hidden.begin(), neural.hidden.end());
    dims.push_back(link.rates.size());
    return dims;
}

std::vector<double> ExperimentConfig::awgn_grid() const {
    return snr_grid(awgn.grid_min_db, awgn.grid_max_db, awgn.grid_step_db);
}

std::vector<double> ExperimentConfig::sweep_snrs_db() const {
    std::vector<double> out;
    const double step = (experiment.snr_max_db - experiment.snr_min_db) / static_cast<double>(experiment.snr_points);
    for (std::size_t i = 0; i < experiment.snr_points; ++i) {
        out.push_back(experiment.snr_min_db + static_cast<double>(i) * step);
    }
    return out;
}

std::unique_ptr<EventSource> ExperimentConfig::make_event_source() const {
    if (source == SourceKind::kLink) {
        return std::make_unique<LinkEventSource>(make_codec(link.codec), link.interleaver_seed);
    }
    return std::make_unique<OracleEventSource>(oracle_spec());
}

std::uint64_t stage_seed(const ExperimentConfig& config, Stage stage) {
    return derive_seed(config.seed, static_cast<std::uint64_t>(stage));
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["source"] = to_string(c.source);
    j["out_dir"] = c.out_dir.string();
    j["channel"] = {{"profile", c.channel.profile},
                    {"delays_ns", c.channel.delays_ns},
                    {"powers_db", c.channel.powers_db},
                    {"subcarrier_spacing_hz", c.channel.subcarrier_spacing_hz}};
    j["link"] = {{"subcarriers", c.link.subcarriers},
                 {"frame_symbols", c.link.frame_symbols},
                 {"modulation_order", c.link.modulation_order},
                 {"rates", c.link.rates},
                 {"codec", c.link.codec},
                 {"interleaver_seed", c.link.interleaver_seed}};
    j["experiment"] = {{"snr_min_db", c.experiment.snr_min_db},
                       {"snr_max_db", c.experiment.snr_max_db},
                       {"snr_points", c.experiment.snr_points},
                       {"frames_per_rate", c.experiment.frames_per_rate},
                       {"test_frames_per_snr", c.experiment.test_frames_per_snr},
                       {"reference_trials", c.experiment.reference_trials}};
    j["awgn"] = {{"grid_min_db", c.awgn.grid_min_db},
                 {"grid_max_db", c.awgn.grid_max_db},
                 {"grid_step_db", c.awgn.grid_step_db},
                 {"frames_per_point", c.awgn.frames_per_point}};
    j["eesm"] = {{"sign", to_string(c.eesm.sign)},
                 {"beta_min", c.eesm.search.beta_min},
                 {"beta_max", c.eesm.search.beta_max},
                 {"grid_points", c.eesm.search.grid_points},
                 {"refine_iterations", c.eesm.search.refine_iterations}};
    const auto& t = c.neural.train;
    j["neural"] = {{"hidden", c.neural.hidden},
                   {"activation", to_string(c.neural.activation)},
                   {"input_offset_db", c.neural.normalizer.offset_db},
                   {"input_scale_db", c.neural.normalizer.scale_db},
                   {"batch_size", t.batch_size},
                   {"step_size", t.step_size},
                   {"max_epochs", t.max_epochs},
                   {"patience", t.patience},
                   {"validation_fraction", t.validation_fraction},
                   {"optimizer", t.optimizer},
                   {"moment_decay", t.moment_decay},
                   {"second_moment_decay", t.second_moment_decay},
                   {"adam_epsilon", t.adam_epsilon}};
    j["oracle"] = {{"family", to_string(c.oracle.family)},
                   {"beta", c.oracle.beta},
                   {"slope", c.oracle.slope},
                   {"first_midpoint_db", c.oracle.first_midpoint_db},
                   {"midpoint_step_db", c.oracle.midpoint_step_db},
                   {"w_min", c.oracle.w_min},
                   {"w_mean", c.oracle.w_mean},
                   {"w_spread", c.oracle.w_spread}};
    return j;
}

namespace {

void reject_unknown(const json& doc, const json& schema, const std::string& prefix) {
    if (!doc.is_object()) throw ConfigError("config: '" + (prefix.empty() ? "<root>" : prefix) + "' must be an object");
    for (const auto& [key, value] : doc.items()) {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        if (!schema.contains(key)) throw ConfigError("config: unknown key '" + path + "'");
        if (schema.at(key).is_object()) reject_unknown(value, schema.at(key), path);
    }
}

template <typename T>
void read(const json& section, const char* key, T& target, const std::string& path) {
    if (!section.contains(key)) return;
    const json& v = section.at(key);
    if constexpr (std::is_unsigned_v<T>) {
        if (!v.is_number_unsigned()) throw ConfigError("config: '" + path + "." + key + "' must be a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError("config: '" + path + "." + key + "' must be a number");
    }
    try {
        v.get_to(target);
    } catch (const json::exception& e) {
        throw ConfigError("config: '" + path + "." + key + "': " + e.what());
    }
}

const json& section(const json& doc, const char* name) {
    static const json empty = json::object();
    return doc.contains(name) ? doc.at(name) : empty;
}

} // namespace

ExperimentConfig config_from_json(const json& doc) {
    ExperimentConfig c;
    reject_unknown(doc, to_json(c), "");
    std::string text;

    read(doc, "seed", c.seed, "");
    if (doc.contains("source")) {
        read(doc, "source", text, "");
        c.source = parse_source(text);
    }
    if (doc.contains("out_dir")) {
        read(doc, "out_dir", text, "");
        c.out_dir = text;
    }

    const json& ch = section(doc, "channel");
    read(ch, "profile", c.channel.profile, "channel");
    read(ch, "delays_ns", c.channel.delays_ns, "channel");
    read(ch, "powers_db", c.channel.powers_db, "channel");
    read(ch, "subcarrier_spacing_hz", c.channel.subcarrier_spacing_hz, "channel");

    const json& ln = section(doc, "link");
    read(ln, "subcarriers", c.link.subcarriers, "link");
    read(ln, "frame_symbols", c.link.frame_symbols, "link");
    read(ln, "modulation_order", c.link.modulation_order, "link");
    read(ln, "rates", c.link.rates, "link");
    read(ln, "codec", c.link.codec, "link");
    read(ln, "interleaver_seed", c.link.interleaver_seed, "link");

    const json& ex = section(doc, "experiment");
    read(ex, "snr_min_db", c.experiment.snr_min_db, "experiment");
    read(ex, "snr_max_db", c.experiment.snr_max_db, "experiment");
    read(ex, "snr_points", c.experiment.snr_points, "experiment");
    read(ex, "frames_per_rate", c.experiment.frames_per_rate, "experiment");
    read(ex, "test_frames_per_snr", c.experiment.test_frames_per_snr, "experiment");
    read(ex, "reference_trials", c.experiment.reference_trials, "experiment");

    const json& aw = section(doc, "awgn");
    read(aw, "grid_min_db", c.awgn.grid_min_db, "awgn");
    read(aw, "grid_max_db", c.awgn.grid_max_db, "awgn");
    read(aw, "grid_step_db", c.awgn.grid_step_db, "awgn");
    read(aw, "frames_per_point", c.awgn.frames_per_point, "awgn");

    const json& ee = section(doc, "eesm");
    if (ee.contains("sign")) {
        read(ee, "sign", text, "eesm");
        c.eesm.sign = parse_eesm_sign(text);
    }
    read(ee, "beta_min", c.eesm.search.beta_min, "eesm");
    read(ee, "beta_max", c.eesm.search.beta_max, "eesm");
    read(ee, "grid_points", c.eesm.search.grid_points, "eesm");
    read(ee, "refine_iterations", c.eesm.search.refine_iterations, "eesm");

    const json& nn = section(doc, "neural");
    read(nn, "hidden", c.neural.hidden, "neural");
    if (nn.contains("activation")) {
        read(nn, "activation", text, "neural");
        c.neural.activation = parse_activation(text);
    }
    read(nn, "input_offset_db", c.neural.normalizer.offset_db, "neural");
    read(nn, "input_scale_db", c.neural.normalizer.scale_db, "neural");
    auto& t = c.neural.train;
    read(nn, "batch_size", t.batch_size, "neural");
    read(nn, "step_size", t.step_size, "neural");
    read(nn, "max_epochs", t.max_epochs, "neural");
    read(nn, "patience", t.patience, "neural");
    read(nn, "validation_fraction", t.validation_fraction, "neural");
    read(nn, "optimizer", t.optimizer, "neural");
    read(nn, "moment_decay", t.moment_decay, "neural");
    read(nn, "second_moment_decay", t.second_moment_decay, "neural");
    read(nn, "adam_epsilon", t.adam_epsilon, "neural");

    const json& orc = section(doc, "oracle");
    if (orc.contains("family")) {
        read(orc, "family", text, "oracle");
        c.oracle.family = parse_oracle_family(text);
    }
    read(orc, "beta", c.oracle.beta, "oracle");
    read(orc, "slope", c.oracle.slope, "oracle");
    read(orc, "first_midpoint_db", c.oracle.first_midpoint_db, "oracle");
    read(orc, "midpoint_step_db", c.oracle.midpoint_step_db, "oracle");
    read(orc, "w_min", c.oracle.w_min, "oracle");
    read(orc, "w_mean", c.oracle.w_mean, "oracle");
    read(orc, "w_spread", c.oracle.w_spread, "oracle");

    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(doc);
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << to_json(config).dump(2) << '\n';
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value: '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("override: empty key segment in '" + key + "'");
        if (!node->is_object()) throw ConfigError("override: '" + key + "' does not name an object member");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

} // namespace feplab

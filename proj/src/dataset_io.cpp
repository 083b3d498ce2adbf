#include "feplab/dataset_io.hpp"

#include "storage_format.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace feplab {

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t line, std::size_t offset, const std::string& what) {
    throw DataError(source + ":" + std::to_string(line) + ":" + std::to_string(offset + 1) + ": " + what);
}

std::size_t offset_of(std::string_view line, std::string_view token) {
    return static_cast<std::size_t>(token.data() - line.data());
}

struct Header {
    std::size_t subcarriers = 0;
    std::size_t configs = 0;
    std::vector<double> rates;
    std::size_t frame_symbols = 1;
    std::size_t modulation_order = 2;
};

Header parse_header(std::string_view line, const std::string& source) {
    const auto tokens = detail::split_ws(line);
    if (tokens.size() < 4 || tokens[0] != "#fepds" || tokens[1] != "v1") {
        fail(source, 1, 0, "expected '#fepds v1' header");
    }
    Header h;
    bool have_m = false, have_k = false, have_rates = false;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
        const auto tok = tokens[i];
        const auto eq = tok.find('=');
        if (eq == std::string_view::npos) fail(source, 1, offset_of(line, tok), "expected key=value");
        const auto key = tok.substr(0, eq);
        const auto value = tok.substr(eq + 1);
        auto as_count = [&](std::size_t& dst) {
            auto v = detail::parse_number<std::size_t>(value);
            if (!v) fail(source, 1, offset_of(line, value), "bad integer for " + std::string(key));
            dst = *v;
        };
        if (key == "M") {
            as_count(h.subcarriers);
            have_m = true;
        } else if (key == "K") {
            as_count(h.configs);
            have_k = true;
        } else if (key == "S") {
            as_count(h.frame_symbols);
        } else if (key == "J") {
            as_count(h.modulation_order);
        } else if (key == "rates") {
            have_rates = true;
            std::size_t start = 0;
            while (start <= value.size() && !value.empty()) {
                auto comma = value.find(',', start);
                if (comma == std::string_view::npos) comma = value.size();
                const auto item = value.substr(start, comma - start);
                auto r = detail::parse_number<double>(item);
                if (!r) fail(source, 1, offset_of(line, item), "bad rate value");
                h.rates.push_back(*r);
                start = comma + 1;
                if (comma == value.size()) break;
            }
        }
    }
    if (!have_m || !have_k || !have_rates) fail(source, 1, 0, "header must define M, K and rates");
    if (h.rates.size() != h.configs) fail(source, 1, 0, "K does not match the number of rates");
    return h;
}

} // namespace

std::string format_dataset_header(const ConfigSet& configs) {
    std::string out = "#fepds v1 M=" + std::to_string(configs.subcarriers()) + " K=" + std::to_string(configs.size()) +
                      " rates=";
    for (std::size_t k = 0; k < configs.size(); ++k) {
        if (k > 0) out += ',';
        out += detail::format_shortest(configs[k].code_rate);
    }
    out += " S=" + std::to_string(configs.frame_symbols()) + " J=" + std::to_string(configs.modulation_order());
    return out;
}

std::string format_record(const FrameObservation& record) {
    std::string out = detail::format_shortest(record.avg_snr_db);
    out += ' ';
    out += detail::format_hex_u64(record.seed);
    out += ' ';
    for (auto e : record.events) out += e == kUnobserved ? '-' : static_cast<char>('0' + e);
    for (double v : record.sinr.linear()) {
        out += ' ';
        out += detail::format_significant(detail::quantize_db(linear_to_db(v)), detail::kSinrDigits);
    }
    return out;
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
    out << format_dataset_header(dataset.config_set) << '\n';
    for (const auto& r : dataset.records) out << format_record(r) << '\n';
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    write_dataset(out, dataset);
    if (!out) throw DataError("write failed: " + path.string());
}

Dataset read_dataset(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) fail(source, 1, 0, "missing header");
    const Header h = parse_header(line, source);

    Dataset ds;
    try {
        ds.config_set = ConfigSet(h.subcarriers, h.frame_symbols, h.modulation_order, h.rates);
    } catch (const ConfigError& e) {
        fail(source, 1, 0, e.what());
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto tokens = detail::split_ws(line);
        if (tokens.size() != 3 + h.subcarriers) {
            fail(source, line_no, 0,
                 "expected " + std::to_string(3 + h.subcarriers) + " fields, found " + std::to_string(tokens.size()));
        }
        FrameObservation rec;
        auto snr = detail::parse_number<double>(tokens[0]);
        if (!snr) fail(source, line_no, offset_of(line, tokens[0]), "bad avg_snr_db");
        rec.avg_snr_db = *snr;
        auto seed = detail::parse_hex_u64(tokens[1]);
        if (!seed) fail(source, line_no, offset_of(line, tokens[1]), "bad seed");
        rec.seed = *seed;
        const auto ev = tokens[2];
        if (ev.size() != h.configs) fail(source, line_no, offset_of(line, ev), "event string length != K");
        rec.events.resize(h.configs);
        for (std::size_t k = 0; k < ev.size(); ++k) {
            switch (ev[k]) {
            case '0': rec.events[k] = 0; break;
            case '1': rec.events[k] = 1; break;
            case '-': rec.events[k] = kUnobserved; break;
            default: fail(source, line_no, offset_of(line, ev) + k, "event must be 0, 1 or -");
            }
        }
        if (rec.observed_count() == 0) fail(source, line_no, offset_of(line, ev), "no configuration observed");
        std::vector<double> lin(h.subcarriers);
        for (std::size_t m = 0; m < h.subcarriers; ++m) {
            const auto tok = tokens[3 + m];
            auto v = detail::parse_number<float>(tok);
            if (!v || !std::isfinite(*v)) fail(source, line_no, offset_of(line, tok), "bad SINR value");
            lin[m] = detail::linear_from_stored_db(*v);
        }
        rec.sinr = SinrVector(std::move(lin));
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset " + path.string());
    return read_dataset(in, path.string());
}

} // namespace feplab

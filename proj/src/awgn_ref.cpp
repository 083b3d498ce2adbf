#include "feplab/awgn_ref.hpp"

#include "feplab/events.hpp"
#include "storage_format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace feplab {

namespace {

constexpr int kCurveDigits = 6;

double canonical(double v) { return *detail::parse_number<double>(detail::format_significant(v, kCurveDigits)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

void AwgnCurve::validate() const {
    if (grid_snr_db.empty() || grid_snr_db.size() != fep.size()) {
        throw DataError("awgn curve k=" + std::to_string(config_id) + ": grid and fep must be non-empty, equal length");
    }
    for (std::size_t i = 0; i < grid_snr_db.size(); ++i) {
        if (!std::isfinite(grid_snr_db[i]) || (i > 0 && grid_snr_db[i] <= grid_snr_db[i - 1])) {
            throw DataError("awgn curve k=" + std::to_string(config_id) + ": grid must be strictly ascending");
        }
        if (!(fep[i] >= 0.0 && fep[i] <= 1.0)) {
            throw DataError("awgn curve k=" + std::to_string(config_id) + ": fep outside [0, 1]");
        }
    }
}

std::vector<double> isotonic_nonincreasing(std::span<const double> values) {
    // Blocks of (mean, count); merge while a later block exceeds an earlier one.
    std::vector<double> mean;
    std::vector<std::size_t> count;
    for (double v : values) {
        mean.push_back(v);
        count.push_back(1);
        while (mean.size() > 1 && mean[mean.size() - 1] > mean[mean.size() - 2]) {
            const std::size_t n = mean.size();
            const double total = mean[n - 1] * static_cast<double>(count[n - 1]) +
                                 mean[n - 2] * static_cast<double>(count[n - 2]);
            count[n - 2] += count[n - 1];
            mean[n - 2] = total / static_cast<double>(count[n - 2]);
            mean.pop_back();
            count.pop_back();
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (std::size_t b = 0; b < mean.size(); ++b) out.insert(out.end(), count[b], mean[b]);
    return out;
}

std::vector<double> snr_grid(double start_db, double stop_db, double step_db) {
    if (!(step_db > 0.0) || stop_db < start_db) throw ConfigError("snr grid: need step > 0 and stop >= start");
    std::vector<double> grid;
    const auto n = static_cast<std::size_t>(std::floor((stop_db - start_db) / step_db + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) grid.push_back(canonical(start_db + static_cast<double>(i) * step_db));
    return grid;
}

AwgnCurve build_awgn_curve(const LinkConfig& cfg, std::span<const double> grid_snr_db, std::size_t frames_per_point,
                           const EventSource& source, std::uint64_t seed) {
    if (grid_snr_db.empty()) throw ConfigError("awgn curve: empty grid");
    if (frames_per_point == 0) throw ConfigError("awgn curve: frames_per_point must be positive");
    AwgnCurve curve;
    curve.config_id = cfg.config_id;
    curve.code_rate = cfg.code_rate;
    curve.frames_per_point = frames_per_point;
    curve.grid_snr_db.assign(grid_snr_db.begin(), grid_snr_db.end());
    std::vector<double> raw(grid_snr_db.size());
    for (std::size_t i = 0; i < grid_snr_db.size(); ++i) {
        const SinrVector flat(std::vector<double>(cfg.subcarriers, db_to_linear(grid_snr_db[i])));
        const std::uint64_t point_seed = derive_seed(seed, cfg.config_id, i);
        std::size_t errors = 0;
        for (std::size_t f = 0; f < frames_per_point; ++f) {
            errors += static_cast<std::size_t>(source.frame_event(cfg, flat, derive_seed(point_seed, f)));
        }
        raw[i] = static_cast<double>(errors) / static_cast<double>(frames_per_point);
    }
    curve.fep = isotonic_nonincreasing(raw);
    for (double& p : curve.fep) p = canonical(p);
    curve.validate();
    return curve;
}

double lookup_fep(const AwgnCurve& curve, double effective_sinr_linear) {
    const auto& x = curve.grid_snr_db;
    auto clamped = [&](std::size_t i) {
        return std::clamp(curve.fep[i], kCurveProbabilityFloor, 1.0 - kCurveProbabilityFloor);
    };
    if (!(effective_sinr_linear > 0.0)) return clamped(0);
    const double q = 10.0 * std::log10(effective_sinr_linear);
    if (q <= x.front()) return clamped(0);
    if (q >= x.back()) return clamped(x.size() - 1);
    const auto hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), q) - x.begin());
    const std::size_t lo = hi - 1;
    if (clamped(lo) == clamped(hi)) return clamped(lo);
    const double t = (q - x[lo]) / (x[hi] - x[lo]);
    const double z = (1.0 - t) * logit(clamped(lo)) + t * logit(clamped(hi));
    return std::clamp(logistic(z), 0.0, 1.0);
}

void write_curve(std::ostream& out, const AwgnCurve& curve) {
    out << "#awgncurve v1 k=" << curve.config_id << " rate=" << detail::format_shortest(curve.code_rate)
        << " frames=" << curve.frames_per_point << '\n';
    for (std::size_t i = 0; i < curve.grid_snr_db.size(); ++i) {
        out << detail::format_significant(curve.grid_snr_db[i], kCurveDigits) << ' '
            << detail::format_significant(curve.fep[i], kCurveDigits) << '\n';
    }
}

void write_curve(const std::filesystem::path& path, const AwgnCurve& curve) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    write_curve(out, curve);
}

AwgnCurve read_curve(std::istream& in, const std::string& source) {
    auto fail = [&](std::size_t line, const std::string& what) -> AwgnCurve {
        throw DataError(source + ":" + std::to_string(line) + ": " + what);
    };
    std::string line;
    if (!std::getline(in, line)) return fail(1, "missing header");
    const auto head = detail::split_ws(line);
    if (head.size() < 4 || head[0] != "#awgncurve" || head[1] != "v1") return fail(1, "expected '#awgncurve v1'");
    AwgnCurve curve;
    for (std::size_t i = 2; i < head.size(); ++i) {
        const auto tok = head[i];
        const auto eq = tok.find('=');
        if (eq == std::string_view::npos) return fail(1, "expected key=value");
        const auto key = tok.substr(0, eq);
        const auto value = tok.substr(eq + 1);
        if (key == "k") {
            auto v = detail::parse_number<std::size_t>(value);
            if (!v) return fail(1, "bad k");
            curve.config_id = *v;
        } else if (key == "rate") {
            auto v = detail::parse_number<double>(value);
            if (!v) return fail(1, "bad rate");
            curve.code_rate = *v;
        } else if (key == "frames") {
            auto v = detail::parse_number<std::size_t>(value);
            if (!v) return fail(1, "bad frames");
            curve.frames_per_point = *v;
        }
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = detail::split_ws(line);
        if (tokens.empty()) continue;
        if (tokens.size() != 2) return fail(line_no, "expected 'snr_db fep'");
        auto snr = detail::parse_number<double>(tokens[0]);
        auto fep = detail::parse_number<double>(tokens[1]);
        if (!snr || !fep) return fail(line_no, "bad number");
        curve.grid_snr_db.push_back(*snr);
        curve.fep.push_back(*fep);
    }
    curve.validate();
    return curve;
}

AwgnCurve read_curve(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open curve " + path.string());
    return read_curve(in, path.string());
}

} // namespace feplab

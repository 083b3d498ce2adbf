#include "feplab/eesm.hpp"

#include "storage_format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

namespace feplab {

EesmSign parse_eesm_sign(const std::string& text) {
    if (text == "standard") return EesmSign::kStandard;
    if (text == "as_printed") return EesmSign::kAsPrinted;
    throw ConfigError("eesm_sign must be 'standard' or 'as_printed', got '" + text + "'");
}

std::string to_string(EesmSign sign) { return sign == EesmSign::kStandard ? "standard" : "as_printed"; }

double eesm_compress(std::span<const double> gamma, double beta, EesmSign sign) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("eesm: beta must be positive and finite");
    if (gamma.empty()) throw std::invalid_argument("eesm: empty SINR vector");
    const auto [lo_it, hi_it] = std::minmax_element(gamma.begin(), gamma.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double n = static_cast<double>(gamma.size());
    const double mean = std::accumulate(gamma.begin(), gamma.end(), 0.0) / n;

    // mean(exp(x)) - 1 accumulated through expm1 keeps the beta -> infinity
    // limit accurate.
    double s = 0.0;
    if (sign == EesmSign::kStandard) {
        for (double g : gamma) s += std::expm1(-(g - lo) / beta);
        const double value = lo - beta * std::log1p(s / n);
        return std::clamp(value, lo, std::max(lo, mean));
    }
    for (double g : gamma) s += std::expm1((g - hi) / beta);
    const double value = hi + beta * std::log1p(s / n);
    return std::clamp(value, std::min(mean, hi), hi);
}

double eesm_compress(const SinrVector& sinr, double beta, EesmSign sign) {
    return eesm_compress(sinr.linear(), beta, sign);
}

// ---------------------------------------------------------------------------

EesmPredictor::EesmPredictor(std::vector<double> betas, std::vector<AwgnCurve> curves, EesmSign sign)
    : betas_(std::move(betas)), curves_(std::move(curves)), sign_(sign) {
    if (betas_.size() != curves_.size()) throw DataError("eesm predictor: one curve per beta required");
    for (std::size_t i = 0; i < betas_.size(); ++i) {
        if (!(betas_[i] > 0.0)) throw DataError("eesm predictor: beta must be positive");
        curves_[i].validate();
    }
}

double EesmPredictor::predict(std::size_t config_id, const SinrVector& sinr) const {
    return lookup_fep(curve(config_id), eesm_compress(sinr, beta(config_id), sign_));
}

std::vector<double> EesmPredictor::predict_all(const SinrVector& sinr) const {
    std::vector<double> out(betas_.size());
    for (std::size_t i = 0; i < betas_.size(); ++i) out[i] = predict(i + 1, sinr);
    return out;
}

double predict_fep_eesm(const EesmPredictor& predictor, std::size_t config_id, const SinrVector& sinr) {
    return predictor.predict(config_id, sinr);
}

// ---------------------------------------------------------------------------

std::vector<LabelledSinr> observations_for(const Dataset& dataset, std::size_t config_id) {
    if (config_id < 1 || config_id > dataset.config_set.size()) {
        throw DataError("config id " + std::to_string(config_id) + " not in dataset");
    }
    std::vector<LabelledSinr> out;
    out.reserve(dataset.size());
    for (const auto& r : dataset.records) {
        const auto e = r.events[config_id - 1];
        if (e != kUnobserved) out.push_back({&r.sinr, e});
    }
    return out;
}

std::vector<double> BetaSearch::grid() const {
    if (!(beta_min > 0.0) || !(beta_max > beta_min) || grid_points < 2) {
        throw ConfigError("beta search: need 0 < beta_min < beta_max and at least 2 grid points");
    }
    std::vector<double> out(grid_points);
    const double a = std::log(beta_min);
    const double b = std::log(beta_max);
    for (std::size_t i = 0; i < grid_points; ++i) {
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(grid_points - 1));
    }
    out.front() = beta_min;
    out.back() = beta_max;
    return out;
}

double calibration_objective(std::span<const LabelledSinr> samples, const AwgnCurve& curve, double beta,
                             EesmSign sign) {
    double acc = 0.0;
    for (const auto& s : samples) {
        const double d = lookup_fep(curve, eesm_compress(*s.sinr, beta, sign)) - static_cast<double>(s.event);
        acc += d * d;
    }
    return acc;
}

CalibrationResult calibrate_beta(std::span<const LabelledSinr> samples, const AwgnCurve& curve,
                                 const BetaSearch& search, EesmSign sign) {
    if (samples.empty()) throw DataError("calibrate_beta: no observations for configuration " +
                                         std::to_string(curve.config_id));
    CalibrationResult result;
    result.grid = search.grid();
    result.grid_objective.resize(result.grid.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < result.grid.size(); ++i) {
        result.grid_objective[i] = calibration_objective(samples, curve, result.grid[i], sign);
        if (result.grid_objective[i] < result.grid_objective[best]) best = i;
    }
    result.beta = result.grid[best];
    result.objective = result.grid_objective[best];

    // Golden-section search in log(beta) over the neighbours of the best point.
    const std::size_t lo_i = best == 0 ? 0 : best - 1;
    const std::size_t hi_i = std::min(best + 1, result.grid.size() - 1);
    double a = std::log(result.grid[lo_i]);
    double b = std::log(result.grid[hi_i]);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [&](double log_beta) { return calibration_objective(samples, curve, std::exp(log_beta), sign); };
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (std::size_t it = 0; it < search.refine_iterations; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double refined = fc <= fd ? c : d;
    const double refined_value = std::min(fc, fd);
    if (refined_value < result.objective) {
        result.beta = std::exp(refined);
        result.objective = refined_value;
    }
    return result;
}

// ---------------------------------------------------------------------------

void write_eesm(std::ostream& out, std::span<const double> betas) {
    out << "#eesm v1\n";
    for (std::size_t i = 0; i < betas.size(); ++i) out << (i + 1) << ' ' << detail::format_shortest(betas[i]) << '\n';
}

void write_eesm(const std::filesystem::path& path, std::span<const double> betas) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    write_eesm(out, betas);
}

std::vector<double> read_eesm(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line) || detail::split_ws(line).size() < 2 || detail::split_ws(line)[0] != "#eesm" ||
        detail::split_ws(line)[1] != "v1") {
        throw DataError(source + ":1: expected '#eesm v1' header");
    }
    std::vector<double> betas;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = detail::split_ws(line);
        if (tokens.empty()) continue;
        auto k = tokens.size() == 2 ? detail::parse_number<std::size_t>(tokens[0]) : std::nullopt;
        auto beta = tokens.size() == 2 ? detail::parse_number<double>(tokens[1]) : std::nullopt;
        if (!k || !beta || *k != betas.size() + 1 || !(*beta > 0.0)) {
            throw DataError(source + ":" + std::to_string(line_no) + ": expected 'k beta' with consecutive k");
        }
        betas.push_back(*beta);
    }
    return betas;
}

std::vector<double> read_eesm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open eesm file " + path.string());
    return read_eesm(in, path.string());
}

} // namespace feplab

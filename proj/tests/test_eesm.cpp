#include "feplab/eesm.hpp"
#include "feplab/oracle.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

using namespace feplab;

namespace {

// Logistic AWGN-like curve on a fine grid.
AwgnCurve smooth_curve(double midpoint_db, double slope = 1.2) {
    AwgnCurve c;
    c.config_id = 1;
    c.code_rate = 0.1;
    c.frames_per_point = 1;
    for (double db = -15.0; db <= 25.0; db += 0.25) {
        c.grid_snr_db.push_back(db);
        c.fep.push_back(1.0 / (1.0 + std::exp(slope * (db - midpoint_db))));
    }
    return c;
}

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

} // namespace

TEST_CASE("compression of a constant vector") {
    for (double beta : {0.05, 1.0, 7.0, 1e4}) {
        CHECK(eesm_compress(SinrVector(std::vector<double>(9, 3.7)), beta) == doctest::Approx(3.7).epsilon(1e-14));
    }
}

TEST_CASE("compression value at beta = 1") {
    // -ln(0.5 (e^-1 + e^-3)) to 20 digits, evaluated in extended precision.
    const double expected = 1.5662191695169728130;
    CHECK(eesm_compress(SinrVector({1.0, 3.0}), 1.0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("large beta tends to the arithmetic mean") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto g = testutil::random_sinrs(24, s, -5, 15);
        CHECK(eesm_compress(g, 1e6) == doctest::Approx(mean_of(g.linear())).epsilon(1e-4));
    }
}

TEST_CASE("printed sign is the optimistic soft maximum") {
    const double expected = std::log(0.5 * (std::exp(1.0) + std::exp(3.0)));
    CHECK(eesm_compress(SinrVector({1.0, 3.0}), 1.0, EesmSign::kAsPrinted) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(parse_eesm_sign("as_printed") == EesmSign::kAsPrinted);
    CHECK_THROWS_AS(parse_eesm_sign("other"), ConfigError);
}

TEST_CASE("compression lies between min and mean, strictly for non-constant inputs") {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto g = testutil::random_sinrs(16, s, -5, 20);
        const auto lin = g.linear();
        const double lo = *std::min_element(lin.begin(), lin.end());
        const double mean = mean_of(lin);
        for (double beta : {0.1, 1.0, 10.0, 100.0}) {
            const double e = eesm_compress(g, beta);
            CHECK(e > lo);
            CHECK(e < mean);
        }
    }
}

TEST_CASE("compression is monotone in each subcarrier and permutation invariant") {
    Rng rng(3);
    for (std::uint64_t s = 0; s < 30; ++s) {
        const auto g = testutil::random_sinrs(12, s, -5, 20);
        std::vector<double> lin(g.linear().begin(), g.linear().end());
        const double base = eesm_compress(g, 2.0);
        for (std::size_t m = 0; m < lin.size(); ++m) {
            auto bumped = lin;
            bumped[m] *= 1.5;
            CHECK(eesm_compress(SinrVector(bumped), 2.0) >= base);
        }
        std::shuffle(lin.begin(), lin.end(), rng);
        CHECK(eesm_compress(SinrVector(lin), 2.0) == doctest::Approx(base).epsilon(1e-13));
    }
}

TEST_CASE("no overflow for extreme SINRs") {
    const SinrVector g({1e-6, 1e6, 1e9});
    const double e = eesm_compress(g, 0.05);
    CHECK(std::isfinite(e));
    CHECK(e >= 1e-6);
    CHECK(std::isfinite(eesm_compress(g, 0.05, EesmSign::kAsPrinted)));
}

TEST_CASE("EESM prediction") {
    const EesmPredictor pred({1.5}, {smooth_curve(3.0)});
    for (double db : {-2.0, 0.5, 3.0, 7.25}) {
        const SinrVector flat(std::vector<double>(10, db_to_linear(db)));
        CHECK(pred.predict(1, flat) == doctest::Approx(lookup_fep(pred.curve(1), db_to_linear(db))).epsilon(1e-12));
    }
    for (std::uint64_t s = 0; s < 30; ++s) {
        auto g = testutil::random_sinrs(12, s, -10, 20);
        const double p = predict_fep_eesm(pred, 1, g);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        std::vector<double> scaled(g.linear().begin(), g.linear().end());
        for (auto& v : scaled) v *= 1.7;
        CHECK(pred.predict(1, SinrVector(scaled)) <= p);
    }
}

TEST_CASE("calibration: grid objective never beats the returned beta") {
    const OracleSpec spec = OracleSpec::in_family_default(1, 3.0);
    std::vector<FrameObservation> frames;
    for (std::uint64_t s = 0; s < 1500; ++s) {
        frames.push_back(sample_observation(spec, testutil::random_sinrs(16, s, -6, 14), derive_seed(9, s)));
    }
    std::vector<LabelledSinr> samples;
    for (const auto& f : frames) samples.push_back({&f.sinr, f.events[0]});
    const auto curve = smooth_curve(3.0);
    const auto r = calibrate_beta(samples, curve);
    for (double v : r.grid_objective) CHECK(r.objective <= v);
    CHECK(r.objective == doctest::Approx(calibration_objective(samples, curve, r.beta)).epsilon(1e-12));

    auto doubled = samples;
    doubled.insert(doubled.end(), samples.begin(), samples.end());
    const auto r2 = calibrate_beta(doubled, curve);
    CHECK(r2.beta == doctest::Approx(r.beta).epsilon(1e-6));
    CHECK(r2.objective == doctest::Approx(2.0 * r.objective).epsilon(1e-9));
}

TEST_CASE("calibration: flat objective resolves to the smallest beta") {
    AwgnCurve zero;
    zero.config_id = 1;
    zero.grid_snr_db = {-10.0, 0.0, 10.0};
    zero.fep = {0.0, 0.0, 0.0};
    std::vector<SinrVector> states;
    for (std::uint64_t s = 0; s < 50; ++s) states.push_back(testutil::random_sinrs(8, s));
    std::vector<LabelledSinr> samples;
    for (const auto& g : states) samples.push_back({&g, 0});
    const BetaSearch search;
    const auto r = calibrate_beta(samples, zero, search);
    CHECK(r.beta == search.beta_min);
    CHECK_THROWS_AS(calibrate_beta(std::vector<LabelledSinr>{}, zero), DataError);
}

TEST_CASE("beta grid is log spaced over the search range") {
    const auto g = BetaSearch{}.grid();
    REQUIRE(g.size() == 40);
    CHECK(g.front() == 0.05);
    CHECK(g.back() == 200.0);
    for (std::size_t i = 2; i < g.size(); ++i) {
        CHECK(std::log(g[i] / g[i - 1]) == doctest::Approx(std::log(g[1] / g[0])).epsilon(1e-9));
    }
}

TEST_CASE("eesm predictor file round trips") {
    const std::vector<double> betas{0.123456789012, 2.0, 150.5};
    std::stringstream io;
    write_eesm(io, betas);
    CHECK(read_eesm(io, "mem") == betas);
    std::istringstream bad("#eesm v1\n2 1.0\n");
    CHECK_THROWS_AS(read_eesm(bad, "mem"), DataError);
}

#include "feplab/eesm.hpp"
#include "feplab/oracle.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace feplab;

TEST_CASE("in-family oracle: midpoint and tail") {
    const auto spec = OracleSpec::in_family_default(3, 1.0);
    for (std::size_t k = 1; k <= 3; ++k) {
        const double c = spec.terms[k - 1].midpoint_db;
        CHECK(c == doctest::Approx(1.0 + 0.8 * static_cast<double>(k - 1)));
        const SinrVector flat(std::vector<double>(16, db_to_linear(c)));
        CHECK(oracle_fep(spec, k, flat) == doctest::Approx(0.5).epsilon(1e-12));
    }
    const SinrVector strong(std::vector<double>(16, db_to_linear(80.0)));
    CHECK(oracle_fep(spec, 1, strong) < 1e-40);
    const SinrVector weak(std::vector<double>(16, db_to_linear(-30.0)));
    CHECK(oracle_fep(spec, 1, weak) > 1 - 1e-12);
}

TEST_CASE("in-family oracle is a logistic of the effective SINR") {
    const auto spec = OracleSpec::in_family_default(2);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto g = testutil::random_sinrs(12, s, -5, 15);
        const double eff_db = 10.0 * std::log10(eesm_compress(g, 2.0));
        const double expected = 1.0 / (1.0 + std::exp(1.2 * (eff_db - 0.8)));
        CHECK(oracle_fep(spec, 2, g) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("out-of-family oracle uses mean and spread in dB") {
    const auto spec = OracleSpec::out_family_default(1);
    const SinrVector g = SinrVector::from_db(std::vector<double>{0.0, 2.0, 4.0, 6.0});
    const double mean = 3.0;
    const double sd = std::sqrt((9.0 + 1.0 + 1.0 + 9.0) / 4.0);
    const double expected = 1.0 / (1.0 + std::exp(1.2 * (mean - 1.5 * sd)));
    CHECK(oracle_fep(spec, 1, g) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(parse_oracle_family("out_family") == OracleFamily::kOutFamily);
    CHECK_THROWS_AS(parse_oracle_family("x"), ConfigError);
}

TEST_CASE("bernoulli sampling at the extremes and a binomial check") {
    for (std::uint64_t s = 0; s < 2000; ++s) {
        CHECK(bernoulli_event(0.0, s) == 0);
        CHECK(bernoulli_event(1.0, s) == 1);
    }
    int hits = 0;
    const int n = 10000;
    for (int s = 0; s < n; ++s) hits += bernoulli_event(0.3, derive_seed(17, static_cast<std::uint64_t>(s)));
    CHECK(std::abs(hits / static_cast<double>(n) - 0.3) <= 3.0 * std::sqrt(0.3 * 0.7 / n));
}

TEST_CASE("sample_observation extremes and determinism") {
    OracleSpec spec = OracleSpec::in_family_default(2);
    const SinrVector strong(std::vector<double>(8, db_to_linear(90.0)));
    const SinrVector weak(std::vector<double>(8, db_to_linear(-60.0)));
    for (std::uint64_t s = 0; s < 200; ++s) {
        CHECK(sample_observation(spec, strong, s).events == std::vector<std::int8_t>{0, 0});
        CHECK(sample_observation(spec, weak, s).events == std::vector<std::int8_t>{1, 1});
    }
    const auto g = testutil::random_sinrs(8, 1, -3, 6);
    for (std::uint64_t s = 0; s < 50; ++s) CHECK(sample_observation(spec, g, s) == sample_observation(spec, g, s));
    const auto obs = sample_observation(spec, g, 5, 2.5);
    CHECK(obs.seed == 5);
    CHECK(obs.avg_snr_db == 2.5);
    CHECK(obs.sinr == g);
}

TEST_CASE("KL values") {
    const double expected = 0.9 * std::log(1.8) + 0.1 * std::log(0.2);
    CHECK(expected == doctest::Approx(0.368064).epsilon(1e-6));
    CHECK(bernoulli_kl(0.9, 0.5) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(bernoulli_kl(0.5, 0.5) == 0.0);
    CHECK(bernoulli_kl(0.0, 0.0) == doctest::Approx(0.0).epsilon(1e-11));
    CHECK(bernoulli_entropy(0.0) == 0.0);
    CHECK(bernoulli_entropy(0.5) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("KL to the oracle: identity, constant predictor, decomposition") {
    const auto spec = OracleSpec::in_family_default(3, 1.0);
    std::vector<SinrVector> states;
    for (std::uint64_t s = 0; s < 200; ++s) states.push_back(testutil::random_sinrs(10, s, -6, 12));

    const FepPredictor self = [&](const SinrVector& g) { return oracle_fep_all(spec, g); };
    const auto kl = kl_to_oracle(self, spec, states);
    CHECK(kl.average == 0.0);
    for (double v : kl.per_config) CHECK(v == 0.0);

    const FepPredictor half = [](const SinrVector&) { return std::vector<double>(3, 0.5); };
    const auto report = kl_to_oracle(half, spec, states);
    for (double v : report.per_config) CHECK(v > 0.0);
    CHECK(expected_cross_entropy(half, spec, states) ==
          doctest::Approx(oracle_entropy(spec, states) + report.average).epsilon(1e-12));
    CHECK(std::abs(expected_cross_entropy(half, spec, states) - oracle_entropy(spec, states) - report.average) < 1e-9);
}

TEST_CASE("KL of a constant one-half predictor against a one-half oracle is zero") {
    OracleSpec spec = OracleSpec::in_family_default(1, 0.0);
    std::vector<SinrVector> states(5, SinrVector(std::vector<double>(4, 1.0)));
    const FepPredictor half = [](const SinrVector&) { return std::vector<double>{0.5}; };
    CHECK(kl_to_oracle(half, spec, states).average == doctest::Approx(0.0).epsilon(1e-15));
}

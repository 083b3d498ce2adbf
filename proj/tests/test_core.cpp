#include "feplab/core.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace feplab;

TEST_CASE("sort_sinrs orders ascending") {
    CHECK(sort_sinrs(SinrVector({1, 2, 3})) == SinrVector({1, 2, 3}));
    CHECK(sort_sinrs(SinrVector({3, 1, 2})) == SinrVector({1, 2, 3}));
}

TEST_CASE("sort_sinrs keeps the multiset and ignores input order") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto g = testutil::random_sinrs(17, s);
        const auto sorted = sort_sinrs(g);
        const auto lin = g.linear();
        const auto out = sorted.linear();
        CHECK(std::accumulate(out.begin(), out.end(), 0.0) ==
              doctest::Approx(std::accumulate(lin.begin(), lin.end(), 0.0)).epsilon(1e-14));
        CHECK(out.front() == *std::min_element(lin.begin(), lin.end()));
        CHECK(out.back() == *std::max_element(lin.begin(), lin.end()));
        CHECK(sort_sinrs(sorted) == sorted);

        std::vector<double> shuffled(lin.begin(), lin.end());
        Rng rng(s);
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(sort_sinrs(SinrVector(shuffled)) == sorted);
    }
}

TEST_CASE("bernoulli_nll values") {
    CHECK(bernoulli_nll(1, 1.0) == doctest::Approx(0.0).epsilon(1e-11));
    CHECK(bernoulli_nll(0, 0.5) == doctest::Approx(0.693147).epsilon(1e-6));
    CHECK(bernoulli_nll(1, 0.1) == doctest::Approx(2.302585).epsilon(1e-6));
}

TEST_CASE("bernoulli_nll is non-negative, convex, minimised at the label") {
    for (int e : {0, 1}) {
        double prev = 0.0;
        for (int i = 1; i < 100; ++i) {
            const double p = i / 100.0;
            const double v = bernoulli_nll(e, p);
            CHECK(v >= 0.0);
            const double h = 1e-3;
            const double second = bernoulli_nll(e, p + h) - 2 * v + bernoulli_nll(e, p - h);
            CHECK(second >= -1e-12);
            if (i > 1) {
                if (e == 1) CHECK(v <= prev);
                else CHECK(v >= prev);
            }
            prev = v;
        }
        CHECK(bernoulli_nll(e, e) < 1e-11);
    }
}

TEST_CASE("rmse values") {
    const std::vector<double> a{0.2, 0.7, 0.1};
    CHECK(rmse(a, a) == 0.0);
    CHECK(rmse(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == doctest::Approx(1.0));
    CHECK(rmse(std::vector<double>{0.5, 0.5}, std::vector<double>{0.0, 1.0}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(rmse(std::vector<double>{1}, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST_CASE("rmse is symmetric and satisfies the triangle inequality") {
    Rng rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(7), b(7), c(7);
        for (auto* v : {&a, &b, &c}) for (auto& x : *v) x = u(rng);
        CHECK(rmse(a, b) == doctest::Approx(rmse(b, a)).epsilon(1e-15));
        CHECK(rmse(a, c) <= rmse(a, b) + rmse(b, c) + 1e-15);
    }
}

TEST_CASE("ConfigSet computes payload sizes and validates rates") {
    const ConfigSet set(64, 4, 2, {0.04, 0.08, 0.32});
    REQUIRE(set.size() == 3);
    CHECK(set[0].payload_bits == 20);
    CHECK(set[1].payload_bits == 41);
    CHECK(set[2].payload_bits == 164);
    CHECK(set.by_id(2).code_rate == 0.08);
    CHECK(set[2].config_id == 3);
    CHECK_THROWS_AS(ConfigSet(64, 4, 2, {0.1, 0.05}), ConfigError);
    CHECK_THROWS_AS(ConfigSet(64, 4, 2, {0.1, 0.5}), ConfigError);
    CHECK_THROWS_AS(ConfigSet(64, 4, 4, {0.1}), ConfigError);
}

TEST_CASE("derive_seed separates streams and indices") {
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
    CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("storage_canonical is idempotent and close to the input") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto g = testutil::random_sinrs(32, s);
        const auto c = g.storage_canonical();
        CHECK(c.storage_canonical() == c);
        for (std::size_t m = 0; m < g.size(); ++m) CHECK(c[m] == doctest::Approx(g[m]).epsilon(3e-5));
    }
}

TEST_CASE("dB view clamps zero SINR to the floor") {
    const SinrVector g({0.0, 1.0, 100.0});
    const auto db = g.db();
    CHECK(db[0] == kSinrDbFloor);
    CHECK(db[1] == doctest::Approx(0.0));
    CHECK(db[2] == doctest::Approx(20.0));
}

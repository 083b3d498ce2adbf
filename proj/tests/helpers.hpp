#pragma once

#include "feplab/core.hpp"

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace testutil {

inline feplab::SinrVector random_sinrs(std::size_t m, std::uint64_t seed, double lo_db = -10.0, double hi_db = 25.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo_db, hi_db);
    std::vector<double> lin(m);
    for (auto& v : lin) v = std::pow(10.0, u(rng) / 10.0);
    return feplab::SinrVector(lin);
}

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

} // namespace testutil

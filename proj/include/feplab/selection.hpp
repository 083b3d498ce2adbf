#pragma once

#include "feplab/core.hpp"

#include <span>
#include <vector>

namespace feplab {

struct PolicyDecision {
    std::size_t frame = 0;
    std::size_t config_id = 1;        // chosen k, 1-based
    std::vector<double> predicted;    // rho_hat for every k
    double payload_bits = 0.0;        // T of the chosen k
    int realized_event = 0;           // e of the chosen k
};

/// argmax_k T_k (1 - rho_hat_k); ties go to the smaller k. Returns the
/// 1-based configuration id.
std::size_t select_rate(std::span<const double> predicted_fep, std::span<const double> payload_bits);

/// (1/N) sum_n T_{k_n} (1 - e_n).
double realized_throughput(std::span<const PolicyDecision> decisions);

/// (1/N) sum_n max_k T_k (1 - e_k^n). Every frame must carry an event for
/// every configuration; throws DataError otherwise.
double genie_throughput(std::span<const std::vector<std::int8_t>> events, std::span<const double> payload_bits);

/// Per-frame Genie choice (smallest k among the best), 1-based; returns 0
/// when every configuration failed.
std::size_t genie_choice(std::span<const std::int8_t> events, std::span<const double> payload_bits);

} // namespace feplab

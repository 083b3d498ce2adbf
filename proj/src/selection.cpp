#include "feplab/selection.hpp"

#include <stdexcept>

namespace feplab {

std::size_t select_rate(std::span<const double> predicted_fep, std::span<const double> payload_bits) {
    if (predicted_fep.empty() || predicted_fep.size() != payload_bits.size()) {
        throw std::invalid_argument("select_rate: predictions and payloads must be non-empty and of equal length");
    }
    std::size_t best = 0;
    double best_value = 0.0;
    for (std::size_t k = 0; k < predicted_fep.size(); ++k) {
        if (!(payload_bits[k] > 0.0)) throw std::invalid_argument("select_rate: payload sizes must be positive");
        const double value = payload_bits[k] * (1.0 - predicted_fep[k]);
        if (k == 0 || value > best_value) {
            best_value = value;
            best = k;
        }
    }
    return best + 1;
}

double realized_throughput(std::span<const PolicyDecision> decisions) {
    if (decisions.empty()) throw std::invalid_argument("realized_throughput: no decisions");
    double acc = 0.0;
    for (const auto& d : decisions) acc += d.realized_event == 0 ? d.payload_bits : 0.0;
    return acc / static_cast<double>(decisions.size());
}

std::size_t genie_choice(std::span<const std::int8_t> events, std::span<const double> payload_bits) {
    if (events.size() != payload_bits.size()) throw DataError("genie: event count != K");
    std::size_t best = 0;
    double best_value = 0.0;
    for (std::size_t k = 0; k < events.size(); ++k) {
        if (events[k] == kUnobserved) throw DataError("genie: missing event for configuration " + std::to_string(k + 1));
        const double value = events[k] == 0 ? payload_bits[k] : 0.0;
        if (value > best_value) {
            best_value = value;
            best = k + 1;
        }
    }
    return best;
}

double genie_throughput(std::span<const std::vector<std::int8_t>> events, std::span<const double> payload_bits) {
    if (events.empty()) throw std::invalid_argument("genie_throughput: no frames");
    double acc = 0.0;
    for (const auto& frame : events) {
        const std::size_t k = genie_choice(frame, payload_bits);
        if (k != 0) acc += payload_bits[k - 1];
    }
    return acc / static_cast<double>(events.size());
}

} // namespace feplab

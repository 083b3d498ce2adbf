#include "feplab/codec.hpp"

#include "feplab/core.hpp"

#include <array>
#include <bit>
#include <limits>
#include <stdexcept>

namespace feplab {

namespace {

constexpr std::array<unsigned, 3> kGenerators = {0133, 0171, 0165};

} // namespace

ConvolutionalCodec::ConvolutionalCodec() {
    for (unsigned reg = 0; reg < 2 * kStates; ++reg) {
        std::uint8_t pattern = 0;
        for (int j = 0; j < kOutputs; ++j) {
            const unsigned bit = static_cast<unsigned>(std::popcount(reg & kGenerators[j])) & 1u;
            pattern |= static_cast<std::uint8_t>(bit << j);
        }
        output_[reg] = pattern;
    }
}

Bits ConvolutionalCodec::encode(std::span<const std::uint8_t> payload) const {
    Bits out;
    out.reserve(coded_length(payload.size()));
    unsigned state = 0;
    auto push = [&](unsigned input) {
        const unsigned reg = (input << kMemory) | state;
        const std::uint8_t pattern = output_[reg];
        for (int j = 0; j < kOutputs; ++j) out.push_back((pattern >> j) & 1u);
        state = reg >> 1;
    };
    for (auto b : payload) push(b & 1u);
    for (int i = 0; i < kMemory; ++i) push(0);
    return out;
}

Bits ConvolutionalCodec::decode(std::span<const double> llrs, std::size_t payload_bits) const {
    const std::size_t steps = payload_bits + kMemory;
    if (llrs.size() != kOutputs * steps) {
        throw std::invalid_argument("viterbi: expected " + std::to_string(kOutputs * steps) + " LLRs, got " +
                                    std::to_string(llrs.size()));
    }
    constexpr double kUnreached = -std::numeric_limits<double>::infinity();
    std::array<double, kStates> metric;
    std::array<double, kStates> next;
    metric.fill(kUnreached);
    metric[0] = 0.0;
    // decisions[t * kStates + ns] = low bit of the winning predecessor register
    std::vector<std::uint8_t> decisions(steps * kStates);

    std::array<double, 8> branch;
    for (std::size_t t = 0; t < steps; ++t) {
        const double* l = llrs.data() + kOutputs * t;
        for (unsigned p = 0; p < 8; ++p) {
            double bm = 0.0;
            for (int j = 0; j < kOutputs; ++j) bm += ((p >> j) & 1u) ? -l[j] : l[j];
            branch[p] = bm;
        }
        const bool tail = t >= payload_bits;
        for (unsigned ns = 0; ns < kStates; ++ns) {
            const unsigned input = ns >> (kMemory - 1);
            if (tail && input != 0) {
                next[ns] = kUnreached;
                decisions[t * kStates + ns] = 0;
                continue;
            }
            const unsigned reg0 = ns << 1;
            const unsigned reg1 = reg0 | 1u;
            const double m0 = metric[reg0 & (kStates - 1)] + branch[output_[reg0]];
            const double m1 = metric[reg1 & (kStates - 1)] + branch[output_[reg1]];
            if (m1 > m0) {
                next[ns] = m1;
                decisions[t * kStates + ns] = 1;
            } else {
                next[ns] = m0;
                decisions[t * kStates + ns] = 0;
            }
        }
        metric = next;
    }

    Bits out(steps);
    unsigned state = 0;
    for (std::size_t t = steps; t-- > 0;) {
        const unsigned reg = (state << 1) | decisions[t * kStates + state];
        out[t] = static_cast<std::uint8_t>(reg >> kMemory);
        state = reg & (kStates - 1);
    }
    out.resize(payload_bits);
    return out;
}

std::unique_ptr<Codec> make_codec(const std::string& name) {
    if (name == "conv_k7_r13") return std::make_unique<ConvolutionalCodec>();
    throw ConfigError("unknown codec '" + name + "' (available: conv_k7_r13)");
}

} // namespace feplab

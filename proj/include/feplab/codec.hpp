#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace feplab {

using Bits = std::vector<std::uint8_t>;

/// Channel code used by the link chain. LLRs are positive for bit 0.
class Codec {
public:
    virtual ~Codec() = default;

    virtual std::string name() const = 0;
    virtual double mother_rate() const = 0;
    /// Length L of the coded sequence for a payload of `payload_bits`.
    virtual std::size_t coded_length(std::size_t payload_bits) const = 0;
    virtual Bits encode(std::span<const std::uint8_t> payload) const = 0;
    virtual Bits decode(std::span<const double> llrs, std::size_t payload_bits) const = 0;
};

/// Rate-1/3 feedforward convolutional code, constraint length 7, generators
/// 133/171/165 (octal), zero-tail terminated. Decoding is soft-decision
/// Viterbi over the 64-state trellis.
class ConvolutionalCodec final : public Codec {
public:
    static constexpr int kConstraintLength = 7;
    static constexpr int kMemory = kConstraintLength - 1;
    static constexpr int kStates = 1 << kMemory;
    static constexpr int kOutputs = 3;

    ConvolutionalCodec();

    std::string name() const override { return "conv_k7_r13"; }
    double mother_rate() const override { return 1.0 / 3.0; }
    std::size_t coded_length(std::size_t payload_bits) const override {
        return kOutputs * (payload_bits + kMemory);
    }
    Bits encode(std::span<const std::uint8_t> payload) const override;
    Bits decode(std::span<const double> llrs, std::size_t payload_bits) const override;

private:
    // Output triple (as a 3-bit pattern) for register value (input << 6) | state.
    std::uint8_t output_[2 * kStates];
};

/// Registry lookup by config key; throws ConfigError for unknown names.
std::unique_ptr<Codec> make_codec(const std::string& name);

} // namespace feplab

#pragma once

// BICM-OFDM frame simulation in the frequency domain:
//   encode -> interleave -> rate match -> QPSK -> y = h x + g -> ZF ->
//   soft demap -> LLR accumulation -> deinterleave -> Viterbi -> error event.

#include "feplab/channel.hpp"
#include "feplab/codec.hpp"
#include "feplab/core.hpp"

#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace feplab {

/// Random permutation on 0..L-1 derived from (L, seed).
class Interleaver {
public:
    Interleaver(std::size_t length, std::uint64_t seed);
    explicit Interleaver(std::vector<std::size_t> permutation);

    std::size_t size() const { return perm_.size(); }
    const std::vector<std::size_t>& permutation() const { return perm_; }

    template <typename T>
    std::vector<T> interleave(std::span<const T> in) const {
        check(in.size());
        std::vector<T> out(in.size());
        for (std::size_t i = 0; i < perm_.size(); ++i) out[i] = in[perm_[i]];
        return out;
    }

    template <typename T>
    std::vector<T> deinterleave(std::span<const T> in) const {
        check(in.size());
        std::vector<T> out(in.size());
        for (std::size_t i = 0; i < perm_.size(); ++i) out[perm_[i]] = in[i];
        return out;
    }

private:
    void check(std::size_t n) const {
        if (n != perm_.size()) throw std::invalid_argument("interleaver: length mismatch");
    }
    std::vector<std::size_t> perm_;
};

/// Cyclic repetition r_i = l_{i mod L} (0-based) to `target_length` bits.
Bits rate_match(std::span<const std::uint8_t> coded, std::size_t target_length);

/// Inverse of rate_match for soft values: sums the LLRs of every repetition
/// of each coded position.
std::vector<double> derate_match(std::span<const double> llrs, std::size_t coded_length);

/// Gray QPSK: (b_I, b_Q) -> ((1 - 2 b_I) + j (1 - 2 b_Q)) / sqrt(2).
std::vector<std::complex<double>> modulate_qpsk(std::span<const std::uint8_t> bits);

struct LlrPair {
    double in_phase = 0.0;
    double quadrature = 0.0;
};

inline constexpr double kMaxLlr = 1e15;

/// Exact Gray-QPSK LLRs of a zero-forced symbol with post-equalisation SINR
/// gamma: 2 sqrt(2) gamma Re/Im(y). Returns nullopt for a non-finite symbol.
std::optional<LlrPair> demap_llr(std::complex<double> equalized, double gamma);

struct FrameSimulator {
    const Codec& codec;
    std::uint64_t interleaver_seed = 0;

    /// One frame on a fixed channel; returns the error event (1 = NACK).
    /// A noise variance of 0 simulates a noiseless link.
    int simulate_frame(const LinkConfig& cfg, const ChannelRealization& channel, std::uint64_t seed) const;
};

int simulate_frame(const LinkConfig& cfg, const ChannelRealization& channel, const Codec& codec,
                   std::uint64_t interleaver_seed, std::uint64_t seed);

struct FepEstimate {
    double fep = 0.0;
    std::size_t trials = 0;
};

/// Mean error event over `trials` independent payload/noise draws on a fixed
/// channel.
FepEstimate estimate_fep_mc(const LinkConfig& cfg, const ChannelRealization& channel, const Codec& codec,
                            std::size_t trials, std::uint64_t seed, std::uint64_t interleaver_seed = 0);

/// Uncoded QPSK over a flat channel of symbol SINR `gamma`: number of bit
/// errors after hard decisions on the demapped LLRs.
std::size_t count_uncoded_bit_errors(double gamma, std::size_t bits, std::uint64_t seed);

} // namespace feplab

#include "feplab/link.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace feplab {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kTwoSqrt2 = 2.82842712474619009760;
constexpr std::uint64_t kInterleaverStream = 0x1e7e;

} // namespace

Interleaver::Interleaver(std::size_t length, std::uint64_t seed) : perm_(length) {
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    Rng rng(derive_seed(seed, kInterleaverStream, length));
    std::shuffle(perm_.begin(), perm_.end(), rng);
}

Interleaver::Interleaver(std::vector<std::size_t> permutation) : perm_(std::move(permutation)) {
    std::vector<bool> seen(perm_.size(), false);
    for (auto p : perm_) {
        if (p >= perm_.size() || seen[p]) throw std::invalid_argument("interleaver: not a permutation");
        seen[p] = true;
    }
}

Bits rate_match(std::span<const std::uint8_t> coded, std::size_t target_length) {
    if (coded.empty()) throw std::invalid_argument("rate_match: empty codeword");
    Bits out(target_length);
    for (std::size_t i = 0; i < target_length; ++i) out[i] = coded[i % coded.size()];
    return out;
}

std::vector<double> derate_match(std::span<const double> llrs, std::size_t coded_length) {
    if (coded_length == 0) throw std::invalid_argument("derate_match: empty codeword");
    std::vector<double> acc(coded_length, 0.0);
    for (std::size_t i = 0; i < llrs.size(); ++i) acc[i % coded_length] += llrs[i];
    return acc;
}

std::vector<std::complex<double>> modulate_qpsk(std::span<const std::uint8_t> bits) {
    if (bits.size() % 2 != 0) throw std::invalid_argument("modulate_qpsk: odd number of bits");
    std::vector<std::complex<double>> out(bits.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double re = 1.0 - 2.0 * (bits[2 * i] & 1u);
        const double im = 1.0 - 2.0 * (bits[2 * i + 1] & 1u);
        out[i] = {re * kInvSqrt2, im * kInvSqrt2};
    }
    return out;
}

std::optional<LlrPair> demap_llr(std::complex<double> equalized, double gamma) {
    if (!std::isfinite(equalized.real()) || !std::isfinite(equalized.imag())) return std::nullopt;
    if (gamma == 0.0) return LlrPair{0.0, 0.0};
    const double scale = kTwoSqrt2 * gamma;
    return LlrPair{std::clamp(scale * equalized.real(), -kMaxLlr, kMaxLlr),
                   std::clamp(scale * equalized.imag(), -kMaxLlr, kMaxLlr)};
}

int FrameSimulator::simulate_frame(const LinkConfig& cfg, const ChannelRealization& channel,
                                   std::uint64_t seed) const {
    const std::size_t M = cfg.subcarriers;
    if (channel.size() != M) throw std::invalid_argument("simulate_frame: channel length != M");
    if (cfg.modulation_order != 2) throw std::invalid_argument("simulate_frame: only QPSK is supported");
    if (!(channel.noise_variance >= 0.0)) throw std::invalid_argument("simulate_frame: negative noise variance");

    Rng rng(seed);
    Bits payload(cfg.payload_bits);
    for (std::size_t i = 0; i < payload.size(); i += 64) {
        std::uint64_t word = rng();
        for (std::size_t j = i; j < std::min(payload.size(), i + 64); ++j, word >>= 1) payload[j] = word & 1u;
    }

    const Bits coded = codec.encode(payload);
    const Interleaver pi(coded.size(), interleaver_seed);
    const Bits permuted = pi.interleave<std::uint8_t>(coded);
    const Bits matched = rate_match(permuted, cfg.coded_positions());
    const auto symbols = modulate_qpsk(matched);

    const double sigma2 = channel.noise_variance;
    std::vector<double> gamma(M);
    for (std::size_t m = 0; m < M; ++m) {
        gamma[m] = sigma2 > 0.0 ? std::norm(channel.h[m]) / sigma2 : std::numeric_limits<double>::infinity();
    }

    std::normal_distribution<double> gauss(0.0, 1.0);
    const double noise_sd = std::sqrt(sigma2 / 2.0);
    std::vector<double> llrs(matched.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        // Time-first: the S symbols of subcarrier m are consecutive, so the two
        // copies of a repeated bit sit about L / (2S) subcarriers apart.
        const std::size_t m = i / cfg.frame_symbols;
        const std::complex<double> h = channel.h[m];
        std::complex<double> y = h * symbols[i];
        if (sigma2 > 0.0) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            y += std::complex<double>{noise_sd * re, noise_sd * im};
        }
        const auto llr = demap_llr(y / h, gamma[m]);
        if (!llr) return 1;
        llrs[2 * i] = llr->in_phase;
        llrs[2 * i + 1] = llr->quadrature;
    }

    const auto accumulated = derate_match(llrs, coded.size());
    const auto soft = pi.deinterleave<double>(accumulated);
    const Bits decoded = codec.decode(soft, payload.size());
    return decoded == payload ? 0 : 1;
}

int simulate_frame(const LinkConfig& cfg, const ChannelRealization& channel, const Codec& codec,
                   std::uint64_t interleaver_seed, std::uint64_t seed) {
    return FrameSimulator{codec, interleaver_seed}.simulate_frame(cfg, channel, seed);
}

FepEstimate estimate_fep_mc(const LinkConfig& cfg, const ChannelRealization& channel, const Codec& codec,
                            std::size_t trials, std::uint64_t seed, std::uint64_t interleaver_seed) {
    if (trials == 0) throw std::invalid_argument("estimate_fep_mc: trials must be >= 1");
    const FrameSimulator sim{codec, interleaver_seed};
    std::size_t errors = 0;
    for (std::size_t r = 0; r < trials; ++r) {
        errors += static_cast<std::size_t>(sim.simulate_frame(cfg, channel, derive_seed(seed, cfg.config_id, r)));
    }
    return {static_cast<double>(errors) / static_cast<double>(trials), trials};
}

std::size_t count_uncoded_bit_errors(double gamma, std::size_t bits, std::uint64_t seed) {
    if (!(gamma > 0.0)) throw std::invalid_argument("count_uncoded_bit_errors: gamma must be > 0");
    Rng rng(seed);
    const std::size_t n = bits + (bits % 2);
    Bits tx(n);
    for (auto& b : tx) b = static_cast<std::uint8_t>(rng() >> 63);
    const auto symbols = modulate_qpsk(tx);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double noise_sd = std::sqrt(1.0 / (2.0 * gamma)); // sigma^2 = 1/gamma with |h| = 1
    std::size_t errors = 0;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        const auto y = symbols[i] + std::complex<double>{noise_sd * re, noise_sd * im};
        const auto llr = demap_llr(y, gamma);
        const std::uint8_t b_i = llr->in_phase < 0.0 ? 1 : 0;
        const std::uint8_t b_q = llr->quadrature < 0.0 ? 1 : 0;
        if (2 * i < bits) errors += b_i != tx[2 * i];
        if (2 * i + 1 < bits) errors += b_q != tx[2 * i + 1];
    }
    return errors;
}

} // namespace feplab

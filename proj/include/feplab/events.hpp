#pragma once

#include "feplab/channel.hpp"
#include "feplab/codec.hpp"
#include "feplab/core.hpp"
#include "feplab/oracle.hpp"

#include <memory>
#include <optional>
#include <string>

namespace feplab {

/// Producer of binary frame error events for one configuration given the
/// per-subcarrier SINRs of a block-fading frame. With perfect channel
/// knowledge and zero-forcing the SINR vector is all the receiver sees, so it
/// fully specifies the channel. Everything above this interface (curves,
/// datasets, evaluation) is shared between the link chain and the oracles.
class EventSource {
public:
    virtual ~EventSource() = default;
    virtual std::string name() const = 0;
    virtual int frame_event(const LinkConfig& cfg, const SinrVector& sinr, std::uint64_t seed) const = 0;
    /// True FEP when known analytically; nullopt for simulated sources.
    virtual std::optional<double> true_fep(const LinkConfig& cfg, const SinrVector& sinr) const = 0;
};

class LinkEventSource final : public EventSource {
public:
    LinkEventSource(std::shared_ptr<const Codec> codec, std::uint64_t interleaver_seed);

    std::string name() const override { return "link"; }
    int frame_event(const LinkConfig& cfg, const SinrVector& sinr, std::uint64_t seed) const override;
    std::optional<double> true_fep(const LinkConfig&, const SinrVector&) const override { return std::nullopt; }

    const Codec& codec() const { return *codec_; }
    std::uint64_t interleaver_seed() const { return interleaver_seed_; }

private:
    std::shared_ptr<const Codec> codec_;
    std::uint64_t interleaver_seed_;
};

class OracleEventSource final : public EventSource {
public:
    explicit OracleEventSource(OracleSpec spec);

    std::string name() const override { return "oracle"; }
    int frame_event(const LinkConfig& cfg, const SinrVector& sinr, std::uint64_t seed) const override;
    std::optional<double> true_fep(const LinkConfig& cfg, const SinrVector& sinr) const override;

    const OracleSpec& spec() const { return spec_; }

private:
    OracleSpec spec_;
};

} // namespace feplab

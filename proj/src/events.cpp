#include "feplab/events.hpp"

#include "feplab/link.hpp"

namespace feplab {

LinkEventSource::LinkEventSource(std::shared_ptr<const Codec> codec, std::uint64_t interleaver_seed)
    : codec_(std::move(codec)), interleaver_seed_(interleaver_seed) {
    if (!codec_) throw ConfigError("link event source: no codec");
}

int LinkEventSource::frame_event(const LinkConfig& cfg, const SinrVector& sinr, std::uint64_t seed) const {
    return simulate_frame(cfg, ChannelRealization::from_sinrs(sinr), *codec_, interleaver_seed_, seed);
}

OracleEventSource::OracleEventSource(OracleSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

int OracleEventSource::frame_event(const LinkConfig& cfg, const SinrVector& sinr, std::uint64_t seed) const {
    return bernoulli_event(oracle_fep(spec_, cfg.config_id, sinr), seed);
}

std::optional<double> OracleEventSource::true_fep(const LinkConfig& cfg, const SinrVector& sinr) const {
    return oracle_fep(spec_, cfg.config_id, sinr);
}

} // namespace feplab

#pragma once

#include "feplab/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace feplab {

// Line-oriented dataset text format.
//
//   #fepds v1 M=<int> K=<int> rates=<r1,...,rK> S=<int> J=<int>
//   <avg_snr_db> <seed_hex> <events> <M SINR dB values>
//
// `events` is a K-character string of '0', '1' or '-' (unobserved). SINR dB
// values carry 6 significant digits; records should be storage-canonical
// (see SinrVector::storage_canonical) for a bit-exact round trip.

std::string format_dataset_header(const ConfigSet& configs);
std::string format_record(const FrameObservation& record);

void write_dataset(std::ostream& out, const Dataset& dataset);
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);

/// Throws DataError naming the source, line and byte offset of the first
/// malformed field.
Dataset read_dataset(std::istream& in, const std::string& source_name = "<stream>");
Dataset read_dataset(const std::filesystem::path& path);

} // namespace feplab

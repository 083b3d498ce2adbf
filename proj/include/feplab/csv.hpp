#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace feplab {

/// Numeric CSV table with a fixed header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Reads a table and checks its header against `expected_header`. Throws
/// DataError on a schema mismatch, ragged row or non-numeric cell.
CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected_header);

} // namespace feplab

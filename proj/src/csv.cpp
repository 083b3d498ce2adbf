#include "feplab/csv.hpp"

#include "feplab/core.hpp"
#include "storage_format.hpp"

#include <algorithm>
#include <fstream>

namespace feplab {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!cell.empty() && (cell.front() == ' ')) cell.remove_prefix(1);
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.remove_suffix(1);
        out.push_back(cell);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

} // namespace

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("csv: no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << detail::format_significant(row[i], 9);
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
    for (auto cell : split_commas(line)) table.header.emplace_back(cell);
    if (table.header != expected_header) throw DataError(path.string() + ":1: unexpected CSV header");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_commas(line);
        if (cells.size() != table.header.size()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) + " columns");
        }
        std::vector<double> row;
        for (auto cell : cells) {
            auto v = detail::parse_number<double>(cell);
            if (!v) throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                                    std::string(cell) + "'");
            row.push_back(*v);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace feplab

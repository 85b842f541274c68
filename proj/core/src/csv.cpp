#include "terra/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "terra/error.hpp"

namespace terra::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw IoError("CSV column '" + name + "' not found");
}

std::string format_exact(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string format_sig(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
    return buf;
}

void ensure_parent(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

void write(const Table& table, const std::string& path) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_exact(row[i]);
        }
        out << '\n';
    }
    if (!out) throw IoError("write to '" + path + "' failed");
}

Table read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    Table table;
    std::string line;
    if (!std::getline(in, line)) throw CorruptFileError("'" + path + "' is empty");
    table.header = split_line(line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != table.header.size()) {
            throw CorruptFileError("'" + path + "' line " + std::to_string(line_no) +
                                   ": expected " + std::to_string(table.header.size()) +
                                   " cells, got " + std::to_string(cells.size()));
        }
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto& cell = cells[i];
            auto res = std::from_chars(cell.data(), cell.data() + cell.size(), row[i]);
            if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
                throw CorruptFileError("'" + path + "' line " + std::to_string(line_no) +
                                       ": bad number '" + cell + "'");
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace terra::csv

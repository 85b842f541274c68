// Minimal numeric CSV tables: one header row, then rows of doubles.
#pragma once

#include <string>
#include <vector>

namespace terra::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Column index by name; throws IoError if absent.
    std::size_t column(const std::string& name) const;
};

/// Shortest text that parses back to exactly `value` (17 significant digits
/// at most).
std::string format_exact(double value);

/// Fixed significant-digit formatting for human-facing report tables.
std::string format_sig(double value, int digits);

void write(const Table& table, const std::string& path);
Table read(const std::string& path);

/// Ensures the parent directory of `path` exists.
void ensure_parent(const std::string& path);

} // namespace terra::csv

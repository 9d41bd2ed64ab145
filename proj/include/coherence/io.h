// io.h - number formatting, CSV tables and atomic file output
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace coh {

/// 17 significant digits; round-trips every finite double. NaN prints as "nan".
std::string fmt_double(double v);

/// Full-string parse (accepts "nan", "inf"). Returns false on any trailing junk.
bool parse_double(std::string_view s, double& out);

/// Comma-separated table with optional '#' comment lines before the header row.
struct CsvTable {
    std::vector<std::string> comments;  ///< comment lines without the leading '#'
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws ParseError when absent.
    std::size_t column(std::string_view name) const;
    double number(std::size_t row, std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv_file(const std::string& path);

std::string read_text_file(const std::string& path);

/// Writes to a sibling temporary file and renames it over `path`.
/// Throws IoError when the directory is not writable.
void write_file_atomic(const std::string& path, std::string_view content);

} // namespace coh

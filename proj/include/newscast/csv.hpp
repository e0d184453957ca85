#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace newscast::csv {

struct Row {
    std::size_t line = 0;  // 1-based line where the record starts
    std::vector<std::string> fields;
};

/// RFC-4180 parsing: quoted fields may contain commas, doubled quotes and
/// line breaks. CRLF and LF line endings are both accepted. Blank lines are
/// skipped. Throws FormatError on an unterminated quote.
std::vector<Row> parse(std::string_view text);

/// Reads and parses a file; throws IoError when it cannot be opened.
std::vector<Row> read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest round-trip decimal representation of a double.
std::string format_real(double value);

/// Parses a full field as a finite double; false on any trailing garbage.
bool parse_real(std::string_view text, double& out);

/// Writes `content` to a sibling temp file then renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace newscast::csv

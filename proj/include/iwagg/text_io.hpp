#pragma once

#include "json.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace iwagg {

using Json = nlohmann::ordered_json;

/// Decimal text with 17 significant digits (round-trips every double).
std::string format_double(double value);

/// JSON text with every floating value printed via format_double.
std::string dump_json(const Json& value, int indent = 2);

/// Parsed CSV: header names plus rows of raw cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Reads a comma-separated file with a header line. Fails with MissingFile
/// if absent and MalformedFile on ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

/// Parses a cell as a finite-or-not double; MalformedFile on garbage.
double parse_double(std::string_view cell, const std::filesystem::path& file, std::size_t row);

std::string read_text_file(const std::filesystem::path& path);

/// Writes via a temp file + rename; IoFailure on any error.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

Json read_json_file(const std::filesystem::path& path);

}  // namespace iwagg

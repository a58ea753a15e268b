#pragma once

#include "tractequity/types.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tractequity {

using Json = nlohmann::ordered_json;

/// Delimited text with a header row. Comma, tab or semicolon delimiters are
/// detected from the header; lines starting with '#' are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  std::optional<std::size_t> find(std::string_view column) const;
  std::size_t column(std::string_view column) const;  // throws ParseError
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, const std::string& source = "<memory>");

/// Numeric cell. Empty, NA, NaN and null map to NaN; anything else that is
/// not a complete number yields nullopt.
std::optional<double> parse_cell(std::string_view cell);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);
Json read_json(const std::filesystem::path& path);

/// Shortest round-trip decimal form; identical bytes for identical doubles.
std::string format_number(double v);
std::string format_fixed(double v, int decimals);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Provenance stamped on every artifact written by the pipeline.
struct RunStamp {
  std::string config_hash = "none";
  std::uint64_t seed = 0;
};

std::string csv_header_comment(const RunStamp& stamp);
Json json_stamp(const RunStamp& stamp);

std::string csv_escape(std::string_view field);

}  // namespace tractequity

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rldk {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Strict parse of a full field; throws ParseError tagged with `line`.
double parse_double(std::string_view text, std::size_t line = 0);
long long parse_integer(std::string_view text, std::size_t line = 0);

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');
std::string_view trim(std::string_view text);

/// Numeric table with one header row. Lines starting with '#' are comments
/// and are kept verbatim (without the leading '#').
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column; throws ParseError if absent.
  std::size_t column(std::string_view name) const;
  std::vector<double> column_values(std::string_view name) const;
};

CsvTable read_csv_table(const std::filesystem::path& path);
CsvTable parse_csv_table(std::string_view text);
void write_csv_table(const std::filesystem::path& path, const CsvTable& table);

/// Creates parent directories and writes `text`, throwing IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace rldk

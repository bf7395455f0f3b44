#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hcm {

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);
// Strict full-string parse; throws DataError naming `context` on failure.
double parse_double(std::string_view text, std::string_view context);

// Numeric table with a header row.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(std::string_view name) const;  // throws DataError
  bool has_column(std::string_view name) const;
  std::vector<double> column(std::string_view name) const;
  void add_row(std::vector<double> row);
};

void write_csv(const Table& table, const std::filesystem::path& path);
// Throws DataError with the 1-based line number for malformed input.
Table read_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);
// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

std::string sha256_hex(const std::filesystem::path& path);

}  // namespace hcm

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace collab {

/// A CSV file held as text cells. Columns are typed later by the schema.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t num_rows() const { return rows.size(); }
  std::size_t num_columns() const { return header.size(); }
  std::optional<std::size_t> find_column(std::string_view name) const;
  std::size_t column_index(std::string_view name) const;  // throws Config

  RawTable select_rows(const std::vector<std::size_t>& indices) const;
};

RawTable parse_csv(std::istream& in);
RawTable read_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const RawTable& table);

/// Splits one CSV record. Double-quoted fields may contain commas and "".
std::vector<std::string> split_csv_line(std::string_view line);

/// Parses a decimal number; nullopt when the cell is not entirely numeric.
std::optional<double> parse_number(std::string_view text);

/// Writes `contents` to `path` via a sibling temporary file and a rename, so
/// a failed run never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace collab

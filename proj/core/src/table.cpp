#include "collab/table.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "collab/error.hpp"

namespace collab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool needs_quotes(std::string_view cell) {
  return cell.find_first_of(",\"\n") != std::string_view::npos;
}

}  // namespace

std::optional<std::size_t> RawTable::find_column(std::string_view name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  return std::nullopt;
}

std::size_t RawTable::column_index(std::string_view name) const {
  auto idx = find_column(name);
  if (!idx) throw Error(ErrorCategory::Config, "column '" + std::string(name) + "' not found in table");
  return *idx;
}

RawTable RawTable::select_rows(const std::vector<std::size_t>& indices) const {
  RawTable out;
  out.header = header;
  out.rows.reserve(indices.size());
  for (std::size_t i : indices) out.rows.push_back(rows.at(i));
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.emplace_back(trim(cell));
  return cells;
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

RawTable parse_csv(std::istream& in) {
  RawTable table;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw Error(ErrorCategory::Schema, "CSV line " + std::to_string(line_no) + " has " +
                                             std::to_string(cells.size()) + " fields, expected " +
                                             std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw Error(ErrorCategory::Schema, "CSV input has no header row");
  return table;
}

RawTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open '" + path.string() + "'");
  return parse_csv(in);
}

void write_csv(std::ostream& out, const RawTable& table) {
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) out << ',';
      if (needs_quotes(cells[j])) {
        out << '"';
        for (char c : cells[j]) {
          if (c == '"') out << '"';
          out << c;
        }
        out << '"';
      } else {
        out << cells[j];
      }
    }
    out << '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) emit(row);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCategory::Io, "cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorCategory::Io, "write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCategory::Io, "cannot move output into place at '" + path.string() + "'");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace collab

#pragma once

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "oobad/error.hpp"

namespace oobad {

/// A parsed CSV file: header plus rectangular string cells. The raw text of
/// every record is retained so rows can be written back verbatim.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string raw_header;
  std::vector<std::string> raw_rows;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return header.size(); }

  std::size_t column_index(std::string_view name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw ConfigError("no column named '" + std::string(name) + "'");
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits one logical record starting at `pos`. Quoted fields may contain
// commas, doubled quotes and newlines. Advances `pos` past the terminator and
// increments `line` for every physical newline consumed.
inline std::vector<std::string> split_record(std::string_view text, std::size_t& pos,
                                             std::size_t& line, std::string& raw) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  bool was_quoted = false;
  const std::size_t start = pos;
  const std::size_t start_line = line;
  while (pos < text.size()) {
    const char ch = text[pos];
    if (quoted) {
      if (ch == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          cell.push_back('"');
          pos += 2;
          continue;
        }
        quoted = false;
      } else {
        if (ch == '\n') ++line;
        cell.push_back(ch);
      }
      ++pos;
      continue;
    }
    if (ch == '"') {
      if (!trim(cell).empty())
        throw DataError("stray quote in unquoted field at line " + std::to_string(line));
      cell.clear();
      quoted = true;
      was_quoted = true;
      ++pos;
    } else if (ch == ',') {
      cells.push_back(was_quoted ? cell : std::string(trim(cell)));
      cell.clear();
      was_quoted = false;
      ++pos;
    } else if (ch == '\n' || (ch == '\r' && (pos + 1 == text.size() || text[pos + 1] == '\n'))) {
      if (ch == '\r') ++pos;
      break;
    } else {
      cell.push_back(ch);
      ++pos;
    }
  }
  if (quoted) throw DataError("unterminated quoted field starting at line " + std::to_string(start_line));
  cells.push_back(was_quoted ? cell : std::string(trim(cell)));
  std::size_t end = pos;
  if (end > start && text[end - 1] == '\r') --end;
  raw.assign(text.substr(start, end - start));
  if (pos < text.size()) {
    ++pos;  // newline
    ++line;
  }
  return cells;
}

}  // namespace detail

/// Parses CSV text (comma delimiter, optional double-quote quoting). The first
/// record is the header. Blank lines are skipped. Ragged rows are an error
/// naming the offending data row and its line number.
inline CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t pos = 0;
  std::size_t line = 1;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;  // UTF-8 BOM

  auto skip_blank = [&] {
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      if (!detail::trim(text.substr(pos, eol - pos)).empty()) return;
      pos = eol + 1;
      ++line;
    }
  };

  skip_blank();
  if (pos >= text.size()) throw DataError("empty CSV input: header row required");
  table.header = detail::split_record(text, pos, line, table.raw_header);
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c].empty()) throw DataError("empty column name in header at position " + std::to_string(c));
    for (std::size_t d = 0; d < c; ++d)
      if (table.header[d] == table.header[c]) throw DataError("duplicate column name '" + table.header[c] + "'");
  }

  for (;;) {
    skip_blank();
    if (pos >= text.size()) break;
    const std::size_t record_line = line;
    std::string raw;
    auto cells = detail::split_record(text, pos, line, raw);
    if (cells.size() != table.header.size()) {
      throw DataError("ragged row " + std::to_string(table.rows.size()) + " (line " +
                      std::to_string(record_line) + "): expected " + std::to_string(table.header.size()) +
                      " cells, found " + std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
    table.raw_rows.push_back(std::move(raw));
  }
  return table;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

/// Quotes a cell only when it needs it.
inline std::string csv_escape(std::string_view cell) {
  if (cell.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char ch : cell) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace oobad

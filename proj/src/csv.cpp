#include "rolegraph/csv.hpp"

#include <istream>
#include <iterator>
#include <ostream>

#include <fmt/format.h>

#include "rolegraph/error.hpp"

namespace rolegraph {

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv_row(std::ostream& out, const CsvRow& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(row[i]);
  }
  out << '\n';
}

std::vector<CsvRow> read_csv(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  std::size_t line = 1;
  std::size_t i = 0;
  bool row_open = false;
  while (i < text.size()) {
    char c = text[i];
    if (c == '"' && field.empty()) {
      ++i;
      row_open = true;
      for (;;) {
        if (i >= text.size()) throw Error(ErrorCode::MalformedLine, fmt::format("line {}: unterminated quote", line));
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (text[i] == '\n') ++line;
        field += text[i++];
      }
      if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        throw Error(ErrorCode::MalformedLine, fmt::format("line {}: text after closing quote", line));
      }
      continue;
    }
    if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      row_open = true;
      ++i;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      row_open = false;
      ++line;
    } else if (c == '"') {
      throw Error(ErrorCode::MalformedLine, fmt::format("line {}: stray quote", line));
    } else {
      field += c;
      row_open = true;
      ++i;
    }
  }
  if (row_open || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rolegraph

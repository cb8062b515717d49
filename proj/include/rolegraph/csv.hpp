#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rolegraph {

using CsvRow = std::vector<std::string>;

// RFC 4180: fields holding a comma, quote or line break are quoted.
std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, const CsvRow& row);

// Strict reader: unterminated quotes or stray characters after a closing
// quote raise Error(MalformedLine). Accepts LF and CRLF line ends.
std::vector<CsvRow> read_csv(std::istream& in);

}  // namespace rolegraph

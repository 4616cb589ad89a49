#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace civl::csv {

/// One parsed record plus the 1-based physical line it started on.
struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF endings.
/// Blank lines are skipped. Lines starting with '#' before the header are
/// treated as comments.
std::vector<Record> read(std::istream& in);

/// Quotes a field only when it needs it.
std::string escape(std::string_view field);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Parses a finite real; trims surrounding blanks. Returns false on failure.
bool parse_double(std::string_view text, double& out);

}  // namespace civl::csv

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace polarnet::csv {

/// Splits one CSV line into fields. Handles double-quoted fields with `""`
/// escapes; embedded newlines are not supported.
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field only when it contains a comma, quote or leading/trailing space.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest decimal form that round-trips to the same double (`%.17g` trimmed).
std::string format_real(double value);

/// Reads all data rows of a CSV stream. When `header` is non-empty the first
/// line must equal it (after trimming `\r`); otherwise no header is expected.
std::vector<std::vector<std::string>> read_rows(std::istream& in, std::string_view header);

}  // namespace polarnet::csv

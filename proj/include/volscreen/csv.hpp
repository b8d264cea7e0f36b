#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace volscreen {

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(std::string_view name) const;          // -1 if absent
  int require_column(std::string_view name) const;  // throws IoError
};

// Plain comma-separated values, no quoting; none of the formats emitted here
// put commas inside fields. Trailing '\r' is stripped so CRLF inputs work.
Table parse_csv(std::string_view text);
Table read_csv(const std::string& path);
std::string to_csv(const Table& t);
void write_csv(const std::string& path, const Table& t);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

// Floats are serialized with 17 significant digits: enough to round-trip an
// IEEE double exactly.
std::string format_g17(double v);
std::string format_fixed(double v, int decimals);

double parse_double(const std::string& s);  // strict; throws IoError
long parse_long(const std::string& s);

}  // namespace volscreen

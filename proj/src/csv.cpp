#include "volscreen/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace volscreen {

int Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int Table::require_column(std::string_view name) const {
  int c = column(name);
  if (c < 0) throw IoError("missing required column: " + std::string(name));
  return c;
}

static std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

Table parse_csv(std::string_view text) {
  Table t;
  std::size_t start = 0;
  bool first = true;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string_view line = (end == std::string_view::npos)
                                ? text.substr(start)
                                : text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) {
      if (first) {
        t.header = split_line(line);
        first = false;
      } else {
        auto row = split_line(line);
        if (row.size() != t.header.size()) {
          throw IoError("csv row has " + std::to_string(row.size()) +
                        " fields, header has " + std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(row));
      }
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  if (first) throw IoError("csv input is empty (missing header)");
  return t;
}

Table read_csv(const std::string& path) {
  return parse_csv(read_text_file(path));
}

std::string to_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i) os << ',';
    os << t.header[i];
  }
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << row[i];
    }
    os << '\n';
  }
  return os.str();
}

void write_csv(const std::string& path, const Table& t) {
  write_text_file(path, to_csv(t));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path);
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s.empty()) throw IoError("empty numeric field");
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw IoError("bad numeric field: '" + s + "'");
  return v;
}

long parse_long(const std::string& s) {
  if (s.empty()) throw IoError("empty integer field");
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) throw IoError("bad integer field: '" + s + "'");
  return v;
}

}  // namespace volscreen

#ifndef RIAL_CSV_HPP
#define RIAL_CSV_HPP

#include "rial/types.hpp"

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace rial {

using CsvField = std::variant<std::string, double, std::int64_t>;
using CsvRow = std::vector<CsvField>;

struct CsvTable {
  std::vector<std::string> comments;  ///< written as "# ..." lines before the header
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

/// Six significant digits, shortest form ("%.6g"); non-finite values are
/// written as nan, inf and -inf.
inline std::string format_decimal(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Quotes a field containing a comma, quote, CR or LF; quotes are doubled.
inline std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string format_field(const CsvField& f) {
  if (const auto* s = std::get_if<std::string>(&f)) return quote_field(*s);
  if (const auto* d = std::get_if<double>(&f)) return format_decimal(*d);
  return std::to_string(std::get<std::int64_t>(f));
}

inline std::string render_csv(const CsvTable& table) {
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].size() != table.header.size()) {
      throw DimensionError("csv: row " + std::to_string(i) + " has " +
                           std::to_string(table.rows[i].size()) +
                           " fields, header has " +
                           std::to_string(table.header.size()));
    }
  }
  std::ostringstream os;
  for (const auto& c : table.comments) os << "# " << c << '\n';
  auto line = [&os](const auto& fields, auto&& fmt) {
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (j) os << ',';
      os << fmt(fields[j]);
    }
    os << '\n';
  };
  line(table.header, [](const std::string& s) { return quote_field(s); });
  for (const auto& row : table.rows) {
    line(row, [](const CsvField& f) { return format_field(f); });
  }
  return os.str();
}

/// Writes the table to path, creating parent directories.
inline void emit_csv(const CsvTable& table, const std::filesystem::path& path) {
  const std::string text = render_csv(table);
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw Error("csv: cannot create directory for " + path.string() + ": " +
                  ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("csv: cannot open " + path.string() + " for writing: " +
                std::strerror(errno));
  }
  out << text;
  out.flush();
  if (!out) throw Error("csv: write failed for " + path.string());
}

}  // namespace rial

#endif  // RIAL_CSV_HPP

#pragma once

// CSV ingest for hourly load files, plus the small text/file helpers shared by
// every writer in the toolkit.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stlf/data.hpp"
#include "stlf/error.hpp"

namespace stlf {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                        s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    out.push_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string format_fixed(double v, int digits) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, ptr);
}

struct CsvSchema {
  std::string timestamp_column = "timestamp";
  std::string load_column = "load";
};

inline LoadSeries parse_load_csv(std::istream& in, const CsvSchema& schema = {},
                                 const std::string& origin = "<input>") {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header_line = line;
      break;
    }
  }
  if (header_line.empty()) throw DataError(origin + ": no data rows");
  header = split(header_line);
  std::size_t ts_col = header.size(), load_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == schema.timestamp_column) ts_col = i;
    if (header[i] == schema.load_column) load_col = i;
  }
  if (ts_col == header.size() || load_col == header.size()) {
    throw DataError(origin + ": header must contain columns '" + schema.timestamp_column +
                    "' and '" + schema.load_column + "'");
  }

  LoadSeries series;
  std::optional<HourStamp> prev;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    const std::string where = origin + ":" + std::to_string(line_no);
    if (fields.size() <= std::max(ts_col, load_col)) {
      throw DataError(where + ": expected " + std::to_string(header.size()) + " columns");
    }
    const auto stamp = parse_timestamp(fields[ts_col]);
    if (!stamp) throw DataError(where + ": unparseable timestamp '" + std::string(fields[ts_col]) + "'");
    const auto value = parse_double(fields[load_col]);
    if (!value) throw DataError(where + ": unparseable load value '" + std::string(fields[load_col]) + "'");
    if (prev) {
      if (*stamp == *prev) throw DataError(where + ": duplicate timestamp " + format_timestamp(*stamp));
      if (*stamp < *prev) throw DataError(where + ": timestamps not in chronological order");
      if (stamp->hours != prev->hours + 1) {
        throw DataError(where + ": gap of " + std::to_string(stamp->hours - prev->hours - 1) +
                        " missing hour(s) before " + format_timestamp(*stamp));
      }
    } else {
      series.start = *stamp;
    }
    prev = stamp;
    series.values.push_back(*value);
  }
  if (series.values.empty()) throw DataError(origin + ": no data rows");
  return series;
}

inline LoadSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file '" + path.string() + "'");
  return parse_load_csv(in, schema, path.string());
}

inline void write_load_csv(std::ostream& out, const LoadSeries& s) {
  out << "timestamp,load\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << format_timestamp(s.stamp_at(i)) << ',' << format_double(s.values[i]) << '\n';
  }
}

// Writes via a sibling temporary file and a rename, so readers never see a
// partially written output.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// FNV-1a, 64 bit. Identifies input files in run manifests.
inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace stlf

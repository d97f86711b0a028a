#include "espp/table_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "espp/version.hpp"

namespace espp {

TableFormat parse_table_format(std::string_view text) {
  std::string t(text);
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (t == "csv") return TableFormat::Csv;
  if (t == "json") return TableFormat::Json;
  if (t == "table") return TableFormat::Table;
  throw std::invalid_argument("format must be csv, json, or table");
}

std::string_view table_format_name(TableFormat format) {
  switch (format) {
    case TableFormat::Csv:
      return "csv";
    case TableFormat::Json:
      return "json";
    case TableFormat::Table:
      return "table";
  }
  return "?";
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

namespace {

char* put_u64(char* p, uint64_t v) {
  auto [end, ec] = std::to_chars(p, p + 20, v);
  (void)ec;
  return end;
}

}  // namespace

void write_count_table(std::ostream& out, const CountTable& table,
                       TableFormat format, uint64_t from) {
  if (from < 2) from = 2;
  char buf[64];
  switch (format) {
    case TableFormat::Csv: {
      out << "n,N\n";
      for (uint64_t n = from; n <= table.max_n; ++n) {
        char* p = put_u64(buf, n);
        *p++ = ',';
        p = put_u64(p, table[n]);
        *p++ = '\n';
        out.write(buf, p - buf);
      }
      break;
    }
    case TableFormat::Json: {
      out << "{\"engine\":\"" << kEngineVersion << "\",\"max_n\":" << table.max_n
          << ",\"counts\":[";
      bool first = true;
      for (uint64_t n = from; n <= table.max_n; ++n) {
        char* p = buf;
        if (!first) *p++ = ',';
        first = false;
        *p++ = '[';
        p = put_u64(p, n);
        *p++ = ',';
        p = put_u64(p, table[n]);
        *p++ = ']';
        out.write(buf, p - buf);
      }
      out << "]}\n";
      break;
    }
    case TableFormat::Table: {
      int width = 1;
      for (uint64_t v = table.max_n; v >= 10; v /= 10) ++width;
      width = std::max(width, 4);
      std::snprintf(buf, sizeof buf, "%*s  %s\n", width, "n", "N(n)");
      out << buf;
      for (uint64_t n = from; n <= table.max_n; ++n) {
        std::snprintf(buf, sizeof buf, "%*llu  %u\n", width,
                      static_cast<unsigned long long>(n), table[n]);
        out << buf;
      }
      break;
    }
  }
}

CountTable read_count_table_csv(std::istream& in) {
  std::vector<std::pair<uint64_t, uint32_t>> rows;
  uint64_t max_n = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (!std::isdigit(static_cast<unsigned char>(line[0]))) {
      if (lineno == 1) continue;  // header
      throw std::runtime_error("malformed count table row: " + line);
    }
    const char* b = line.data();
    const char* e = b + line.size();
    uint64_t n = 0;
    auto r1 = std::from_chars(b, e, n);
    if (r1.ec != std::errc{} || r1.ptr == e || *r1.ptr != ',' || n < 2)
      throw std::runtime_error("malformed count table row: " + line);
    uint32_t c = 0;
    auto r2 = std::from_chars(r1.ptr + 1, e, c);
    if (r2.ec != std::errc{} || r2.ptr != e)
      throw std::runtime_error("malformed count table row: " + line);
    rows.emplace_back(n, c);
    max_n = std::max(max_n, n);
  }
  if (rows.empty()) throw std::runtime_error("empty count table");
  CountTable table(max_n);
  for (auto [n, c] : rows) table.counts[n] = c;
  return table;
}

}  // namespace espp

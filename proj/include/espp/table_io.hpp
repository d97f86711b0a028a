#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "espp/sumprod.hpp"

namespace espp {

enum class TableFormat { Csv, Json, Table };

// Accepts "csv", "json", "table" (case-insensitive).
TableFormat parse_table_format(std::string_view text);
std::string_view table_format_name(TableFormat format);

// 12 significant digits, shortest form ("%.12g").
std::string format_real(double value);

// CSV: "n,N" header then ascending rows for 2 <= n <= max_n.
// JSON: {"engine", "max_n", "counts": [[n, N], ...]}.
// Table: two aligned columns with a header rule.
void write_count_table(std::ostream& out, const CountTable& table,
                       TableFormat format, uint64_t from = 2);

// Parses the CSV form back (header optional). Throws std::runtime_error on
// malformed rows.
CountTable read_count_table_csv(std::istream& in);

}  // namespace espp

// Copyright 2026 The pmcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PMCAL_CSV_HPP_
#define PMCAL_CSV_HPP_

#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pmcal/core.hpp"
#include "pmcal/error.hpp"
#include "pmcal/theory.hpp"

namespace pmcal {

struct CsvSchema {
  std::string outcome_col = "y";
  std::string score_col = "r";
  std::vector<std::string> attr_cols;
  std::optional<std::string> p_star_col;
};

// RFC 4180 records: comma separated, double-quoted fields may contain commas,
// newlines and "" escapes. Accepts LF or CRLF line ends.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // False at end of input.
  bool next(std::vector<std::string>& fields) {
    fields.clear();
    if (in_.peek() == std::char_traits<char>::eof()) return false;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    char ch;
    while (in_.get(ch)) {
      if (quoted) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get(ch);
            field.push_back('"');
          } else {
            quoted = false;
          }
        } else {
          field.push_back(ch);
        }
        continue;
      }
      if (ch == '"' && field.empty() && !was_quoted) {
        quoted = true;
        was_quoted = true;
      } else if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (ch == '\n') {
        break;
      } else if (ch == '\r') {
        if (in_.peek() == '\n') in_.get(ch);
        break;
      } else {
        field.push_back(ch);
      }
    }
    if (quoted) throw ValidationError("unterminated quoted field");
    fields.push_back(std::move(field));
    return true;
  }

 private:
  std::istream& in_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Quotes only fields that need it.
inline std::string quote(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

inline AuditDataset read_csv(std::istream& in, const CsvSchema& schema) {
  if (schema.attr_cols.empty()) throw ConfigError("no attribute columns given");
  CsvReader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header) || (header.size() == 1 && header[0].empty())) {
    throw ValidationError("missing header row");
  }
  auto column = [&](const std::string& name) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (detail::trim(header[c]) == name) return c;
    }
    throw ValidationError("missing column '" + name + "'");
  };
  const std::size_t y_col = column(schema.outcome_col);
  const std::size_t r_col = column(schema.score_col);
  std::optional<std::size_t> p_col;
  if (schema.p_star_col) p_col = column(*schema.p_star_col);
  std::vector<std::size_t> a_cols;
  for (const auto& name : schema.attr_cols) a_cols.push_back(column(name));

  std::vector<Row> rows;
  std::vector<std::string> f;
  std::size_t line = 0;
  while (reader.next(f)) {
    if (f.size() == 1 && f[0].empty()) continue;  // blank line
    ++line;
    if (f.size() != header.size()) {
      throw ValidationError(line, "*",
                            "expected " + std::to_string(header.size()) +
                                " fields, found " + std::to_string(f.size()));
    }
    Row row;
    const auto y = detail::trim(f[y_col]);
    if (y == "0") {
      row.y = 0;
    } else if (y == "1") {
      row.y = 1;
    } else {
      throw ValidationError(line, schema.outcome_col,
                            "outcome '" + std::string(y) + "' is not 0 or 1");
    }
    const auto r = detail::parse_double(f[r_col]);
    if (!r) {
      throw ValidationError(line, schema.score_col,
                            "score '" + f[r_col] + "' is not a number");
    }
    if (!(*r >= 0.0 && *r <= 1.0)) {
      throw ValidationError(line, schema.score_col,
                            "score " + f[r_col] + " outside [0, 1]");
    }
    row.r = *r;
    if (p_col) {
      const auto p = detail::parse_double(f[*p_col]);
      if (!p || !(*p >= 0.0 && *p <= 1.0)) {
        throw ValidationError(line, *schema.p_star_col,
                              "p_star '" + f[*p_col] + "' not in [0, 1]");
      }
      row.p_star = *p;
    }
    for (std::size_t c : a_cols) {
      if (f[c].empty()) {
        row.attrs.emplace_back(std::nullopt);
      } else {
        row.attrs.emplace_back(f[c]);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("no data rows");
  return AuditDataset(schema.attr_cols, rows);
}

inline AuditDataset ingest_csv(const std::string& path,
                               const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_csv(in, schema);
}

// Header: outcome, score, [p_star], attributes..., [extra columns].
// Missing levels are written as empty fields.
inline void write_csv(std::ostream& out, const AuditDataset& data,
                      const CsvSchema& schema,
                      const std::vector<std::pair<std::string,
                                                  std::vector<std::string>>>&
                          extra = {}) {
  out << schema.outcome_col << ',' << schema.score_col;
  const bool with_p = data.has_p_star();
  if (with_p) out << ',' << schema.p_star_col.value_or("p_star");
  for (const auto& name : data.attribute_names()) out << ',' << name;
  for (const auto& [name, values] : extra) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.outcome(i) << ',' << detail::format_double(data.score(i));
    if (with_p) out << ',' << detail::format_double(data.p_star(i));
    for (std::size_t a = 0; a < data.attribute_count(); ++a) {
      const auto& level = data.level(i, a);
      out << ',' << detail::quote(level == kMissingLevel ? "" : level);
    }
    for (const auto& [name, values] : extra) {
      out << ',' << detail::quote(values.at(i));
    }
    out << '\n';
  }
}

struct PlotPoint {
  double x = 0.0;
  std::string series;
  double value = 0.0;
};

// Plot data as x,series,value rows.
inline void write_plot_csv(std::ostream& out,
                           const std::vector<PlotPoint>& points) {
  out << "x,series,value\n";
  for (const auto& p : points) {
    out << detail::format_double(p.x) << ',' << detail::quote(p.series) << ','
        << detail::format_double(p.value) << '\n';
  }
}

// Defined points of a curve under the given series name.
inline void append_curve(std::vector<PlotPoint>& points, const BoundCurve& c,
                         const std::string& series) {
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    if (c.mask[i]) points.push_back({c.grid[i], series, c.values[i]});
  }
}

}  // namespace pmcal

#endif  // PMCAL_CSV_HPP_

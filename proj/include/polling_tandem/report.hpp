#pragma once

// Tabular reporting: a small cell/table model with CSV (RFC-4180-style) and
// markdown renderers, a CSV parser for round-trip checks and the summary
// command, quantile/summary statistics, and the PerformanceReport bundle
// shared by the solvers, the baseline, and the simulation oracle.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polling_tandem/params.hpp"

namespace polling_tandem {

// ---------------------------------------------------------------------------
// Cells and tables

struct Cell {
  enum class Kind { Blank, Text, Number };
  Kind kind = Kind::Blank;
  std::string text;
  double value = 0.0;
  int decimals = 2;

  static Cell blank() { return Cell{}; }
  static Cell of_text(std::string s) {
    Cell c;
    c.kind = Kind::Text;
    c.text = std::move(s);
    return c;
  }
  static Cell of_number(double v, int decimals = 2) {
    Cell c;
    c.kind = Kind::Number;
    c.value = v;
    c.decimals = decimals;
    return c;
  }
  // A number rendered with the shortest representation (used for inputs that
  // the reference tables print without padding, e.g. utilisations "0.5").
  static Cell of_short_number(double v) {
    Cell c = of_number(v);
    c.decimals = -1;
    return c;
  }

  std::string render() const {
    switch (kind) {
      case Kind::Blank:
        return "";
      case Kind::Text:
        return text;
      case Kind::Number: {
        char buf[64];
        if (decimals < 0) {
          std::snprintf(buf, sizeof(buf), "%g", value);
        } else {
          std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
        }
        return buf;
      }
    }
    return "";
  }
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void check_rectangular() const {
    for (const auto& r : rows)
      if (r.size() != header.size())
        throw std::invalid_argument("table row width differs from header");
  }
};

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline std::string render_csv(const Table& t) {
  t.check_rectangular();
  if (t.rows.empty()) throw std::invalid_argument("refusing to render an empty table");
  std::string out;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c) out += ',';
    out += detail::csv_escape(t.header[c]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += detail::csv_escape(row[c].render());
    }
    out += '\n';
  }
  return out;
}

inline std::string render_markdown(const Table& t) {
  t.check_rectangular();
  if (t.rows.empty()) throw std::invalid_argument("refusing to render an empty table");
  std::string out = "|";
  for (const auto& h : t.header) out += " " + h + " |";
  out += "\n|";
  for (std::size_t c = 0; c < t.header.size(); ++c) out += " --- |";
  out += '\n';
  for (const auto& row : t.rows) {
    out += '|';
    for (const auto& cell : row) out += " " + cell.render() + " |";
    out += '\n';
  }
  return out;
}

// Minimal RFC-4180 parser: quoted fields, doubled quotes, CRLF or LF rows.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  auto end_field = [&]() {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&]() {
    end_field();
    rows.push_back(row);
    row.clear();
  };
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char ch = text[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field_started && field.empty()) {
          quoted = true;
          field_started = true;
        } else {
          field += ch;
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        field += ch;
        field_started = true;
    }
  }
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

// Cell texts of a rendered markdown table (header, separator and body rows),
// for cross-format consistency checks.
inline std::vector<std::vector<std::string>> parse_markdown_cells(
    const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t k = line.find('|');
    while (k != std::string::npos) {
      std::size_t next = line.find('|', k + 1);
      if (next == std::string::npos) break;
      std::string cell = line.substr(k + 1, next - k - 1);
      const auto a = cell.find_first_not_of(' ');
      if (a == std::string::npos) {
        cell.clear();
      } else {
        const auto b = cell.find_last_not_of(' ');
        cell = cell.substr(a, b - a + 1);
      }
      cells.push_back(cell);
      k = next;
    }
    rows.push_back(cells);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Summary statistics for error pooling: mean, sample SD, median and upper
// quartile. Quantiles use linear interpolation between order statistics
// (the common "type 7" definition).

struct SummaryStats {
  double mean = 0.0;
  double sd = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
  std::size_t count = 0;
};

inline double quantile_type7(std::vector<double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile level out of range");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline SummaryStats summarize(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("summary of empty sample");
  SummaryStats s;
  s.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = values.size() > 1
             ? std::sqrt(ss / static_cast<double>(values.size() - 1))
             : 0.0;
  std::sort(values.begin(), values.end());
  s.p50 = quantile_type7(values, 0.50);
  s.p75 = quantile_type7(values, 0.75);
  return s;
}

// ---------------------------------------------------------------------------
// PerformanceReport: canonical per-method result bundle.

struct PerformanceReport {
  std::string method;  // "proposed" | "baseline" | "simulation"
  // Indexing: [product][station]
  std::array<std::array<double, 2>, 2> th{};
  std::array<std::array<double, 2>, 2> l{};
  std::array<std::array<double, 2>, 2> w{};
  std::array<double, 2> w_system{};

  // Signed percentage errors against a simulation reference; NaN when absent.
  std::array<double, 2> delta_w2{std::numeric_limits<double>::quiet_NaN(),
                                 std::numeric_limits<double>::quiet_NaN()};
  std::array<double, 2> delta_w{std::numeric_limits<double>::quiet_NaN(),
                                std::numeric_limits<double>::quiet_NaN()};

  // Metadata (zero when not applicable).
  double residual = 0.0;
  std::array<int, 2> caps_used{0, 0};  // per station
  int pmf_cap_used = 0;

  // Every waiting time must be its queue length over its throughput.
  void check_consistency() const {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        if (th[i][j] <= 0.0) continue;
        const double ratio = l[i][j] / th[i][j];
        const double scale = std::max(std::abs(ratio), 1e-300);
        if (std::abs(ratio - w[i][j]) / scale > 1e-12)
          throw std::logic_error("report violates W = L / TH");
      }
  }
};

inline void to_json(nlohmann::json& j, const PerformanceReport& r) {
  auto cell2 = [](const std::array<std::array<double, 2>, 2>& a) {
    return nlohmann::json{{a[0][0], a[0][1]}, {a[1][0], a[1][1]}};
  };
  j = nlohmann::json{{"method", r.method},
                     {"th", cell2(r.th)},
                     {"l", cell2(r.l)},
                     {"w", cell2(r.w)},
                     {"w_system", {r.w_system[0], r.w_system[1]}},
                     {"residual", r.residual},
                     {"caps_used", {r.caps_used[0], r.caps_used[1]}},
                     {"pmf_cap_used", r.pmf_cap_used}};
  if (!std::isnan(r.delta_w2[0]))
    j["delta_w2"] = {r.delta_w2[0], r.delta_w2[1]};
  if (!std::isnan(r.delta_w[0])) j["delta_w"] = {r.delta_w[0], r.delta_w[1]};
}

}  // namespace polling_tandem

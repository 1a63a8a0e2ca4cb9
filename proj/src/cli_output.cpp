#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "qszasz/cli.hpp"

namespace qszasz::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  return std::get<std::string>(c);
}

}  // namespace

void write_csv(const Table& table, std::ostream& out) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
}

void write_json(const Table& table, std::ostream& out) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto& key = table.columns[i];
      if (const auto* n = std::get_if<std::int64_t>(&row[i])) {
        obj[key] = *n;
      } else if (const auto* d = std::get_if<double>(&row[i])) {
        obj[key] = std::isfinite(*d) ? nlohmann::ordered_json(*d) : nlohmann::ordered_json();
      } else {
        obj[key] = std::get<std::string>(row[i]);
      }
    }
    rows.push_back(std::move(obj));
  }
  out << rows.dump(2) << '\n';
}

}  // namespace qszasz::cli

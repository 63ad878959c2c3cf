#pragma once

// Result tables and their CSV / JSON serialization with a provenance header.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hpfrac/error.hpp"

namespace hpfrac::cli {

using json = nlohmann::json;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  json summary = json::object();

  void add(std::vector<json> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width does not match the columns");
    rows.push_back(std::move(row));
  }
};

/// Seventeen significant digits, so a double survives the text round trip.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_cell(const json& v) {
  if (v.is_number_float()) return format_real(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
  return quoted + "\"";
}

/// CSV with '#'-prefixed provenance and summary lines ahead of the header row.
inline std::string render_csv(const Table& table, const json& provenance) {
  std::ostringstream out;
  for (const auto& [key, value] : provenance.items()) {
    out << "# " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  }
  for (const auto& [key, value] : table.summary.items()) out << "# summary." << key << ": " << value.dump() << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
  return out.str();
}

inline std::string render_json(const Table& table, const json& provenance) {
  json doc = {{"provenance", provenance}, {"columns", table.columns}, {"rows", table.rows}, {"summary", table.summary}};
  return doc.dump(2) + "\n";
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path + " for writing", "output");
  file << text;
  file.flush();
  if (!file) throw IoError("failed writing " + path, "output");
}

inline std::string read_file(const std::string& path, const std::string& parameter) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path, parameter);
  std::ostringstream text;
  text << file.rdbuf();
  return text.str();
}

}  // namespace hpfrac::cli

#pragma once

// Parameter schemas for the command line: typed fields with defaults,
// merged from a JSON scenario and from flags (flags win).

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hpfrac/error.hpp"

namespace hpfrac::cli {

using json = nlohmann::json;

enum class Kind { real, integer, boolean, text, reals, integers };

struct Field {
  std::string name;
  Kind kind;
  json fallback;  // null: required
  std::string help;
};

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::real: return "real";
    case Kind::integer: return "integer";
    case Kind::boolean: return "boolean";
    case Kind::text: return "string";
    case Kind::reals: return "list of reals";
    case Kind::integers: return "list of integers";
  }
  return "value";
}

namespace detail {

inline double parse_real(const std::string& s, const std::string& name) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + s + "' is not a real number", name);
  }
  if (used != s.size()) throw ConfigError("'" + s + "' is not a real number", name);
  return v;
}

inline std::int64_t parse_integer(const std::string& s, const std::string& name) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + s + "' is not an integer", name);
  }
  if (used != s.size()) throw ConfigError("'" + s + "' is not an integer", name);
  return v;
}

inline std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) parts.push_back(item);
  return parts;
}

}  // namespace detail

/// Converts a flag string into the JSON value of the field's kind.
inline json from_flag(const Field& f, const std::string& s) {
  switch (f.kind) {
    case Kind::real: return detail::parse_real(s, f.name);
    case Kind::integer: return detail::parse_integer(s, f.name);
    case Kind::boolean:
      if (s == "true" || s == "1" || s == "yes") return true;
      if (s == "false" || s == "0" || s == "no") return false;
      throw ConfigError("'" + s + "' is not a boolean", f.name);
    case Kind::text: return s;
    case Kind::reals: {
      json out = json::array();
      for (const auto& p : detail::split(s)) out.push_back(detail::parse_real(p, f.name));
      return out;
    }
    case Kind::integers: {
      json out = json::array();
      for (const auto& p : detail::split(s)) out.push_back(detail::parse_integer(p, f.name));
      return out;
    }
  }
  throw ConfigError("unsupported field kind", f.name);
}

/// Checks a scenario value against the field's kind; scalars given for a
/// list field become one-element lists.
inline json from_json(const Field& f, const json& v) {
  const auto bad = [&] { return ConfigError(f.name + " must be a " + kind_name(f.kind), f.name); };
  switch (f.kind) {
    case Kind::real:
      if (!v.is_number()) throw bad();
      return v.get<double>();
    case Kind::integer:
      if (!v.is_number_integer()) throw bad();
      return v;
    case Kind::boolean:
      if (!v.is_boolean()) throw bad();
      return v;
    case Kind::text:
      if (!v.is_string()) throw bad();
      return v;
    case Kind::reals:
    case Kind::integers: {
      const json list = v.is_array() ? v : json::array({v});
      json out = json::array();
      for (const json& item : list) {
        if (f.kind == Kind::reals && !item.is_number()) throw bad();
        if (f.kind == Kind::integers && !item.is_number_integer()) throw bad();
        out.push_back(f.kind == Kind::reals ? json(item.get<double>()) : item);
      }
      return out;
    }
  }
  throw bad();
}

/// Resolved parameters of one command.
class Params {
 public:
  Params(json values, std::set<std::string> given) : values_(std::move(values)), given_(std::move(given)) {}

  const json& all() const { return values_; }
  bool given(const std::string& name) const { return given_.count(name) > 0; }

  double real(const std::string& name) const { return at(name).get<double>(); }
  std::int64_t integer(const std::string& name) const { return at(name).get<std::int64_t>(); }
  bool boolean(const std::string& name) const { return at(name).get<bool>(); }
  std::string text(const std::string& name) const { return at(name).get<std::string>(); }
  std::vector<double> reals(const std::string& name) const { return at(name).get<std::vector<double>>(); }
  std::vector<std::int64_t> integers(const std::string& name) const {
    return at(name).get<std::vector<std::int64_t>>();
  }

  std::size_t count(const std::string& name) const {
    const std::int64_t v = integer(name);
    if (v < 0) throw DomainError(name + " must be non-negative", name);
    return static_cast<std::size_t>(v);
  }

  /// Text parameter restricted to a set of choices.
  std::string choice(const std::string& name, const std::vector<std::string>& options) const {
    const std::string v = text(name);
    for (const auto& o : options) {
      if (v == o) return v;
    }
    std::string list;
    for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
    throw ConfigError(name + " must be one of: " + list, name);
  }

 private:
  const json& at(const std::string& name) const {
    const auto it = values_.find(name);
    if (it == values_.end()) throw ConfigError("missing parameter " + name, name);
    return *it;
  }

  json values_;
  std::set<std::string> given_;
};

/// Merges scenario parameters and flags over the defaults of `fields`.
/// Unknown scenario keys and missing required fields raise ConfigError.
inline Params resolve(const std::vector<Field>& fields, const json& scenario,
                      const std::map<std::string, std::string>& flags) {
  if (!scenario.is_null() && !scenario.is_object()) throw ConfigError("params must be an object", "params");
  std::map<std::string, const Field*> by_name;
  for (const Field& f : fields) by_name[f.name] = &f;
  if (scenario.is_object()) {
    for (const auto& [key, value] : scenario.items()) {
      if (!by_name.count(key)) throw ConfigError("unknown parameter " + key, key);
    }
  }
  json values = json::object();
  std::set<std::string> given;
  for (const Field& f : fields) {
    if (const auto it = flags.find(f.name); it != flags.end()) {
      values[f.name] = from_flag(f, it->second);
      given.insert(f.name);
    } else if (scenario.is_object() && scenario.contains(f.name)) {
      values[f.name] = from_json(f, scenario.at(f.name));
      given.insert(f.name);
    } else if (!f.fallback.is_null()) {
      values[f.name] = f.fallback;
    } else {
      throw ConfigError("missing required parameter " + f.name, f.name);
    }
  }
  return Params(std::move(values), std::move(given));
}

}  // namespace hpfrac::cli

#pragma once

// Command-line dispatcher: flags and JSON scenario files resolve to one
// command, whose result table is written as CSV or JSON with provenance.
// Every failure ends in a one-line JSON error record and the exit code of
// its error class.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/commands.hpp"
#include "cli/output.hpp"
#include "cli/schema.hpp"
#include "hpfrac/error.hpp"

namespace hpfrac::cli {

inline constexpr const char* kEpsVariable = "HPFRAC_EPS";

struct Scenario {
  std::string command;
  json params;
  std::string output_path;
  std::string format;
  std::optional<double> eps;
  std::optional<std::uint64_t> seed;
};

namespace detail {

inline void require_keys(const json& object, const std::vector<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where, key);
    }
  }
}

inline Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what(), "scenario");
  }
  if (!doc.is_object()) throw ConfigError("scenario must be a JSON object", "scenario");
  require_keys(doc, {"command", "params", "output", "eps", "seed"}, "scenario");
  Scenario s;
  if (doc.contains("command")) {
    if (!doc["command"].is_string()) throw ConfigError("command must be a string", "command");
    s.command = doc["command"].get<std::string>();
  }
  if (doc.contains("params")) {
    if (!doc["params"].is_object()) throw ConfigError("params must be an object", "params");
    s.params = doc["params"];
  }
  if (doc.contains("output")) {
    const json& out = doc["output"];
    if (!out.is_object()) throw ConfigError("output must be an object", "output");
    require_keys(out, {"path", "format"}, "output");
    if (out.contains("path")) {
      if (!out["path"].is_string()) throw ConfigError("output.path must be a string", "path");
      s.output_path = out["path"].get<std::string>();
    }
    if (out.contains("format")) {
      if (!out["format"].is_string()) throw ConfigError("output.format must be a string", "format");
      s.format = out["format"].get<std::string>();
    }
  }
  if (doc.contains("eps")) {
    if (!doc["eps"].is_number()) throw ConfigError("eps must be a number", "eps");
    s.eps = doc["eps"].get<double>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer", "seed");
    s.seed = doc["seed"].get<std::uint64_t>();
  }
  return s;
}

/// "group name", or a bare group that has a single command.
inline const Command& resolve_command(const std::string& text) {
  if (text.find(' ') != std::string::npos) return find_command(text);
  const Command* only = nullptr;
  for (const Command& c : commands()) {
    if (c.group != text) continue;
    if (only) throw ConfigError("command '" + text + "' needs a subcommand", "command");
    only = &c;
  }
  if (!only) throw ConfigError("unknown command '" + text + "'", "command");
  return *only;
}

inline double default_eps(const Command& c) {
  const char* env = std::getenv(kEpsVariable);
  if (!env || !*env) return c.default_eps;
  return parse_real(env, kEpsVariable);
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string format_from_path(const std::string& path) {
  const std::string suffix = ".json";
  if (path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return "json";
  }
  return "csv";
}

inline void report(std::ostream& err, const std::string& kind, const std::string& parameter,
                   const std::string& message, int code) {
  const json record = {
      {"error", {{"class", kind}, {"parameter", parameter}, {"message", message}, {"exit_code", code}}}};
  err << record.dump() << '\n';
}

struct Globals {
  std::string scenario;
  std::string output;
  std::string format;
  std::optional<double> eps;
  std::optional<std::uint64_t> seed;
  bool no_timestamp = false;
};

inline int dispatch(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Hilfer-Prabhakar fractional calculus toolkit", "hpfrac"};
  app.set_version_flag("--version", HPFRAC_VERSION);
  app.fallthrough();
  Globals g;
  app.add_option("--scenario", g.scenario, "JSON scenario file; flags override its values");
  app.add_option("-o,--output", g.output, "output file (default: standard output)");
  app.add_option("--format", g.format, "csv or json (default: from the output suffix, else csv)");
  app.add_option("--eps", g.eps, std::string("accuracy target (default: $") + kEpsVariable + " or per command)");
  app.add_option("--seed", g.seed, "random seed of simulations");
  app.add_flag("--no-timestamp", g.no_timestamp, "omit the timestamp from the provenance header");

  std::map<std::string, CLI::App*> groups;
  std::map<const Command*, CLI::App*> leaves;
  std::map<const Command*, std::map<std::string, std::string>> raw;
  std::map<const Command*, std::map<std::string, CLI::Option*>> options;
  for (const Command& c : commands()) {
    CLI::App*& group = groups[c.group];
    if (!group) {
      group = app.add_subcommand(c.group, c.group + " commands");
      group->fallthrough();
    }
    CLI::App* leaf = group->add_subcommand(c.name, c.summary);
    leaf->fallthrough();
    leaves[&c] = leaf;
    for (const Field& f : c.fields) {
      const std::string fallback = f.fallback.is_null() ? "required" : "default " + f.fallback.dump();
      options[&c][f.name] = leaf->add_option("--" + f.name, raw[&c][f.name], f.help + " (" + fallback + ")");
    }
  }

  try {
    std::vector<const char*> argv{"hpfrac"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << HPFRAC_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what(), "arguments");
  }

  Scenario scenario;
  if (!g.scenario.empty()) scenario = parse_scenario(read_file(g.scenario, "scenario"));

  const Command* chosen = nullptr;
  for (const auto& [command, leaf] : leaves) {
    if (leaf->parsed()) chosen = command;
  }
  if (chosen) {
    if (!scenario.command.empty() && &resolve_command(scenario.command) != chosen) {
      throw ConfigError("scenario command '" + scenario.command + "' differs from '" + chosen->path() + "'", "command");
    }
  } else if (!scenario.command.empty()) {
    chosen = &resolve_command(scenario.command);
  } else {
    for (const auto& [name, group] : groups) {
      if (group->parsed()) out << group->help();
    }
    if (!std::any_of(groups.begin(), groups.end(), [](const auto& e) { return e.second->parsed(); })) {
      out << app.help();
    }
    throw ConfigError("no command given", "command");
  }

  std::map<std::string, std::string> flags;
  for (const auto& [name, option] : options[chosen]) {
    if (option->count() > 0) flags[name] = raw[chosen][name];
  }
  const Params params = resolve(chosen->fields, scenario.params, flags);

  Context ctx;
  ctx.eps = g.eps ? *g.eps : scenario.eps ? *scenario.eps : default_eps(*chosen);
  if (!(ctx.eps > 0.0) || !std::isfinite(ctx.eps)) throw DomainError("eps must be positive", "eps");
  if (chosen->uses_seed) ctx.seed = g.seed ? g.seed : scenario.seed;

  const std::string path = !g.output.empty() ? g.output : scenario.output_path;
  std::string format = !g.format.empty() ? g.format : !scenario.format.empty() ? scenario.format : format_from_path(path);
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json", "format");

  const Table table = chosen->handler(params, ctx);

  json provenance = {{"tool", "hpfrac"},
                     {"version", HPFRAC_VERSION},
                     {"command", chosen->path()},
                     {"params", params.all()},
                     {"eps", ctx.eps},
                     {"seed", ctx.seed ? json(*ctx.seed) : json(nullptr)}};
  if (!g.no_timestamp) provenance["timestamp"] = utc_timestamp();
  const std::string text = format == "json" ? render_json(table, provenance) : render_csv(table, provenance);
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_file(path, text);
  }
  return 0;
}

}  // namespace detail

/// Runs one command line (without the program name). Results go to `out`
/// unless an output file is named; error records go to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return detail::dispatch(args, out);
  } catch (const Error& e) {
    detail::report(err, e.kind(), e.parameter(), e.what(), e.exit_code());
    return e.exit_code();
  } catch (const std::exception& e) {
    detail::report(err, "InternalError", "", e.what(), 1);
    return 1;
  }
}

}  // namespace hpfrac::cli

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli_app.hpp"

namespace {

namespace fs = std::filesystem;
using hpfrac::cli::json;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = hpfrac::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json error_record(const Outcome& o) { return json::parse(o.err).at("error"); }

class ScratchDir {
 public:
  ScratchDir() : path_(fs::temp_directory_path() / ("hpfrac_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path_);
  }
  ~ScratchDir() { fs::remove_all(path_); }

  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = path_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Data rows of a CSV document (comment lines and the header dropped).
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    rows.push_back(hpfrac::cli::detail::split_csv_line(line));
  }
  return rows;
}

TEST(Cli, ValidateFigureSetEmitsCertificate) {
  const auto o = run_cli({"gfpp", "validate", "--format", "json", "--no-timestamp"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json doc = json::parse(o.out);
  EXPECT_TRUE(doc["summary"]["valid"].get<bool>());
  EXPECT_TRUE(doc["summary"]["violations"].empty());
  ASSERT_EQ(doc["rows"].size(), 2u);
  EXPECT_EQ(doc["rows"][0][1].get<double>(), 0.5);
  EXPECT_EQ(doc["rows"][1][1].get<double>(), 0.25);
}

TEST(Cli, InvalidCertificateStillExitsZero) {
  const auto o = run_cli({"gfpp", "validate", "--mu", "1", "--format", "json"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json doc = json::parse(o.out);
  EXPECT_FALSE(doc["summary"]["valid"].get<bool>());
  EXPECT_EQ(doc["summary"]["violations"], json::array({0}));
}

TEST(Cli, NegativeRhoIsDomainError) {
  const auto o = run_cli({"gfpp", "pmf", "--rho", "-1", "--t", "1"});
  EXPECT_EQ(o.code, 3);
  EXPECT_TRUE(o.out.empty());
  const json e = error_record(o);
  EXPECT_EQ(e["class"], "DomainError");
  EXPECT_EQ(e["parameter"], "rho");
  EXPECT_EQ(e["exit_code"], 3);
}

TEST(Cli, ScenarioSchemaViolationsAreConfigErrors) {
  const ScratchDir dir;
  const auto check = [&](const std::string& text, const std::string& parameter) {
    const auto o = run_cli({"--scenario", dir.write("s.json", text)});
    EXPECT_EQ(o.code, 2) << text;
    EXPECT_EQ(error_record(o)["class"], "ConfigError") << text;
    EXPECT_EQ(error_record(o)["parameter"], parameter) << text;
  };
  check(R"({"command": "gfpp pmf", "params": {"t": [1], "colour": 1}})", "colour");
  check(R"({"command": "gfpp pmf", "params": {"t": [1]}, "note": "x"})", "note");
  check(R"({"command": "gfpp pmf", "params": {"t": "one"}})", "t");
  check(R"({"command": "gfpp pmf", "params": {"t": [1], "k": [0.5]}})", "k");
  check(R"({"command": "gfpp pmf", "params": {}})", "t");
  check(R"({"command": "gfpp pmf", "params": {"t": [1]}, "output": {"colour": "red"}})", "colour");
  check(R"({"command": "gfpp", "params": {"t": [1]}})", "command");
  check(R"({"command": "nope"})", "command");
  check(R"({"command": )", "scenario");
}

TEST(Cli, FlagErrorsAreConfigErrors) {
  for (const auto& args : std::vector<std::vector<std::string>>{{"gfpp", "pmf", "--t", "abc"},
                                                                {"gfpp", "pmf", "--t", "1", "--bogus", "2"},
                                                                {"gfpp", "pmf", "--t", "1", "--format", "xml"},
                                                                {"frobnicate"},
                                                                {}}) {
    const auto o = run_cli(args);
    EXPECT_EQ(o.code, 2);
    EXPECT_EQ(error_record(o)["class"], "ConfigError");
  }
}

TEST(Cli, MissingFilesAreIoErrors) {
  EXPECT_EQ(run_cli({"--scenario", "/nonexistent/s.json"}).code, 5);
  const auto o = run_cli({"gfpp", "mean", "--t", "1", "--output", "/nonexistent/dir/out.csv"});
  EXPECT_EQ(o.code, 5);
  EXPECT_EQ(error_record(o)["class"], "IoError");
}

TEST(Cli, ModuleFailuresKeepTheirExitCodes) {
  const auto o = run_cli({"fel", "solve", "--lambda", "200", "--forcing", "power", "--x", "5"});
  EXPECT_EQ(o.code, 4);
  EXPECT_EQ(error_record(o)["class"], "NonConvergence");
}

TEST(Cli, ErrorClassesHaveDistinctCodesAndNames) {
  using namespace hpfrac;
  const std::vector<std::pair<std::string, int>> seen = {
      {ConfigError("").kind(), ConfigError("").exit_code()},       {DomainError("").kind(), DomainError("").exit_code()},
      {NonConvergence("").kind(), NonConvergence("").exit_code()}, {IoError("").kind(), IoError("").exit_code()},
      {PoleError("").kind(), PoleError("").exit_code()},           {BranchError("").kind(), BranchError("").exit_code()},
      {TailError("").kind(), TailError("").exit_code()},           {ContourError("").kind(), ContourError("").exit_code()},
      {TableError("").kind(), TableError("").exit_code()}};
  std::set<std::string> names;
  std::set<int> codes;
  for (const auto& [name, code] : seen) {
    names.insert(name);
    codes.insert(code);
    EXPECT_NE(code, 0);
  }
  EXPECT_EQ(names.size(), seen.size());
  EXPECT_EQ(codes.size(), seen.size());
  EXPECT_EQ(ConfigError("").exit_code(), 2);
  EXPECT_EQ(DomainError("").exit_code(), 3);
  EXPECT_EQ(NonConvergence("").exit_code(), 4);
  EXPECT_EQ(IoError("").exit_code(), 5);
}

TEST(Cli, FlagsOverrideScenarioValues) {
  const ScratchDir dir;
  const std::string s = dir.write("s.json", R"({"command": "gfpp mean", "params": {"lambda": 1.0, "t": [1.0]},
                                               "output": {"format": "json"}})");
  const json doc = json::parse(run_cli({"--scenario", s, "gfpp", "mean", "--lambda", "2"}).out);
  EXPECT_EQ(doc["provenance"]["params"]["lambda"], 2.0);
  EXPECT_EQ(doc["provenance"]["params"]["t"], json::array({1.0}));
  const json plain = json::parse(run_cli({"--scenario", s}).out);
  EXPECT_EQ(plain["provenance"]["params"]["lambda"], 1.0);
  EXPECT_NE(doc["rows"][0][1], plain["rows"][0][1]);
  // A different subcommand on the line contradicts the file.
  EXPECT_EQ(run_cli({"--scenario", s, "gfpp", "pmf"}).code, 2);
}

TEST(Cli, ProvenanceHeader) {
  const auto o = run_cli({"gfpp", "pmf", "--t", "1", "--k", "0,1"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("# version: " HPFRAC_VERSION), std::string::npos);
  EXPECT_NE(o.out.find("# eps: 1e-12"), std::string::npos);
  EXPECT_NE(o.out.find("# seed: null"), std::string::npos);
  EXPECT_NE(o.out.find("# timestamp: "), std::string::npos);
  EXPECT_NE(o.out.find("\"k\":[0,1]"), std::string::npos);
  const auto quiet = run_cli({"gfpp", "pmf", "--t", "1", "--no-timestamp"});
  EXPECT_EQ(quiet.out.find("timestamp"), std::string::npos);
}

TEST(Cli, EpsPrecedence) {
  const auto eps_of = [](const std::vector<std::string>& args) {
    return json::parse(run_cli(args).out)["provenance"]["eps"].get<double>();
  };
  const std::vector<std::string> base = {"gfpp", "mean", "--t", "1", "--format", "json"};
  ::setenv(hpfrac::cli::kEpsVariable, "1e-9", 1);
  EXPECT_EQ(eps_of(base), 1e-9);
  auto with_flag = base;
  with_flag.insert(with_flag.end(), {"--eps", "1e-7"});
  EXPECT_EQ(eps_of(with_flag), 1e-7);
  ::setenv(hpfrac::cli::kEpsVariable, "tiny", 1);
  EXPECT_EQ(run_cli(base).code, 2);
  ::unsetenv(hpfrac::cli::kEpsVariable);
  EXPECT_EQ(eps_of(base), 1e-12);
  auto negative = base;
  negative.insert(negative.end(), {"--eps", "-1"});
  EXPECT_EQ(run_cli(negative).code, 3);
}

TEST(Cli, CsvCarriesFullPrecision) {
  const auto o = run_cli({"mlf", "eval", "--rho", "0.7", "--mu", "1.3", "--gamma", "0.8", "--z", "-2.5,1.75"});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto rows = csv_rows(o.out);
  ASSERT_EQ(rows.size(), 2u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double z = std::stod(rows[i][0]);
    const auto v = hpfrac::ml3(0.7, 1.3, 0.8, z);
    EXPECT_EQ(std::stod(rows[i][2]), v.value.real());
    EXPECT_EQ(rows[i][6], "true");
  }
}

TEST(Cli, SimulationIsDeterministic) {
  const std::vector<std::string> args = {"gfpp",   "simulate", "--paths",        "4000", "--seed",
                                         "12345", "--t",      "0.5,1",          "--no-timestamp"};
  const auto first = run_cli(args);
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_EQ(first.out, run_cli(args).out);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const auto table = [](const std::string& text) { return text.substr(text.find("\nt,")); };
  EXPECT_EQ(table(first.out), table(run_cli(threaded).out));
  auto other = args;
  other[5] = "54321";
  EXPECT_NE(first.out, run_cli(other).out);
  EXPECT_NE(first.out.find("# seed: 12345"), std::string::npos);
}

TEST(Cli, SimulationWritesEventFile) {
  const ScratchDir dir;
  const std::string events = dir.file("events.csv");
  const auto o = run_cli({"gfpp", "simulate", "--paths", "50", "--seed", "1", "--events", events});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto rows = csv_rows(read(events));
  ASSERT_FALSE(rows.empty());
  for (const auto& row : rows) {
    ASSERT_EQ(row.size(), 3u);
    const double t = std::stod(row[2]);
    EXPECT_GT(t, 0.0);
    EXPECT_LE(t, 1.0);
  }
}

TEST(Cli, OutputFileAndFormatFromSuffix) {
  const ScratchDir dir;
  const std::string path = dir.file("mean.json");
  const auto o = run_cli({"gfpp", "mean", "--t", "1,2", "--output", path});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(o.out.empty());
  const json doc = json::parse(read(path));
  EXPECT_EQ(doc["columns"], json::array({"t", "mean"}));
  EXPECT_EQ(doc["rows"].size(), 2u);
}

TEST(Cli, BareGroupWithOneCommandResolves) {
  const ScratchDir dir;
  const auto o = run_cli({"--scenario", dir.write("s.json", R"({"command": "mlf", "params": {"z": [0.5]}})")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("# command: mlf eval"), std::string::npos);
}

TEST(Cli, RegionPresetsMatchTheLibraryMap) {
  const auto o = run_cli({"region", "map", "--preset", "heat", "--resolution", "40", "--format", "json"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json doc = json::parse(o.out);
  const auto m = hpfrac::constraint_map(1.0, 0.5, -1.0, 0.25, 1.0, {}, 40);
  ASSERT_EQ(doc["rows"].size(), m.modulus.size());
  for (std::size_t c = 0; c < m.modulus.size(); ++c) {
    EXPECT_EQ(doc["rows"][c][2].get<double>(), m.modulus[c]);
    EXPECT_EQ(doc["rows"][c][3].get<int>(), m.indicator[c] ? 1 : 0);
  }
  EXPECT_EQ(doc["summary"]["min_abscissa"].get<double>(), *m.min_abscissa);

  // The gfpp preset differs only in A; overriding A reproduces the heat map.
  const auto gfpp = run_cli({"region", "map", "--preset", "gfpp", "--resolution", "40", "--no-timestamp"});
  const auto overridden =
      run_cli({"region", "map", "--preset", "gfpp", "--A", "1", "--resolution", "40", "--no-timestamp"});
  const auto heat = run_cli({"region", "map", "--preset", "heat", "--resolution", "40", "--no-timestamp"});
  EXPECT_NE(csv_rows(gfpp.out), csv_rows(heat.out));
  EXPECT_EQ(csv_rows(overridden.out), csv_rows(heat.out));
}

TEST(Cli, SignalInputFile) {
  const ScratchDir dir;
  std::ostringstream csv;
  csv << "t,re\n";
  for (int i = 0; i <= 64; ++i) csv << i / 64.0 << ',' << i / 64.0 << '\n';
  const std::string input = dir.write("f.csv", csv.str());
  const auto from_file = run_cli({"op", "apply", "--input", input, "--no-timestamp"});
  const auto built_in = run_cli({"op", "apply", "--exponent", "1", "--intervals", "64", "--no-timestamp"});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(csv_rows(from_file.out), csv_rows(built_in.out));

  const std::string uneven = dir.write("g.csv", "0,0\n0.1,1\n0.3,2\n0.4,3\n");
  EXPECT_EQ(run_cli({"op", "apply", "--input", uneven}).code, 3);
}

TEST(Cli, HelpAndVersionExitZero) {
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_NE(run_cli({"gfpp", "pmf", "--help"}).out.find("--lambda"), std::string::npos);
  EXPECT_EQ(run_cli({"--version"}).out, std::string(HPFRAC_VERSION) + "\n");
}

}  // namespace

#pragma once

// Command table of the command line: parameter schema, default tolerance
// and handler for every subcommand.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hpfrac/fel.hpp"
#include "hpfrac/gfpp.hpp"
#include "hpfrac/heat.hpp"
#include "hpfrac/laplace.hpp"
#include "hpfrac/operators.hpp"
#include "hpfrac/specfun.hpp"

#include "cli/output.hpp"
#include "cli/schema.hpp"

namespace hpfrac::cli {

struct Context {
  double eps = 1e-12;
  std::optional<std::uint64_t> seed;
};

using Handler = std::function<Table(const Params&, const Context&)>;

struct Command {
  std::string group;
  std::string name;
  std::string summary;
  double default_eps;
  bool uses_seed;
  std::vector<Field> fields;
  Handler handler;

  std::string path() const { return group + " " + name; }
};

namespace detail {

inline Field real(std::string name, double fallback, std::string help) {
  return {std::move(name), Kind::real, fallback, std::move(help)};
}
inline Field integer(std::string name, std::int64_t fallback, std::string help) {
  return {std::move(name), Kind::integer, fallback, std::move(help)};
}
inline Field flag(std::string name, bool fallback, std::string help) {
  return {std::move(name), Kind::boolean, fallback, std::move(help)};
}
inline Field text(std::string name, std::string fallback, std::string help) {
  return {std::move(name), Kind::text, std::move(fallback), std::move(help)};
}
inline Field reals(std::string name, std::vector<double> fallback, std::string help) {
  return {std::move(name), Kind::reals, fallback, std::move(help)};
}
inline Field required_reals(std::string name, std::string help) {
  return {std::move(name), Kind::reals, nullptr, std::move(help)};
}
inline Field integers(std::string name, std::vector<std::int64_t> fallback, std::string help) {
  return {std::move(name), Kind::integers, fallback, std::move(help)};
}

inline std::vector<Field> join(std::vector<Field> a, const std::vector<Field>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline std::vector<Field> operator_fields(bool regularized) {
  return {real("gamma", 0.0, "upper Prabhakar parameter"),
          real("mu", 0.5, "order of the derivative"),
          real("nu", 0.0, "Hilfer type"),
          real("rho", 1.0, "kernel exponent"),
          real("omega", 0.0, "real part of omega"),
          real("omega_im", 0.0, "imaginary part of omega"),
          flag("regularized", regularized, "use the regularized derivative")};
}

inline HPOperatorSpec operator_spec(const Params& p) {
  return {p.real("gamma"), p.real("mu"), p.real("nu"), p.real("rho"), cplx(p.real("omega"), p.real("omega_im")),
          p.boolean("regularized")};
}

inline std::vector<Field> model_fields() {
  return {real("lambda", 1.0, "intensity"),
          real("phi", 1.0, "tempering weight"),
          real("gamma", 1.0, "upper parameter"),
          real("rho", 0.25, "inner exponent"),
          real("mu", 0.5, "outer exponent")};
}

inline GfppModel model(const Params& p) {
  GfppModel m{p.real("lambda"), p.real("phi"), p.real("gamma"), p.real("rho"), p.real("mu")};
  m.check();
  return m;
}

/// Complex points from parallel real and imaginary lists (imaginary parts
/// default to zero).
inline std::vector<cplx> complex_points(const Params& p, const std::string& re, const std::string& im) {
  const auto xs = p.reals(re);
  const auto ys = p.reals(im);
  if (!ys.empty() && ys.size() != xs.size()) throw ConfigError(im + " must have as many entries as " + re, im);
  std::vector<cplx> out;
  for (std::size_t i = 0; i < xs.size(); ++i) out.emplace_back(xs[i], ys.empty() ? 0.0 : ys[i]);
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  return cells;
}

/// Uniformly sampled signal from a CSV file with columns t, re and an
/// optional im; '#' lines and a non-numeric header row are skipped.
inline SampledSignal read_signal(const std::string& path) {
  std::istringstream in(read_file(path, "input"));
  std::vector<double> times;
  std::vector<cplx> values;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (cells.size() < 2) throw ConfigError("input rows need t and re columns", "input");
    double t = 0.0;
    try {
      t = ::hpfrac::cli::detail::parse_real(cells[0], "input");
    } catch (const ConfigError&) {
      if (times.empty() && values.empty()) continue;  // header row
      throw;
    }
    times.push_back(t);
    values.emplace_back(parse_real(cells[1], "input"), cells.size() > 2 ? parse_real(cells[2], "input") : 0.0);
  }
  if (times.size() < 4) throw DomainError("input signal needs at least 4 samples", "input");
  if (times.front() != 0.0) throw DomainError("input signal must start at t = 0", "input");
  SampledSignal s;
  s.step = times[1] - times[0];
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - s.step * static_cast<double>(i)) > 1e-9 * std::max(1.0, times[i])) {
      throw DomainError("input signal must be uniformly sampled", "input");
    }
  }
  s.values = std::move(values);
  s.initial_value = s.values.front();
  s.validate();
  return s;
}

inline std::vector<Field> signal_fields(std::string fallback_signal) {
  return {text("input", "", "CSV file with columns t, re[, im]; overrides signal"),
          text("signal", std::move(fallback_signal), "built-in signal: power (t^exponent) or exponential (e^{-rate t})"),
          real("exponent", 1.0, "exponent of the power signal"),
          real("rate", 1.0, "rate of the exponential signal"),
          real("horizon", 1.0, "sampling horizon"),
          integer("intervals", 256, "number of sampling intervals")};
}

inline SampledSignal signal(const Params& p) {
  if (!p.text("input").empty()) return read_signal(p.text("input"));
  const std::string kind = p.choice("signal", {"power", "exponential"});
  const double horizon = p.real("horizon");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive", "horizon");
  const std::size_t n = p.count("intervals");
  if (kind == "power") {
    const double a = p.real("exponent");
    if (!(a >= 0.0)) throw DomainError("power signal needs a non-negative exponent", "exponent");
    return SampledSignal::sample([a](double t) { return cplx(a == 0.0 ? 1.0 : std::pow(t, a)); }, horizon, n);
  }
  const double rate = p.real("rate");
  return SampledSignal::sample([rate](double t) { return cplx(std::exp(-rate * t)); }, horizon, n);
}

inline Table signal_table(const SampledSignal& s) {
  Table t{{"t", "re", "im"}, {}};
  for (std::size_t i = 0; i < s.size(); ++i) t.add({s.time(i), s.values[i].real(), s.values[i].imag()});
  return t;
}

inline const char* method(const ProbabilityValue& v) { return v.via_contour ? "contour" : "series"; }

// ---------------------------------------------------------------- handlers

inline Table mlf_eval(const Params& p, const Context& ctx) {
  const MittagLeffler ml(p.real("rho"), cplx(p.real("mu"), p.real("mu_im")), p.real("gamma"));
  Table t{{"z_re", "z_im", "re", "im", "error_bound", "terms", "accepted"}, {}};
  for (const cplx z : complex_points(p, "z", "z_im")) {
    const SeriesEvaluation v = ml(z, ctx.eps);
    t.add({z.real(), z.imag(), v.value.real(), v.value.imag(), v.error_bound, v.terms_used, v.accepted});
  }
  return t;
}

inline Table op_apply(const Params& p, const Context& ctx) {
  const SampledSignal f = signal(p);
  QuadratureConfig cfg;
  cfg.scheme = p.choice("scheme", {"linear", "rectangular"}) == "linear" ? Scheme::linear : Scheme::rectangular;
  cfg.fd_order = static_cast<int>(p.integer("fd_order"));
  cfg.eps = ctx.eps;
  const HPOperatorSpec spec = operator_spec(p);
  if (p.choice("operation", {"derivative", "integral"}) == "integral") {
    if (!(spec.mu > 0.0)) throw DomainError("mu must be positive", "mu");
    return signal_table(prabhakar_integral(f, spec.kernel(), cfg));
  }
  return signal_table(apply(f, spec, cfg));
}

inline Table heat_solve(const Params& p, const Context& ctx) {
  HeatProblem problem{p.real("K"), operator_spec(p),
                      InitialDatum::gaussian(p.real("variance"), p.real("centre"), p.real("amplitude"))};
  HeatQuadrature quad;
  quad.k_max = p.real("k_max");
  const HeatSolver solver(std::move(problem), ctx.eps, quad);
  Table t{{"x", "t", "re", "im", "error_bound"}, {}, {{"k_max", solver.k_max()}}};
  for (double time : p.reals("t")) {
    for (double x : p.reals("x")) {
      const PhysicalValue v = solver.physical(x, time);
      t.add({x, time, v.value.real(), v.value.imag(), v.error_bound});
    }
  }
  return t;
}

inline Table fel_solve(const Params& p, const Context& ctx) {
  Table t{{"x", "re", "im", "error_bound", "terms"}, {}};
  if (p.choice("model", {"generalized", "classical"}) == "classical") {
    for (double x : p.reals("x")) {
      const FelValue v = classical_fel(p.real("g"), p.real("eta"), x, ctx.eps);
      t.add({x, v.value.real(), v.value.imag(), v.error_bound, v.terms_used});
    }
    return t;
  }
  FelProblem problem;
  problem.spec = operator_spec(p);
  problem.lambda = cplx(p.real("lambda"), p.real("lambda_im"));
  problem.varpi = p.real("varpi");
  problem.kappa = p.real("kappa");
  const std::string forcing = p.choice("forcing", {"zero", "power", "prabhakar"});
  if (forcing == "power") problem.forcing = PowerForcing{p.real("m")};
  if (forcing == "prabhakar") problem.forcing = PrabhakarPowerForcing{p.real("m"), p.real("sigma")};
  for (double x : p.reals("x")) {
    const FelValue v = solve_fel(problem, x, ctx.eps);
    t.add({x, v.value.real(), v.value.imag(), v.error_bound, v.terms_used});
  }
  return t;
}

inline Table gfpp_pmf(const Params& p, const Context& ctx) {
  const GfppSeries series(model(p), ctx.eps);
  Table t{{"t", "k", "value", "error_bound", "method"}, {}};
  for (double time : p.reals("t")) {
    for (std::int64_t k : p.integers("k")) {
      if (k < 0) throw DomainError("k must be non-negative", "k");
      const ProbabilityValue v = series.pmf(static_cast<std::size_t>(k), time);
      t.add({time, k, v.value, v.error_bound, method(v)});
    }
  }
  return t;
}

inline Table gfpp_pgf(const Params& p, const Context& ctx) {
  const GfppSeries series(model(p), ctx.eps);
  Table t{{"t", "v", "value", "error_bound", "method"}, {}};
  for (double time : p.reals("t")) {
    for (double v : p.reals("v")) {
      const ProbabilityValue g = series.pgf(v, time);
      t.add({time, v, g.value, g.error_bound, method(g)});
    }
  }
  return t;
}

inline Table gfpp_mean(const Params& p, const Context&) {
  const GfppModel m = model(p);
  Table t{{"t", "mean"}, {}};
  for (double time : p.reals("t")) t.add({time, mean_count(m, time)});
  return t;
}

inline Table gfpp_fim(const Params& p, const Context&) {
  const GfppModel m = model(p);
  Table t{{"t", "alpha", "value"}, {}};
  for (double time : p.reals("t")) t.add({time, p.real("alpha"), fractional_integral_mean(m, p.real("alpha"), time)});
  return t;
}

inline Table gfpp_validate(const Params& p, const Context&) {
  const ValidityCertificate c = validate(model(p));
  Table t{{"r", "exponent", "satisfied"}, {}};
  for (std::size_t r = 0; r < c.exponents.size(); ++r) {
    const bool ok = std::find(c.violations.begin(), c.violations.end(), r) == c.violations.end();
    t.add({r, c.exponents[r], ok});
  }
  t.summary = {{"valid", c.valid}, {"violations", c.violations}};
  return t;
}

inline Table gfpp_simulate(const Params& p, const Context& ctx) {
  const GfppModel m = model(p);
  const double horizon = p.real("horizon");
  const std::size_t n = p.count("paths");
  if (n < 2) throw DomainError("simulation needs at least 2 paths", "paths");
  std::vector<double> times = p.reals("t");
  if (times.empty()) times.push_back(horizon);
  for (double time : times) {
    if (!(time > 0.0 && time <= horizon)) throw DomainError("observation times must lie in (0, horizon]", "t");
  }
  const std::uint64_t seed = ctx.seed.value_or(0);
  const auto paths = sample_paths(m, horizon, n, seed, static_cast<unsigned>(p.count("threads")));

  const GfppSeries series(m, ctx.eps);
  const double nn = static_cast<double>(n);
  Table t{{"t", "statistic", "empirical", "series", "standard_error", "z_score"}, {}};
  double worst = 0.0;
  const auto row = [&](double time, std::string name, double empirical, double expected, double se) {
    const double z = se > 0.0 ? (empirical - expected) / se : 0.0;
    worst = std::max(worst, std::abs(z));
    t.add({time, std::move(name), empirical, expected, se, z});
  };
  for (double time : times) {
    std::vector<std::size_t> counts;
    counts.reserve(n);
    for (const auto& path : paths) counts.push_back(path.count(time));
    for (std::size_t k = 0; k <= p.count("k_max"); ++k) {
      const double hits = static_cast<double>(std::count(counts.begin(), counts.end(), k));
      const double expected = series.pmf(k, time).value;
      row(time, "p" + std::to_string(k), hits / nn, expected, std::sqrt(expected * (1.0 - expected) / nn));
    }
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t c : counts) {
      sum += static_cast<double>(c);
      sum_sq += static_cast<double>(c) * static_cast<double>(c);
    }
    const double mean = sum / nn;
    const double variance = (sum_sq - nn * mean * mean) / (nn - 1.0);
    row(time, "mean", mean, mean_count(m, time), std::sqrt(std::max(variance, 0.0) / nn));
  }
  t.summary = {{"paths", n}, {"max_abs_z", worst}};

  if (const std::string events = p.text("events"); !events.empty()) {
    std::ostringstream out;
    out << "# seed: " << seed << "\n# horizon: " << format_real(horizon) << "\npath,event,time\n";
    for (const auto& path : paths) {
      for (std::size_t j = 0; j < path.event_times.size(); ++j) {
        out << path.path_index << ',' << j << ',' << format_real(path.event_times[j]) << '\n';
      }
    }
    write_file(events, out.str());
  }
  return t;
}

inline Table laplace_forward(const Params& p, const Context& ctx) {
  const SampledSignal f = signal(p);
  Table t{{"s_re", "s_im", "re", "im", "tail_bound"}, {}};
  for (const cplx s : complex_points(p, "s", "s_im")) {
    const ForwardTransform v = forward_lt(f, s, ctx.eps);
    t.add({s.real(), s.imag(), v.value.real(), v.value.imag(), v.tail_bound});
  }
  return t;
}

inline Table laplace_invert(const Params& p, const Context&) {
  const std::string kind = p.choice("transform", {"kernel", "gfpp_pmf", "gfpp_waiting"});
  Transform F;
  if (kind == "kernel") {
    const MLParams kernel{p.real("rho"), p.real("mu"), p.real("gamma"), cplx(p.real("omega"), p.real("omega_im"))};
    kernel.validate();
    F = [kernel](cplx s) { return kernel_transform_unchecked(kernel, s); };
  } else {
    const GfppModel m = model(p);
    if (kind == "gfpp_pmf") {
      const std::int64_t k = p.integer("k");
      if (k < 0) throw DomainError("k must be non-negative", "k");
      F = [m, k](cplx s) { return pmf_lt_unchecked(m, static_cast<std::size_t>(k), s); };
    } else {
      F = [m](cplx s) { return m.lambda / (::hpfrac::detail::gfpp_symbol(m, s) + m.lambda); };
    }
  }
  ContourConfig cfg;
  cfg.node_count = p.count("nodes");
  Table t{{"t", "re", "im", "error_estimate"}, {}};
  for (double time : p.reals("t")) {
    const LaplaceValue v = invert_lt(F, time, cfg);
    t.add({time, v.value.real(), v.value.imag(), v.error_estimate});
  }
  return t;
}

/// Parameter values of the two figure presets; explicit values win.
inline double preset_value(const Params& p, const std::string& name) {
  if (p.given(name)) return p.real(name);
  const std::string preset = p.choice("preset", {"none", "heat", "gfpp"});
  // heat: A = K k^2 with (K, k) = (1, 1); gfpp: A = lambda (1 - v) with
  // (lambda, v) = (1, 0.5) and omega = -phi = -1.
  if (preset == "heat" && name == "A") return 1.0;
  if (preset == "gfpp" && name == "A") return 0.5;
  if (preset != "none") {
    if (name == "mu") return 0.5;
    if (name == "omega") return -1.0;
    if (name == "rho") return 0.25;
    if (name == "gamma") return 1.0;
  }
  return p.real(name);
}

inline Table region_map(const Params& p, const Context&) {
  const Window w{p.real("x_min"), p.real("x_max"), p.real("y_min"), p.real("y_max")};
  const double A = preset_value(p, "A");
  const double mu = preset_value(p, "mu");
  const cplx omega(preset_value(p, "omega"), p.real("omega_im"));
  const double rho = preset_value(p, "rho");
  const double gamma = preset_value(p, "gamma");
  const ConstraintMap m = constraint_map(A, mu, omega, rho, gamma, w, p.count("resolution"));
  Table t{{"x", "y", "modulus", "indicator", "admissible"}, {}};
  for (std::size_t iy = 0; iy < m.ys.size(); ++iy) {
    for (std::size_t ix = 0; ix < m.xs.size(); ++ix) {
      const std::size_t c = m.index(ix, iy);
      t.add({m.xs[ix], m.ys[iy], m.modulus[c], m.indicator[c] ? 1 : 0, m.admissible[c] ? 1 : 0});
    }
  }
  t.summary = {{"A", A}, {"mu", mu}, {"omega", {omega.real(), omega.imag()}}, {"rho", rho}, {"gamma", gamma},
               {"min_abscissa", m.min_abscissa ? json(*m.min_abscissa) : json(nullptr)}, {"monotone", m.monotone}};
  return t;
}

}  // namespace detail

inline const std::vector<Command>& commands() {
  using namespace detail;
  static const std::vector<Command> table = {
      {"mlf", "eval", "three-parameter Mittag-Leffler function E^gamma_{rho,mu}(z)", kDefaultEps, false,
       {real("rho", 1.0, "rho"), real("mu", 1.0, "real part of mu"), real("mu_im", 0.0, "imaginary part of mu"),
        real("gamma", 1.0, "gamma"), required_reals("z", "real parts of the arguments"),
        reals("z_im", {}, "imaginary parts of the arguments")},
       mlf_eval},
      {"op", "apply", "Hilfer-Prabhakar derivative or Prabhakar integral of a sampled signal", 1e-12, false,
       join(join({text("operation", "derivative", "derivative or integral")}, operator_fields(false)),
            join(signal_fields("power"), {text("scheme", "linear", "product quadrature: linear or rectangular"),
                                          integer("fd_order", 2, "finite-difference order of the outer derivative")})),
       op_apply},
      {"heat", "solve", "time-fractional heat equation on the line with Gaussian data", 1e-8, false,
       join(join({real("K", 1.0, "diffusivity")}, operator_fields(true)),
            {real("variance", 1.0, "variance of the Gaussian datum"), real("centre", 0.0, "centre of the datum"),
             real("amplitude", 1.0, "mass of the datum"), real("k_max", 0.0, "wavenumber cutoff (0: automatic)"),
             required_reals("x", "positions"), required_reals("t", "times")}),
       heat_solve},
      {"fel", "solve", "fractional free-electron laser equation", 1e-12, false,
       join(join({text("model", "generalized", "generalized or classical")}, operator_fields(false)),
            {real("lambda", 0.0, "real part of lambda"), real("lambda_im", 0.0, "imaginary part of lambda"),
             real("varpi", 0.0, "varpi"), real("kappa", 0.0, "initial datum"),
             text("forcing", "zero", "zero, power or prabhakar"), real("m", 1.0, "forcing exponent"),
             real("sigma", 0.0, "upper parameter of the prabhakar forcing"), real("g", 1.0, "classical gain"),
             real("eta", 0.0, "classical detuning"), required_reals("x", "evaluation points")}),
       fel_solve},
      {"gfpp", "pmf", "state probabilities P(N(t) = k)", 1e-12, false,
       join(model_fields(), {required_reals("t", "times"), integers("k", {0}, "states")}), gfpp_pmf},
      {"gfpp", "pgf", "probability generating function G(v, t)", 1e-12, false,
       join(model_fields(), {required_reals("t", "times"), reals("v", {0.5}, "arguments in [-1, 1]")}), gfpp_pgf},
      {"gfpp", "mean", "expected count E N(t)", 1e-12, false,
       join(model_fields(), {required_reals("t", "times")}), gfpp_mean},
      {"gfpp", "simulate", "Monte Carlo renewal paths against the series", 1e-12, true,
       join(model_fields(), {real("horizon", 1.0, "simulation horizon"), integer("paths", 100000, "number of paths"),
                             reals("t", {}, "observation times (default: horizon)"),
                             integer("k_max", 5, "largest state reported"),
                             integer("threads", 0, "worker threads (0: hardware)"),
                             text("events", "", "CSV file for raw event times")}),
       gfpp_simulate},
      {"gfpp", "validate", "validity certificate of the parameters", 1e-12, false, model_fields(), gfpp_validate},
      {"gfpp", "fim", "Riemann-Liouville integral of order alpha of the mean count", 1e-12, false,
       join(model_fields(), {real("alpha", 1.0, "order of the integral"), required_reals("t", "times")}), gfpp_fim},
      {"laplace", "forward", "Laplace transform of a sampled signal", 1e-6, false,
       join(signal_fields("exponential"),
            {required_reals("s", "real parts of s"), reals("s_im", {}, "imaginary parts of s")}),
       laplace_forward},
      {"laplace", "invert", "Talbot inversion of a built-in transform", 1e-12, false,
       {text("transform", "kernel", "kernel, gfpp_pmf or gfpp_waiting"), real("rho", 0.25, "rho"),
        real("mu", 0.5, "mu"), real("gamma", 1.0, "gamma"), real("omega", 0.0, "real part of omega (kernel)"),
        real("omega_im", 0.0, "imaginary part of omega (kernel)"), real("lambda", 1.0, "intensity (gfpp)"),
        real("phi", 1.0, "tempering weight (gfpp)"), integer("k", 0, "state (gfpp_pmf)"),
        integer("nodes", 32, "contour nodes"), required_reals("t", "times")},
       laplace_invert},
      {"region", "map", "modulus constraint |A / (s^mu (1 - omega s^-rho)^gamma)| < 1 over a window", 1e-12, false,
       {text("preset", "none", "none, heat or gfpp"), real("A", 1.0, "numerator"), real("mu", 0.5, "mu"),
        real("omega", -1.0, "real part of omega"), real("omega_im", 0.0, "imaginary part of omega"),
        real("rho", 0.25, "rho"), real("gamma", 1.0, "gamma"), real("x_min", -3.0, "window"),
        real("x_max", 3.0, "window"), real("y_min", -3.0, "window"), real("y_max", 3.0, "window"),
        integer("resolution", 120, "cells per axis")},
       region_map},
  };
  return table;
}

inline const Command& find_command(const std::string& path) {
  for (const Command& c : commands()) {
    if (c.path() == path) return c;
  }
  throw ConfigError("unknown command '" + path + "'", "command");
}

}  // namespace hpfrac::cli

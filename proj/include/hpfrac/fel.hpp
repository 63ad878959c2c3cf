#pragma once

// Series solution of the Hilfer-Prabhakar free-electron-laser problem
//   D y = lambda E^varpi_{rho,mu,omega} y + f,  [E^{-gamma(1-nu)}_{rho,(1-nu)(1-mu),omega} y](0+) = kappa,
// where D is the plain Hilfer-Prabhakar derivative, together with the
// classical FEL integro-differential equation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "hpfrac/detail/numeric.hpp"
#include "hpfrac/error.hpp"
#include "hpfrac/operators.hpp"
#include "hpfrac/specfun.hpp"

namespace hpfrac {

inline constexpr std::size_t kFelMaxTerms = 128;

/// f = 0.
struct ZeroForcing {};

/// f(x) = x^(m-1).
struct PowerForcing {
  double m = 1.0;
};

/// f(x) = x^(m-1) E^sigma_{rho,m}(omega x^rho), with rho and omega of the operator.
struct PrabhakarPowerForcing {
  double m = 1.0;
  double sigma = 0.0;
};

/// f given on a uniform grid starting at 0.
struct SampledForcing {
  SampledSignal samples;
  QuadratureConfig quadrature{};
};

using Forcing = std::variant<ZeroForcing, PowerForcing, PrabhakarPowerForcing, SampledForcing>;

struct FelProblem {
  HPOperatorSpec spec;  // plain flavor; spec.regularized must be false
  cplx lambda = 0.0;
  double varpi = 0.0;
  double kappa = 0.0;
  Forcing forcing = ZeroForcing{};

  void validate() const {
    spec.validate();
    if (spec.regularized) throw DomainError("the FEL problem uses the plain Hilfer-Prabhakar derivative", "regularized");
    if (!detail::is_finite(lambda)) throw DomainError("lambda must be finite", "lambda");
    if (!(varpi >= 0.0) || !std::isfinite(varpi)) throw DomainError("varpi must be non-negative", "varpi");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be non-negative", "kappa");
    if (const auto* p = std::get_if<PowerForcing>(&forcing); p && !(p->m > 0.0)) {
      throw DomainError("forcing exponent m must be positive", "m");
    }
    if (const auto* p = std::get_if<PrabhakarPowerForcing>(&forcing); p && !(p->m > 0.0)) {
      throw DomainError("forcing exponent m must be positive", "m");
    }
    if (const auto* p = std::get_if<SampledForcing>(&forcing)) p->samples.validate();
  }
};

/// Parameters of one Mittag-Leffler term c x^power E^upper_{rho,lower}(omega x^rho).
struct FelTerm {
  double power = 0.0;
  double upper = 0.0;
  double lower = 1.0;
};

/// Term k of the initial-condition series (coefficient kappa lambda^k).
inline FelTerm fel_initial_term(const FelProblem& p, std::size_t k) {
  const double kk = static_cast<double>(k);
  const auto& s = p.spec;
  const double lower = s.nu * (1.0 - s.mu) + s.mu + 2.0 * kk * s.mu;
  return {lower - 1.0, s.gamma + kk * (p.varpi + s.gamma) - s.gamma * s.nu, lower};
}

/// Prabhakar integral applied to the forcing in term k: order mu(2k+1),
/// upper parameter gamma + k(varpi + gamma).
inline MLParams fel_forcing_kernel(const FelProblem& p, std::size_t k) {
  const double kk = static_cast<double>(k);
  return {p.spec.rho, p.spec.mu * (2.0 * kk + 1.0), p.spec.gamma + kk * (p.varpi + p.spec.gamma), p.spec.omega};
}

struct FelValue {
  cplx value{};
  double error_bound = 0.0;
  std::size_t terms_used = 0;
};

namespace detail {

struct TermValue {
  cplx value{};
  double error = 0.0;
};

inline TermValue ml_term(double rho, double lower, double upper, cplx z, double x, double power, cplx scale) {
  const SeriesEvaluation e = ml3(rho, lower, upper, z, 1e-15);
  const cplx factor = scale * std::pow(x, power);
  return {factor * e.value, std::abs(factor) * e.error_bound};
}

// Forcing part of term k at x > 0, without the lambda^k factor.
inline TermValue fel_forcing_term(const FelProblem& p, std::size_t k, double x) {
  const MLParams kernel = fel_forcing_kernel(p, k);
  const double order = kernel.mu.real();
  const cplx z = p.spec.omega * std::pow(x, p.spec.rho);
  return std::visit(
      [&](const auto& f) -> TermValue {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ZeroForcing>) {
          return {};
        } else if constexpr (std::is_same_v<F, PowerForcing>) {
          return ml_term(p.spec.rho, order + f.m, kernel.gamma, z, x, order + f.m - 1.0, std::tgamma(f.m));
        } else if constexpr (std::is_same_v<F, PrabhakarPowerForcing>) {
          return ml_term(p.spec.rho, order + f.m, kernel.gamma + f.sigma, z, x, order + f.m - 1.0, 1.0);
        } else {
          const double pos = x / f.samples.step;
          const auto node = static_cast<std::size_t>(std::llround(pos));
          if (std::abs(pos - static_cast<double>(node)) > 1e-9 * std::max(1.0, pos) || node >= f.samples.size()) {
            throw DomainError("sampled forcing: x must be a grid node inside the sampled range", "x");
          }
          if (node < 3) throw DomainError("sampled forcing: x must be at least 3 steps from 0", "x");
          SampledSignal prefix = f.samples;
          prefix.values.resize(node + 1);
          const SampledSignal out = prabhakar_integral(prefix, kernel, f.quadrature);
          return {out.values.back(), 0.0};
        }
      },
      p.forcing);
}

// Dominating ratio of consecutive terms with the Mittag-Leffler arguments
// dropped: |lambda| x^(2 mu) Gamma(a_k) / Gamma(a_k + 2 mu).
inline double fel_model_ratio(const FelProblem& p, std::size_t k, double x) {
  const double a = fel_initial_term(p, k).lower;
  return std::abs(p.lambda) * std::pow(x, 2.0 * p.spec.mu) *
         std::abs(gamma_ratio_asymptotic(a, 0.0, 2.0 * p.spec.mu));
}

// Sums the k-series term(k) (lambda^k already applied) until the larger of
// the model ratio and the observed ratio of consecutive terms is below 1/2
// and the geometric remainder is below eps relative to the sum.
template <class Term, class Ratio>
FelValue sum_series(Term term, Ratio model_ratio, double eps, std::size_t cap, const char* what) {
  detail::CompensatedSum<cplx> sum;
  double error = 0.0;
  double abs_sum = 0.0;
  double previous = 0.0;
  for (std::size_t k = 0; k < cap; ++k) {
    const TermValue t = term(k);
    if (!is_finite(t.value)) throw NonConvergence(std::string(what) + " series overflowed", "x");
    sum.add(t.value);
    error += t.error;
    const double magnitude = std::abs(t.value);
    abs_sum += magnitude;
    double q = model_ratio(k);
    if (k > 0 && previous > 0.0) q = std::max(q, magnitude / previous);
    if (k > 0 && q < 0.5) {
      const double tail = std::max(magnitude, previous * q) * q / (1.0 - q);
      if (tail <= eps * std::abs(sum.value())) {
        return {sum.value(), tail + error + 4.0 * kUnitRoundoff * abs_sum, k + 1};
      }
    }
    previous = magnitude;
  }
  throw NonConvergence(std::string(what) + " series not certified within " + std::to_string(cap) + " terms", "x");
}

}  // namespace detail

/// y(x) for x > 0 as the truncated double series of the closed-form solution.
inline FelValue solve_fel(const FelProblem& p, double x, double eps = 1e-12) {
  p.validate();
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("FEL solution requires x > 0", "x");
  if (!(eps > 0.0)) throw DomainError("eps must be positive", "eps");
  if (p.kappa == 0.0 && std::holds_alternative<ZeroForcing>(p.forcing)) return {0.0, 0.0, 1};
  const cplx z = p.spec.omega * std::pow(x, p.spec.rho);
  cplx lambda_k = 1.0;
  const auto term = [&](std::size_t k) {
    if (k > 0) lambda_k *= p.lambda;
    detail::TermValue out;
    if (p.kappa != 0.0) {
      const FelTerm t = fel_initial_term(p, k);
      out = detail::ml_term(p.spec.rho, t.lower, t.upper, z, x, t.power, p.kappa * lambda_k);
    }
    const detail::TermValue f = detail::fel_forcing_term(p, k, x);
    out.value += lambda_k * f.value;
    out.error += std::abs(lambda_k) * f.error;
    return out;
  };
  const auto ratio = [&](std::size_t k) { return detail::fel_model_ratio(p, k, x); };
  if (p.lambda == 0.0) {
    const detail::TermValue t = term(0);
    return {t.value, t.error, 1};
  }
  return detail::sum_series(term, ratio, eps, kFelMaxTerms, "FEL");
}

/// y(0+); DomainError when the solution is singular at the origin (kappa > 0
/// with nu < 1, or a forcing with mu + m < 1).
inline cplx fel_initial_value(const FelProblem& p) {
  cplx value = 0.0;
  if (p.kappa != 0.0) {
    if (p.spec.nu < 1.0) throw DomainError("y is singular at 0 when kappa > 0 and nu < 1", "kappa");
    value += p.kappa;
  }
  const auto regular = [&](double m, double scale) {
    const double exponent = p.spec.mu + m - 1.0;
    if (exponent < 0.0) throw DomainError("y is singular at 0 for this forcing exponent", "m");
    if (exponent == 0.0) value += scale / std::tgamma(p.spec.mu + m);
  };
  if (const auto* f = std::get_if<PowerForcing>(&p.forcing)) regular(f->m, std::tgamma(f->m));
  if (const auto* f = std::get_if<PrabhakarPowerForcing>(&p.forcing)) regular(f->m, 1.0);
  return value;
}

/// y on the grid of a sampled forcing, or on [0, horizon] with `intervals`
/// steps otherwise; the first sample is y(0+).
inline SampledSignal solve_fel_grid(const FelProblem& p, double horizon, std::size_t intervals, double eps = 1e-12) {
  p.validate();
  if (const auto* f = std::get_if<SampledForcing>(&p.forcing)) {
    // One Prabhakar integral of the whole forcing grid per k.
    const SampledSignal& g = f->samples;
    const std::size_t n = g.size();
    std::vector<cplx> values(n);
    std::vector<detail::CompensatedSum<cplx>> sums(n);
    FelProblem initial_only = p;
    initial_only.forcing = ZeroForcing{};
    cplx lambda_k = 1.0;
    double previous = 0.0;
    bool done = false;
    for (std::size_t k = 0; k < kFelMaxTerms && !done; ++k) {
      if (k > 0) lambda_k *= p.lambda;
      const SampledSignal part = prabhakar_integral(g, fel_forcing_kernel(p, k), f->quadrature);
      double magnitude = 0.0;
      double total = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        sums[i].add(lambda_k * part.values[i]);
        magnitude = std::max(magnitude, std::abs(lambda_k * part.values[i]));
        total = std::max(total, std::abs(sums[i].value()));
      }
      const double q = k > 0 && previous > 0.0 ? magnitude / previous : 1.0;
      done = p.lambda == 0.0 || magnitude == 0.0 || (q < 0.5 && magnitude * q / (1.0 - q) <= eps * total);
      previous = magnitude;
      if (!done && k + 1 == kFelMaxTerms) throw NonConvergence("sampled FEL series not certified", "x");
    }
    for (std::size_t i = 1; i < n; ++i) {
      values[i] = sums[i].value();
      if (p.kappa != 0.0) values[i] += solve_fel(initial_only, g.time(i), eps).value;
    }
    values[0] = fel_initial_value(p);
    return g.like(std::move(values));
  }
  if (!(horizon > 0.0) || intervals < 3) throw DomainError("grid needs horizon > 0 and at least 3 intervals", "grid");
  const double step = horizon / static_cast<double>(intervals);
  std::vector<cplx> values(intervals + 1);
  for (std::size_t i = 1; i <= intervals; ++i) values[i] = solve_fel(p, step * static_cast<double>(i), eps).value;
  values[0] = fel_initial_value(p);
  SampledSignal out;
  out.step = step;
  out.values = std::move(values);
  out.initial_value = out.values[0];
  return out;
}

/// Samples of the forcing on the grid of y.
inline SampledSignal sample_forcing(const FelProblem& p, const SampledSignal& grid) {
  return std::visit(
      [&](const auto& f) -> SampledSignal {
        using F = std::decay_t<decltype(f)>;
        std::vector<cplx> v(grid.size());
        if constexpr (std::is_same_v<F, SampledForcing>) {
          if (f.samples.size() != grid.size() || f.samples.step != grid.step) {
            throw DomainError("sampled forcing lives on a different grid", "forcing");
          }
          return f.samples;
        } else {
          for (std::size_t i = 0; i < v.size(); ++i) {
            const double x = grid.time(i);
            if constexpr (std::is_same_v<F, PowerForcing>) {
              v[i] = x == 0.0 ? cplx(f.m == 1.0 ? 1.0 : 0.0) : cplx(std::pow(x, f.m - 1.0));
            } else if constexpr (std::is_same_v<F, PrabhakarPowerForcing>) {
              if (x == 0.0) {
                v[i] = f.m == 1.0 ? cplx(1.0) : cplx(0.0);
              } else {
                v[i] = std::pow(x, f.m - 1.0) * ml3(p.spec.rho, f.m, f.sigma, p.spec.omega * std::pow(x, p.spec.rho)).value;
              }
            }
          }
          return grid.like(std::move(v));
        }
      },
      p.forcing);
}

/// max |D y - lambda E^varpi_{rho,mu,omega} y - f| over the grid points at
/// or beyond `from`, with both operators applied by the operators module.
inline double fel_residual(const FelProblem& p, const SampledSignal& y, double from = 0.0,
                           const QuadratureConfig& cfg = {}) {
  p.validate();
  const SampledSignal dy = hilfer_prabhakar_derivative(y, p.spec, cfg);
  const SampledSignal iy = prabhakar_integral(y, {p.spec.rho, p.spec.mu, p.varpi, p.spec.omega}, cfg);
  const SampledSignal f = sample_forcing(p, y);
  double worst = 0.0;
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (y.time(i) < from) continue;
    worst = std::max(worst, std::abs(dy.values[i] - p.lambda * iy.values[i] - f.values[i]));
  }
  return worst;
}

/// Classical FEL equation dy/dx = -i pi g int_0^x (x-t) e^{i eta (x-t)} y(t) dt,
/// y(0) = 1, solved by y(x) = sum_k lambda^k x^(3k) E^(2k)_{1,3k+1}(i eta x)
/// with lambda = -i pi g.
inline FelValue classical_fel(double g, double eta, double x, double eps = 1e-12) {
  if (!(x > 0.0 && x <= 1.0)) throw DomainError("classical FEL is posed on 0 < x <= 1", "x");
  if (!std::isfinite(g) || !std::isfinite(eta)) throw DomainError("g and eta must be finite", "g");
  if (!(eps > 0.0)) throw DomainError("eps must be positive", "eps");
  const cplx lambda(0.0, -std::numbers::pi * g);
  const cplx z(0.0, eta * x);
  if (g == 0.0) return {1.0, 0.0, 1};
  cplx lambda_k = 1.0;
  const auto term = [&](std::size_t k) {
    if (k > 0) lambda_k *= lambda;
    const double kk = static_cast<double>(k);
    return detail::ml_term(1.0, 3.0 * kk + 1.0, 2.0 * kk, z, x, 3.0 * kk, lambda_k);
  };
  const auto ratio = [&](std::size_t k) {
    const double kk = static_cast<double>(k);
    return std::abs(lambda) * x * x * x * std::abs(gamma_ratio_asymptotic(3.0 * kk + 1.0, 0.0, 3.0));
  };
  return detail::sum_series(term, ratio, eps, kFelMaxTerms, "classical FEL");
}

}  // namespace hpfrac

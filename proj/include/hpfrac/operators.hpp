#pragma once

// Discrete Prabhakar integral and the derivatives built on it, acting on
// functions sampled on a uniform grid starting at t = 0.
//
// Convolutions use product integration: the smooth factor is replaced by a
// piecewise constant or piecewise linear interpolant and integrated exactly
// against the kernel, whose first and second primitives are again
// Mittag-Leffler functions. This absorbs the t^(mu-1) singularity at the
// origin without mesh grading.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "hpfrac/detail/numeric.hpp"
#include "hpfrac/error.hpp"
#include "hpfrac/specfun.hpp"

namespace hpfrac {

/// Samples f(0), f(h), ..., f(Nh) plus the right limit f(0+), which the
/// regularized operators use as initial datum.
struct SampledSignal {
  double step = 0.0;
  std::vector<cplx> values;
  cplx initial_value{};

  std::size_t size() const { return values.size(); }
  double time(std::size_t i) const { return step * static_cast<double>(i); }
  double horizon() const { return time(values.size() - 1); }

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("signal step must be positive", "step");
    if (values.size() < 4) throw DomainError("signal needs at least 4 samples", "values");
    for (const cplx& v : values) {
      if (!detail::is_finite(v)) throw DomainError("signal samples must be finite", "values");
    }
    if (!detail::is_finite(initial_value)) throw DomainError("initial value must be finite", "initial_value");
  }

  /// Samples f on [0, horizon] with `intervals` subintervals. f(0+) is
  /// taken from f(0) unless given explicitly.
  static SampledSignal sample(const std::function<cplx(double)>& f, double horizon, std::size_t intervals) {
    SampledSignal s;
    s.step = horizon / static_cast<double>(intervals);
    s.values.resize(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) s.values[i] = f(s.time(i));
    s.initial_value = s.values[0];
    s.validate();
    return s;
  }

  static SampledSignal sample(const std::function<cplx(double)>& f, double horizon, std::size_t intervals,
                              cplx initial_value) {
    SampledSignal s;
    s.step = horizon / static_cast<double>(intervals);
    s.values.resize(intervals + 1);
    s.values[0] = initial_value;
    for (std::size_t i = 1; i <= intervals; ++i) s.values[i] = f(s.time(i));
    s.initial_value = initial_value;
    s.validate();
    return s;
  }

  SampledSignal like(std::vector<cplx> v) const {
    SampledSignal s;
    s.step = step;
    s.values = std::move(v);
    s.initial_value = s.values.empty() ? cplx{} : s.values[0];
    return s;
  }
};

inline SampledSignal operator-(SampledSignal a, const SampledSignal& b) {
  if (a.size() != b.size() || a.step != b.step) throw DomainError("signals live on different grids", "signal");
  for (std::size_t i = 0; i < a.size(); ++i) a.values[i] -= b.values[i];
  a.initial_value -= b.initial_value;
  return a;
}

enum class Scheme { rectangular, linear };

struct QuadratureConfig {
  Scheme scheme = Scheme::linear;
  int fd_order = 2;
  // Acceptance level for every kernel evaluation behind the weights.
  double eps = 1e-12;

  void validate() const {
    if (fd_order != 1 && fd_order != 2) throw ConfigError("fd_order must be 1 or 2", "fd_order");
    if (!(eps > 0.0)) throw DomainError("eps must be positive", "eps");
  }
};

/// Hilfer-Prabhakar derivative parameters. With `regularized` set, nu is
/// ignored entirely.
struct HPOperatorSpec {
  double gamma = 0.0;
  double mu = 0.5;
  double nu = 0.0;
  double rho = 1.0;
  cplx omega = 0.0;
  bool regularized = false;

  void validate() const {
    if (!std::isfinite(gamma) || !std::isfinite(mu) || !std::isfinite(nu) || !std::isfinite(rho) ||
        !detail::is_finite(omega)) {
      throw DomainError("operator parameters must be finite", "spec");
    }
    if (!(gamma >= 0.0)) throw DomainError("gamma must be non-negative", "gamma");
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("mu must lie in (0, 1)", "mu");
    if (!(nu >= 0.0 && nu <= 1.0)) throw DomainError("nu must lie in [0, 1]", "nu");
    if (!(rho > 0.0)) throw DomainError("rho must be positive", "rho");
  }

  MLParams kernel() const { return {rho, mu, gamma, omega}; }
};

namespace detail {

// First and second primitives of a Prabhakar kernel on the grid m h,
// m = 0..n, kept in working precision because the weights are formed from
// their (second) differences.
class KernelMoments {
 public:
  KernelMoments(const MLParams& p, double step, std::size_t n, double eps)
      : first_(n + 1), second_(n + 1) {
    p.validate();
    const MittagLeffler e1(p.rho, p.mu + 1.0, p.gamma);
    const MittagLeffler e2(p.rho, p.mu + 2.0, p.gamma);
    const wcplx mu = widen<wide>(p.mu);
    for (std::size_t m = 1; m <= n; ++m) {
      const wide t = static_cast<wide>(step) * static_cast<wide>(m);
      const cplx z = p.omega * std::pow(static_cast<double>(t), p.rho);
      first_[m] = std::pow(wcplx(t), mu) * checked(e1, z, eps);
      second_[m] = std::pow(wcplx(t), mu + wide{1}) * checked(e2, z, eps);
    }
  }

  const wcplx& first(std::size_t m) const { return first_[m]; }
  const wcplx& second(std::size_t m) const { return second_[m]; }

 private:
  static wcplx checked(const MittagLeffler& ml, cplx z, double eps) {
    const WideEvaluation w = ml.evaluate_wide(z, eps);
    if (!accepted(w.error_bound, static_cast<double>(std::abs(w.value)), eps)) {
      throw NonConvergence("kernel moment not resolved to eps at argument |z| = " + std::to_string(std::abs(z)),
                           "omega");
    }
    return w.value;
  }

  std::vector<wcplx> first_;
  std::vector<wcplx> second_;
};

// (f * k)(t_n) for every n, with f interpolated per scheme.
inline std::vector<cplx> convolve(const std::vector<cplx>& f, const KernelMoments& km, double step, Scheme scheme) {
  const std::size_t size = f.size();
  const wide h = static_cast<wide>(step);
  std::vector<wcplx> w(size);
  std::vector<cplx> out(size, cplx{});
  if (scheme == Scheme::rectangular) {
    // f held at its left-endpoint value on [t_j, t_{j+1}].
    for (std::size_t m = 1; m < size; ++m) w[m] = km.first(m) - km.first(m - 1);
    for (std::size_t n = 1; n < size; ++n) {
      CompensatedSum<wcplx> acc;
      for (std::size_t j = 0; j < n; ++j) acc.add(w[n - j] * widen<wide>(f[j]));
      out[n] = narrow(acc.value());
    }
    return out;
  }
  // Hat-function weights; m = n - j, with the end hats treated separately.
  w[0] = km.second(1) / h;
  for (std::size_t m = 1; m + 1 < size; ++m) {
    w[m] = (km.second(m + 1) - wide{2} * km.second(m) + km.second(m - 1)) / h;
  }
  for (std::size_t n = 1; n < size; ++n) {
    CompensatedSum<wcplx> acc;
    const wcplx last = km.first(n) - (km.second(n) - km.second(n - 1)) / h;
    acc.add(last * widen<wide>(f[0]));
    for (std::size_t j = 1; j <= n; ++j) acc.add(w[n - j] * widen<wide>(f[j]));
    out[n] = narrow(acc.value());
  }
  return out;
}

// Convolution of the derivative of the piecewise linear interpolant of f
// (constant (f_{j+1} - f_j) / h on each cell) with the kernel, integrated
// exactly.
inline std::vector<cplx> convolve_increments(const std::vector<cplx>& f, const KernelMoments& km, double step) {
  const std::size_t size = f.size();
  std::vector<wcplx> w(size);
  for (std::size_t m = 1; m < size; ++m) w[m] = km.first(m) - km.first(m - 1);
  std::vector<cplx> out(size, cplx{});
  for (std::size_t n = 1; n < size; ++n) {
    CompensatedSum<wcplx> acc;
    for (std::size_t j = 0; j < n; ++j) acc.add(w[n - j] * widen<wide>(f[j + 1] - f[j]));
    out[n] = narrow(acc.value() / static_cast<wide>(step));
  }
  return out;
}

inline std::vector<cplx> differentiate(const std::vector<cplx>& g, double step, int order) {
  const std::size_t n = g.size();
  std::vector<cplx> d(n);
  if (order == 1) {
    d[0] = (g[1] - g[0]) / step;
    for (std::size_t i = 1; i < n; ++i) d[i] = (g[i] - g[i - 1]) / step;
    return d;
  }
  d[0] = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * step);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (g[i + 1] - g[i - 1]) / (2.0 * step);
  d[n - 1] = (3.0 * g[n - 1] - 4.0 * g[n - 2] + g[n - 3]) / (2.0 * step);
  return d;
}

inline bool is_identity(double order) { return order == 0.0; }

}  // namespace detail

/// Grid values of the Prabhakar integral (f * e^gamma_{rho,mu,omega})(t_i).
/// The sample at t = 0 is 0.
inline SampledSignal prabhakar_integral(const SampledSignal& f, const MLParams& p, const QuadratureConfig& cfg = {}) {
  f.validate();
  cfg.validate();
  const detail::KernelMoments km(p, f.step, f.size() - 1, cfg.eps);
  return f.like(detail::convolve(f.values, km, f.step, cfg.scheme));
}

/// d/dt of E^{-gamma}_{rho,1-mu,omega} f, for mu in (0, 1).
inline SampledSignal prabhakar_derivative(const SampledSignal& f, const MLParams& p, const QuadratureConfig& cfg = {}) {
  p.validate();
  if (!(p.mu.imag() == 0.0 && p.mu.real() < 1.0)) throw DomainError("derivative order mu must lie in (0, 1)", "mu");
  const SampledSignal g = prabhakar_integral(f, {p.rho, 1.0 - p.mu, -p.gamma, p.omega}, cfg);
  return f.like(detail::differentiate(g.values, f.step, cfg.fd_order));
}

/// E^{-gamma}_{rho,1-mu,omega} applied to f', with f(0+) read from
/// initial_value. The derivative of the piecewise linear interpolant is
/// integrated exactly, so the scheme choice does not enter.
inline SampledSignal regularized_prabhakar_derivative(const SampledSignal& f, const MLParams& p,
                                                      const QuadratureConfig& cfg = {}) {
  f.validate();
  cfg.validate();
  p.validate();
  if (!(p.mu.imag() == 0.0 && p.mu.real() < 1.0)) throw DomainError("derivative order mu must lie in (0, 1)", "mu");
  std::vector<cplx> v = f.values;
  v[0] = f.initial_value;
  const detail::KernelMoments km({p.rho, 1.0 - p.mu, -p.gamma, p.omega}, f.step, f.size() - 1, cfg.eps);
  return f.like(detail::convolve_increments(v, km, f.step));
}

/// Non-regularized Hilfer-Prabhakar derivative
/// E^{-gamma nu}_{rho,nu(1-mu),omega} d/dt E^{-gamma(1-nu)}_{rho,(1-nu)(1-mu),omega} f.
/// A factor whose order vanishes is the identity.
inline SampledSignal hilfer_prabhakar_derivative(const SampledSignal& f, const HPOperatorSpec& spec,
                                                 const QuadratureConfig& cfg = {}) {
  spec.validate();
  f.validate();
  cfg.validate();
  const double inner_order = (1.0 - spec.nu) * (1.0 - spec.mu);
  const double outer_order = spec.nu * (1.0 - spec.mu);
  if (detail::is_identity(outer_order)) return prabhakar_derivative(f, spec.kernel(), cfg);
  if (detail::is_identity(inner_order)) {
    SampledSignal raw = f;
    raw.initial_value = f.values[0];
    return regularized_prabhakar_derivative(raw, spec.kernel(), cfg);
  }
  const std::size_t n = f.size() - 1;
  const detail::KernelMoments inner({spec.rho, inner_order, -spec.gamma * (1.0 - spec.nu), spec.omega}, f.step, n,
                                    cfg.eps);
  const std::vector<cplx> g = detail::convolve(f.values, inner, f.step, cfg.scheme);
  const detail::KernelMoments outer({spec.rho, outer_order, -spec.gamma * spec.nu, spec.omega}, f.step, n, cfg.eps);
  return f.like(detail::convolve_increments(g, outer, f.step));
}

/// Dispatches on spec.regularized; the regularized path never reads nu.
inline SampledSignal apply(const SampledSignal& f, const HPOperatorSpec& spec, const QuadratureConfig& cfg = {}) {
  spec.validate();
  if (spec.regularized) return regularized_prabhakar_derivative(f, spec.kernel(), cfg);
  return hilfer_prabhakar_derivative(f, spec, cfg);
}

/// Laplace multiplier of the operator and the coefficient of its initial
/// datum: L[D f] = multiplier L[f] - initial_coefficient * datum.
struct LaplaceSymbol {
  cplx multiplier;
  cplx initial_coefficient;
};

namespace detail {

// Principal-branch closed form, without the series-region check.
inline LaplaceSymbol laplace_symbol_unchecked(const HPOperatorSpec& spec, cplx s) {
  const cplx base = 1.0 - spec.omega * std::pow(s, -spec.rho);
  const cplx multiplier = std::pow(s, spec.mu) * std::pow(base, spec.gamma);
  if (spec.regularized) return {multiplier, std::pow(s, spec.mu - 1.0) * std::pow(base, spec.gamma)};
  return {multiplier, std::pow(s, spec.nu * (spec.mu - 1.0)) * std::pow(base, spec.gamma * spec.nu)};
}

inline void check_series_region(cplx omega, double rho, cplx s) {
  if (!(s.real() > 0.0)) throw BranchError("Laplace variable must have Re(s) > 0", "s");
  if (!(std::abs(omega * std::pow(s, -rho)) < 1.0)) {
    throw BranchError("|omega s^-rho| must be below 1 for the transform identity", "s");
  }
}

}  // namespace detail

inline LaplaceSymbol laplace_symbol(const HPOperatorSpec& spec, cplx s) {
  spec.validate();
  detail::check_series_region(spec.omega, spec.rho, s);
  return detail::laplace_symbol_unchecked(spec, s);
}

}  // namespace hpfrac

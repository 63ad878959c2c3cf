#pragma once

// Numerical Laplace transforms: a forward transform of sampled or callable
// signals, Talbot-contour inversion, and the constraint maps that locate
// admissible Bromwich abscissae for the series solutions.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "hpfrac/detail/numeric.hpp"
#include "hpfrac/error.hpp"
#include "hpfrac/operators.hpp"

namespace hpfrac {

using Transform = std::function<cplx(cplx)>;

/// Talbot contour s(theta) = c + (N/t)(a + b theta cot(alpha theta) + i beta theta)
/// with Weideman's optimized shape coefficients.
struct ContourConfig {
  std::size_t node_count = 32;
  double abscissa_c = 0.1;
  double shape_a = -0.6122;
  double shape_b = 0.5017;
  double shape_alpha = 0.6407;
  double shape_beta = 0.2645;

  void validate() const {
    if (node_count < 8) throw ConfigError("node_count must be at least 8", "node_count");
    if (!(abscissa_c > 0.0) || !std::isfinite(abscissa_c)) throw ConfigError("abscissa_c must be positive", "abscissa_c");
  }
};

struct LaplaceValue {
  cplx value{};
  double error_estimate = 0.0;
};

namespace detail {

inline cplx talbot_sum(const Transform& F, double t, const ContourConfig& cfg, std::size_t nodes) {
  const double scale = static_cast<double>(nodes) / t;
  const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(nodes);
  CompensatedSum<cplx> acc;
  for (std::size_t k = 0; k < nodes; ++k) {
    const double theta = -std::numbers::pi + (static_cast<double>(k) + 0.5) * dtheta;
    const double at = cfg.shape_alpha * theta;
    // theta cot(alpha theta) and its derivative, with their limits at theta = 0
    // (reached by the middle node when the node count is odd).
    double theta_cot = 1.0 / cfg.shape_alpha;
    double d_theta_cot = 0.0;
    if (theta != 0.0) {
      const double sin_at = std::sin(at);
      const double cot = std::cos(at) / sin_at;
      theta_cot = theta * cot;
      d_theta_cot = cot - at / (sin_at * sin_at);
    }
    const cplx s(cfg.abscissa_c + scale * (cfg.shape_a + cfg.shape_b * theta_cot), scale * cfg.shape_beta * theta);
    const cplx ds(scale * cfg.shape_b * d_theta_cot, scale * cfg.shape_beta);
    cplx value;
    try {
      value = F(s);
    } catch (const BranchError& e) {
      throw ContourError(std::string("transform left its branch domain on the contour: ") + e.what(), "s");
    }
    if (!is_finite(value)) throw ContourError("transform is not finite on the contour", "s");
    acc.add(std::exp(s * t) * value * ds);
  }
  return acc.value() / cplx(0.0, static_cast<double>(nodes));
}

}  // namespace detail

/// Inverse Laplace transform of F at t > 0. The error estimate compares the
/// N-node and 3N/4-node quadratures.
inline LaplaceValue invert_lt(const Transform& F, double t, const ContourConfig& cfg = {}) {
  cfg.validate();
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("inversion time must be positive", "t");
  const cplx fine = detail::talbot_sum(F, t, cfg, cfg.node_count);
  const cplx coarse = detail::talbot_sum(F, t, cfg, std::max<std::size_t>(8, 3 * cfg.node_count / 4));
  return {fine, std::abs(fine - coarse)};
}

/// Laplace transform of the Prabhakar kernel t^(mu-1) E^gamma_{rho,mu}(omega t^rho),
/// s^-mu (1 - omega s^-rho)^-gamma, on the principal branch. The unchecked
/// form is the analytic continuation used on inversion contours.
inline cplx kernel_transform_unchecked(const MLParams& p, cplx s) {
  return std::pow(s, -p.mu) * std::pow(1.0 - p.omega * std::pow(s, -p.rho), -p.gamma);
}

inline cplx kernel_transform(const MLParams& p, cplx s) {
  p.validate();
  detail::check_series_region(p.omega, p.rho, s);
  return kernel_transform_unchecked(p, s);
}

struct ForwardTransform {
  cplx value{};
  double tail_bound = 0.0;  // estimate of the integral beyond the last sample
};

namespace detail {

// h * int_0^1 e^{-a u} (1-u) du and h * int_0^1 e^{-a u} u du.
inline std::pair<cplx, cplx> filon_weights(cplx a) {
  cplx e0;
  cplx e1;
  if (std::abs(a) < 0.5) {
    cplx term = 1.0;
    for (int k = 0; k < 24; ++k) {
      if (k > 0) term *= -a / static_cast<double>(k);
      e0 += term / static_cast<double>(k + 1);
      e1 += term / static_cast<double>(k + 2);
    }
  } else {
    const cplx ea = std::exp(-a);
    e0 = (1.0 - ea) / a;
    e1 = (1.0 - ea - a * ea) / (a * a);
  }
  return {e0 - e1, e1};
}

}  // namespace detail

/// int_0^T e^{-st} f(t) dt for the piecewise linear interpolant of the
/// samples (exact per cell). The remainder beyond T is estimated from an
/// exponential fit over the last tenth of the samples; TailError when it
/// exceeds tol relative to the result.
inline ForwardTransform forward_lt(const SampledSignal& f, cplx s, double tol = 1e-6) {
  f.validate();
  if (!(s.real() > 0.0)) throw DomainError("forward transform needs Re(s) > 0", "s");
  const double h = f.step;
  const auto [w0, w1] = detail::filon_weights(s * h);
  detail::CompensatedSum<cplx> acc;
  for (std::size_t j = 0; j + 1 < f.size(); ++j) {
    const cplx v0 = j == 0 ? f.initial_value : f.values[j];
    acc.add(std::exp(-s * f.time(j)) * h * (w0 * v0 + w1 * f.values[j + 1]));
  }
  ForwardTransform out;
  out.value = acc.value();

  const std::size_t last = f.size() - 1;
  const std::size_t first = last - std::max<std::size_t>(1, f.size() / 10);
  const double a0 = std::abs(f.values[first]);
  const double a1 = std::abs(f.values[last]);
  const double T = f.horizon();
  if (a1 == 0.0 && a0 == 0.0) return out;
  double decay = 0.0;
  if (a1 > 0.0 && a0 > 0.0) decay = std::log(a0 / a1) / (T - f.time(first));
  const double rate = s.real() + decay;
  out.tail_bound = rate > 0.0 ? a1 * std::exp(-s.real() * T) / rate : std::numeric_limits<double>::infinity();
  if (!(out.tail_bound <= tol * std::max(std::abs(out.value), std::numeric_limits<double>::min()))) {
    throw TailError("truncated Laplace integral tail " + std::to_string(out.tail_bound) + " exceeds tolerance", "T");
  }
  return out;
}

/// int_0^inf e^{-st} f(t) dt for a callable f, by tanh-sinh quadrature over
/// [0, T] with e^{-Re(s) T} = 1e-20 (integrable endpoint singularities at 0
/// are allowed).
inline ForwardTransform forward_lt(const std::function<cplx(double)>& f, cplx s, double tol = 1e-12) {
  if (!(s.real() > 0.0)) throw DomainError("forward transform needs Re(s) > 0", "s");
  const double T = 20.0 * std::log(10.0) / s.real();
  boost::math::quadrature::tanh_sinh<double> quad(12);
  auto part = [&](bool imag) {
    auto g = [&](double t) {
      const cplx v = std::exp(-s * t) * f(t);
      return imag ? v.imag() : v.real();
    };
    return quad.integrate(g, 0.0, T, tol);
  };
  ForwardTransform out;
  out.value = cplx(part(false), part(true));
  out.tail_bound = std::abs(f(T)) * std::exp(-s.real() * T) / s.real();
  return out;
}

/// Modulus map of |A / (s^mu (1 - omega s^-rho)^gamma)| over a window of
/// the s-plane, sampled at cell centres.
struct ConstraintMap {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> modulus;       // row-major, ys.size() rows
  std::vector<bool> indicator;       // modulus < 1
  std::vector<bool> admissible;      // indicator, Re s > 0 and |omega s^-rho| < 1
  std::optional<double> min_abscissa;
  bool monotone = true;              // every column right of min_abscissa is admissible

  std::size_t index(std::size_t ix, std::size_t iy) const { return iy * xs.size() + ix; }
};

struct Window {
  double x_min = -3.0;
  double x_max = 3.0;
  double y_min = -3.0;
  double y_max = 3.0;
};

inline ConstraintMap constraint_map(double A, double mu, cplx omega, double rho, double gamma, const Window& w = {},
                                    std::size_t resolution = 120) {
  if (resolution < 16) throw ConfigError("resolution must be at least 16", "resolution");
  if (!(w.x_max > w.x_min) || !(w.y_max > w.y_min)) throw ConfigError("window is empty", "window");
  if (!(rho > 0.0)) throw DomainError("rho must be positive", "rho");
  ConstraintMap m;
  const double dx = (w.x_max - w.x_min) / static_cast<double>(resolution);
  const double dy = (w.y_max - w.y_min) / static_cast<double>(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    m.xs.push_back(w.x_min + (static_cast<double>(i) + 0.5) * dx);
    m.ys.push_back(w.y_min + (static_cast<double>(i) + 0.5) * dy);
  }
  const std::size_t cells = resolution * resolution;
  m.modulus.resize(cells);
  m.indicator.resize(cells);
  m.admissible.resize(cells);
  for (std::size_t iy = 0; iy < resolution; ++iy) {
    for (std::size_t ix = 0; ix < resolution; ++ix) {
      const cplx s(m.xs[ix], m.ys[iy]);
      const cplx shifted = s == 0.0 ? cplx(std::numeric_limits<double>::infinity()) : omega * std::pow(s, -rho);
      const double mod = A == 0.0 ? 0.0 : std::abs(A / (std::pow(s, mu) * std::pow(1.0 - shifted, gamma)));
      const std::size_t c = m.index(ix, iy);
      m.modulus[c] = mod;
      m.indicator[c] = mod < 1.0;
      m.admissible[c] = m.indicator[c] && s.real() > 0.0 && std::abs(shifted) < 1.0;
    }
  }
  auto column_ok = [&](std::size_t ix) {
    for (std::size_t iy = 0; iy < resolution; ++iy) {
      if (!m.admissible[m.index(ix, iy)]) return false;
    }
    return true;
  };
  for (std::size_t ix = 0; ix < resolution; ++ix) {
    if (column_ok(ix)) {
      m.min_abscissa = m.xs[ix];
      for (std::size_t jx = ix + 1; jx < resolution; ++jx) m.monotone = m.monotone && column_ok(jx);
      break;
    }
  }
  return m;
}

}  // namespace hpfrac

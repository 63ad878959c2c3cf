#pragma once

// Series solutions of the time-fractional heat Cauchy problem on the real
// line, D u = K u_xx, for the plain and regularized Hilfer-Prabhakar
// derivatives. Fourier transforms follow g^(k) = int e^{ikx} g(x) dx and
// u(x) = (1/2pi) int e^{-ikx} u^(k) dk.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "hpfrac/detail/numeric.hpp"
#include "hpfrac/error.hpp"
#include "hpfrac/operators.hpp"
#include "hpfrac/specfun.hpp"

namespace hpfrac {

inline constexpr std::size_t kHeatMaxTerms = 256;

/// Initial datum, held through its Fourier transform. Sampled data are
/// transformed with the trapezoidal rule, which is valid for |k| < pi/dx.
class InitialDatum {
 public:
  using Fourier = std::function<cplx(double)>;

  static InitialDatum analytic(Fourier transform) {
    if (!transform) throw ConfigError("initial datum transform is empty", "initial_datum");
    InitialDatum d;
    d.transform_ = std::move(transform);
    return d;
  }

  /// g(x) = amplitude exp(-(x - centre)^2 / (2 variance)) / sqrt(2 pi variance).
  static InitialDatum gaussian(double variance, double centre = 0.0, double amplitude = 1.0) {
    if (!(variance > 0.0)) throw DomainError("Gaussian variance must be positive", "variance");
    return analytic([=](double k) {
      return amplitude * std::exp(cplx(-0.5 * variance * k * k, k * centre));
    });
  }

  static InitialDatum sampled(double x0, double step, std::vector<cplx> values) {
    if (!(step > 0.0)) throw DomainError("sample spacing must be positive", "step");
    if (values.size() < 3) throw DomainError("need at least 3 samples of the initial datum", "initial_datum");
    auto samples = std::make_shared<const std::vector<cplx>>(std::move(values));
    InitialDatum d;
    d.k_limit_ = std::numbers::pi / step;
    d.transform_ = [=](double k) {
      detail::CompensatedSum<cplx> acc;
      const std::size_t n = samples->size();
      for (std::size_t j = 0; j < n; ++j) {
        const double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
        acc.add(w * (*samples)[j] * std::exp(cplx(0.0, k * (x0 + step * static_cast<double>(j)))));
      }
      return step * acc.value();
    };
    // Truncation of the line to the sampled window, estimated from the
    // end values over one window length.
    d.datum_error_ = std::max(std::abs(samples->front()), std::abs(samples->back())) * step *
                     static_cast<double>(samples->size() - 1);
    return d;
  }

  cplx operator()(double k) const { return transform_(k); }

  /// Largest wavenumber at which the transform is meaningful.
  double k_limit() const { return k_limit_; }

  /// Error of the transform itself (zero for analytic data).
  double datum_error() const { return datum_error_; }

 private:
  InitialDatum() = default;

  Fourier transform_;
  double k_limit_ = std::numeric_limits<double>::infinity();
  double datum_error_ = 0.0;
};

/// Heat problem. spec.regularized selects the flavor (and then allows
/// mu = 1). For the plain flavor the datum is the value at 0+ of the
/// Prabhakar integral of order (1-nu)(1-mu) of u, and u itself is singular
/// like t^(mu - nu mu + nu - 1).
struct HeatProblem {
  double K = 1.0;
  HPOperatorSpec spec;
  InitialDatum datum = InitialDatum::gaussian(1.0);

  void validate() const {
    if (!(K > 0.0) || !std::isfinite(K)) throw DomainError("diffusivity K must be positive", "K");
    // The regularized flavor also admits mu = 1, the classical heat equation.
    HPOperatorSpec inner = spec;
    if (spec.regularized && spec.mu == 1.0) inner.mu = 0.5;
    inner.validate();
  }
};

struct FourierValue {
  cplx value{};
  double error_bound = 0.0;
  std::size_t terms_used = 0;
};

struct PhysicalValue {
  cplx value{};
  double error_bound = 0.0;  // quadrature + series + tail + datum
  double k_max = 0.0;
  std::size_t panels = 0;
};

namespace detail {

// Lower Mittag-Leffler parameter of term n, in working precision: the
// alternating series amplifies coefficient errors, and rounding b to double
// perturbs 1/Gamma(b) by about digamma(b) ulp(b).
inline wide heat_lower_parameter(const HeatProblem& p, std::size_t n) {
  const wide nn = static_cast<wide>(n);
  const wide mu = static_cast<wide>(p.spec.mu);
  if (p.spec.regularized) return mu * nn + 1;
  return mu * (nn + 1) - static_cast<wide>(p.spec.nu) * (mu - 1);
}

inline double heat_upper_parameter(const HeatProblem& p, std::size_t n) {
  const double nn = static_cast<double>(n);
  if (p.spec.regularized) return p.spec.gamma * nn;
  return p.spec.gamma * (nn + 1.0 - p.spec.nu);
}

}  // namespace detail

/// Dominating ratio |term_{n+1} / term_n| of the heat series with the
/// Mittag-Leffler arguments dropped: |K k^2 t^mu| Gamma(b_n) / Gamma(b_n + mu).
inline double truncation_ratio(std::size_t n, double k, double t, const HeatProblem& p) {
  if (k == 0.0) return 0.0;
  const double b = static_cast<double>(detail::heat_lower_parameter(p, n));
  const double x = p.K * k * k * std::pow(t, p.spec.mu);
  return x * std::abs(gamma_ratio_asymptotic(b, 0.0, p.spec.mu));
}

/// The heat series at a fixed time, u^(k,t) / g^(k) = sum_n c_n k^(2n),
/// with the time coefficients c_n cached across wavenumbers.
class HeatSeries {
 public:
  HeatSeries(const HeatProblem& p, double t, double eps) : problem_(p), t_(t), eps_(eps) {
    p.validate();
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("heat solution requires t > 0", "t");
    if (!(eps > 0.0)) throw DomainError("eps must be positive", "eps");
  }

  double time() const { return t_; }

  /// The achieved accuracy is reported in error_bound; once it exceeds
  /// sqrt(eps) * max(|sum|, floor) cancellation dominates and the value is
  /// rejected. `floor` lets callers judge small-weight wavenumbers absolutely.
  FourierValue operator()(double k, double floor = 0.0) const {
    using detail::wide;
    const wide k2 = static_cast<wide>(k) * static_cast<wide>(k);
    detail::CompensatedSum<detail::wcplx> sum;
    wide rounding = 0;
    wide propagated = 0;
    wide k2n = 1;
    wide previous = 0;
    double previous_ratio = 0.0;
    for (std::size_t n = 0; n < kHeatMaxTerms; ++n) {
      const Coefficient& c = coefficient(n);
      const detail::wcplx term = c.value * k2n;
      if (!detail::is_finite(term)) {
        throw NonConvergence("heat series overflowed at term " + std::to_string(n), "k");
      }
      sum.add(term);
      const wide abs_term = std::abs(term);
      rounding += abs_term * (2 * static_cast<wide>(n) + 8);
      propagated += c.error * k2n;
      if (k == 0.0) return finish(sum, 0, rounding, propagated, 1, k, floor);
      const double q = truncation_ratio(n, k, t_, problem_);
      const wide lead = std::max(abs_term, previous * static_cast<wide>(previous_ratio));
      if (n > 0 && q < 0.5) {
        const wide tail = lead * q / (1 - q);
        if (tail <= eps_ * std::abs(sum.value())) return finish(sum, tail, rounding, propagated, n + 1, k, floor);
      }
      previous = abs_term;
      previous_ratio = q;
      k2n *= k2;
    }
    throw NonConvergence("heat series not certified within " + std::to_string(kHeatMaxTerms) +
                             " terms (K k^2 t^mu = " +
                             std::to_string(problem_.K * k * k * std::pow(t_, problem_.spec.mu)) + ")",
                         "k");
  }

 private:
  struct Coefficient {
    detail::wcplx value;
    detail::wide error;
  };

  FourierValue finish(const detail::CompensatedSum<detail::wcplx>& sum, detail::wide tail, detail::wide rounding,
                      detail::wide propagated, std::size_t terms, double k, double floor) const {
    const detail::wide accuracy = detail::kWideEpsilon * rounding + propagated;
    const detail::wide target = std::sqrt(static_cast<detail::wide>(eps_)) * std::max(std::abs(sum.value()), static_cast<detail::wide>(floor));
    if (accuracy > target) {
      throw NonConvergence("heat series lost accuracy to cancellation (K k^2 t^mu = " +
                               std::to_string(problem_.K * k * k * std::pow(t_, problem_.spec.mu)) + ")",
                           "k");
    }
    FourierValue out;
    out.value = detail::narrow(sum.value());
    out.error_bound = static_cast<double>(tail + detail::kWideEpsilon * rounding + propagated) +
                      detail::kUnitRoundoff * std::abs(out.value);
    out.terms_used = terms;
    return out;
  }

  const Coefficient& coefficient(std::size_t n) const {
    using detail::wide;
    while (cache_.size() <= n) {
      const std::size_t j = cache_.size();
      const HPOperatorSpec& s = problem_.spec;
      const wide b = detail::heat_lower_parameter(problem_, j);
      const auto ml = MittagLeffler::with_extended_mu(s.rho, b, detail::heat_upper_parameter(problem_, j));
      // The leading term 1/Gamma(b) sets the scale; later coefficients are
      // tiny and multiply large powers of k, so they are resolved relatively.
      const double lead = static_cast<double>(std::abs(detail::rgamma(b)));
      const double ml_eps = 1e-17 * std::clamp(lead, 1e-280, 1.0);
      const detail::WideEvaluation e = ml.evaluate_wide(s.omega * std::pow(t_, s.rho), ml_eps);
      // Regularized: (-K t^mu)^j; plain: (-K)^j t^(b_j - 1).
      const wide sign = (j % 2 == 0) ? 1 : -1;
      const wide power = s.regularized ? static_cast<wide>(s.mu) * static_cast<wide>(j) : b - 1;
      const wide scale =
          sign * std::pow(static_cast<wide>(problem_.K), static_cast<wide>(j)) * std::pow(static_cast<wide>(t_), power);
      cache_.push_back({scale * e.value, std::abs(scale) * static_cast<wide>(e.error_bound)});
    }
    return cache_[n];
  }

  HeatProblem problem_;
  double t_;
  double eps_;
  mutable std::vector<Coefficient> cache_;
};

/// u^(k, t) = g^(k) times the heat series; NonConvergence when the ratio
/// control cannot certify the remainder within 256 terms.
inline FourierValue solve_fourier(const HeatProblem& p, double k, double t, double eps = 1e-12) {
  FourierValue v = HeatSeries(p, t, eps)(k);
  const cplx g = p.datum(k);
  v.value *= g;
  v.error_bound *= std::abs(g);
  return v;
}

/// Options for the wavenumber integral of solve_physical.
struct HeatQuadrature {
  double k_max = 0.0;          // 0 selects k_max from the decay of the datum
  double k_search_limit = 1e3;  // automatic search stops here
  std::size_t initial_panels = 8;
  std::size_t max_panels = 1024;
};

/// Physical-space solver; caches one HeatSeries per time so sweeps over x
/// reuse the Mittag-Leffler coefficients.
class HeatSolver {
 public:
  explicit HeatSolver(HeatProblem p, double eps = 1e-8, HeatQuadrature q = {})
      : problem_(std::move(p)), eps_(eps), quad_(q) {
    problem_.validate();
    if (!(eps > 0.0)) throw DomainError("eps must be positive", "eps");
    if (quad_.initial_panels < 1 || quad_.max_panels < quad_.initial_panels) {
      throw ConfigError("panel counts must satisfy 1 <= initial <= max", "panels");
    }
    k_max_ = select_k_max();
  }

  double k_max() const { return k_max_; }

  FourierValue fourier(double k, double t) const {
    FourierValue v = series(t).series(k);
    const cplx g = problem_.datum(k);
    v.value *= g;
    v.error_bound *= std::abs(g);
    return v;
  }

  PhysicalValue physical(double x, double t) const {
    const Cut& cut = series(t);
    std::size_t panels = quad_.initial_panels;
    Integral coarse = integrate(cut, x, panels);
    while (true) {
      const Integral fine = integrate(cut, x, 2 * panels);
      const double diff = std::abs(fine.value - coarse.value);
      panels *= 2;
      if (diff <= eps_ * std::max(fine.magnitude, std::numeric_limits<double>::min()) ||
          2 * panels > quad_.max_panels) {
        PhysicalValue out;
        out.value = fine.value;
        out.k_max = cut.k_cut;
        out.panels = panels;
        out.error_bound = diff + fine.series_error + cut.tail + problem_.datum.datum_error();
        if (out.error_bound > std::sqrt(eps_) * std::max(fine.magnitude, std::abs(out.value))) {
          throw NonConvergence("heat solution lost accuracy to cancellation at t = " + std::to_string(t), "t");
        }
        return out;
      }
      coarse = fine;
    }
  }

 private:
  struct Integral {
    cplx value{};
    double magnitude = 0.0;  // (1/2pi) int |g^ S| dk, an upper bound for |u|
    double series_error = 0.0;
  };

  // The series at one time with the wavenumber cutoff of the integral:
  // k_max, or earlier where the series has lost its significant digits.
  struct Cut {
    HeatSeries series;
    double k_cut = 0.0;
    double tail = 0.0;
  };

  using Gauss = boost::math::quadrature::gauss<double, 20>;
  // Wavenumbers are weighted by the datum, so accuracy is judged on the
  // integral rather than per wavenumber.
  static constexpr double kUnjudged = std::numeric_limits<double>::max();
  static constexpr int kCutSteps = 256;

  const Cut& series(double t) const {
    auto it = cache_.find(t);
    if (it == cache_.end()) {
      Cut cut{HeatSeries(problem_, t, eps_ * 1e-2)};
      cut.k_cut = k_max_;
      double edge = 0.0;
      for (int i = 1; i <= kCutSteps; ++i) {
        const double k = k_max_ * i / kCutSteps;
        bool significant = true;
        double value = 0.0;
        try {
          const FourierValue v = cut.series(k, kUnjudged);
          value = std::abs(v.value);
          significant = v.error_bound < value;
        } catch (const NonConvergence&) {
          significant = false;
        }
        if (!significant) {
          cut.k_cut = k_max_ * (i - 1) / kCutSteps;
          break;
        }
        edge = value * datum_edge(k);
      }
      if (cut.k_cut <= 0.0) {
        throw NonConvergence("heat series has no significant digits at t = " + std::to_string(t), "t");
      }
      // Beyond the cutoff the integrand is assumed to decay at least like
      // the datum (the series factor is bounded there); the remainder is
      // estimated as |g^ S| at the cutoff over one cutoff length.
      cut.tail = edge * cut.k_cut / std::numbers::pi;
      it = cache_.emplace(t, std::move(cut)).first;
    }
    return it->second;
  }

  // (1/2pi) int_0^kcut S(k) [e^{-ikx} g^(k) + e^{ikx} g^(-k)] dk.
  Integral integrate(const Cut& cut, double x, std::size_t panels) const {
    detail::CompensatedSum<cplx> acc;
    double magnitude = 0.0;
    double series_error = 0.0;
    const double width = cut.k_cut / static_cast<double>(panels);
    const auto& nodes = Gauss::abscissa();
    const auto& weights = Gauss::weights();
    auto visit = [&](double k, double w) {
      const FourierValue v = cut.series(k, kUnjudged);
      const cplx gp = problem_.datum(k);
      const cplx gm = problem_.datum(-k);
      acc.add(w * v.value * (std::exp(cplx(0.0, -k * x)) * gp + std::exp(cplx(0.0, k * x)) * gm));
      magnitude += w * std::abs(v.value) * (std::abs(gp) + std::abs(gm));
      series_error += w * v.error_bound * (std::abs(gp) + std::abs(gm));
    };
    for (std::size_t i = 0; i < panels; ++i) {
      const double mid = width * (static_cast<double>(i) + 0.5);
      const double half = 0.5 * width;
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        visit(mid - half * nodes[j], half * weights[j]);
        visit(mid + half * nodes[j], half * weights[j]);
      }
    }
    const double norm = 0.5 / std::numbers::pi;
    return {norm * acc.value(), norm * magnitude, norm * series_error};
  }

  double datum_edge(double k) const { return std::max(std::abs(problem_.datum(k)), std::abs(problem_.datum(-k))); }

  double select_k_max() const {
    const double limit = std::min(quad_.k_search_limit, problem_.datum.k_limit());
    double peak = std::abs(problem_.datum(0.0));
    if (quad_.k_max > 0.0) {
      if (quad_.k_max > problem_.datum.k_limit()) {
        throw TailError("k_max exceeds the band limit of the sampled datum", "k_max");
      }
      for (int i = 1; i <= 64; ++i) peak = std::max(peak, datum_edge(quad_.k_max * i / 64.0));
      if (datum_edge(quad_.k_max) > eps_ * peak) {
        throw TailError("initial datum has not decayed to eps at k_max", "k_max");
      }
      return quad_.k_max;
    }
    const double dk = 1.0 / 64.0;
    for (double k = dk; k <= limit; k += dk * std::max(1.0, k)) {
      const double g = datum_edge(k);
      peak = std::max(peak, g);
      if (g <= eps_ * peak) return k;
    }
    throw TailError("initial datum transform does not decay to eps below k = " + std::to_string(limit), "k_max");
  }

  HeatProblem problem_;
  double eps_;
  HeatQuadrature quad_;
  double k_max_ = 0.0;
  mutable std::map<double, Cut> cache_;
};

/// u(x, t) = (1/2pi) int e^{-ikx} u^(k, t) dk with composite Gauss-Legendre
/// quadrature over |k| <= k_max.
inline PhysicalValue solve_physical(const HeatProblem& p, double x, double t, double eps = 1e-8,
                                    const HeatQuadrature& q = {}) {
  return HeatSolver(p, eps, q).physical(x, t);
}

}  // namespace hpfrac

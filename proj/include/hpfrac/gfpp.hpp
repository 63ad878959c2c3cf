#pragma once

// Generalized fractional Poisson process: state probabilities, generating
// function, mean count, waiting-time law, their Laplace transforms, the
// validity certificate, renewal sampling and the fractional integral mean.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

// pchip uses isnan unqualified and needs it declared first.
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include "hpfrac/detail/numeric.hpp"
#include "hpfrac/error.hpp"
#include "hpfrac/laplace.hpp"
#include "hpfrac/random.hpp"
#include "hpfrac/specfun.hpp"

namespace hpfrac {

inline constexpr std::size_t kGfppMaxTerms = 256;
inline constexpr double kGfppSeriesReach = 5.0;
inline constexpr std::size_t kSamplingTableNodes = 4096;

struct GfppModel {
  double lambda = 1.0;
  double phi = 1.0;
  double gamma = 1.0;
  double rho = 0.25;
  double mu = 0.5;

  void check() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive", "lambda");
    if (!(phi > 0.0) || !std::isfinite(phi)) throw DomainError("phi must be positive", "phi");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be non-negative", "gamma");
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("rho must lie in (0, 1]", "rho");
    if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("mu must lie in (0, 1]", "mu");
  }
};

/// Exponents mu ceil(gamma)/gamma - r rho for r = 0..ceil(gamma) and the r
/// whose exponent leaves (0, 1). The waiting-time law is a probability
/// density exactly when no r is violated.
struct ValidityCertificate {
  bool valid = true;
  std::vector<double> exponents;
  std::vector<std::size_t> violations;
};

inline ValidityCertificate validate(const GfppModel& m) {
  m.check();
  ValidityCertificate c;
  if (m.gamma == 0.0) return c;
  const double ceil_gamma = std::ceil(m.gamma);
  for (std::size_t r = 0; r <= static_cast<std::size_t>(ceil_gamma); ++r) {
    const double e = m.mu * ceil_gamma / m.gamma - static_cast<double>(r) * m.rho;
    c.exponents.push_back(e);
    if (!(e > 0.0 && e < 1.0)) c.violations.push_back(r);
  }
  c.valid = c.violations.empty();
  return c;
}

inline void require_valid(const GfppModel& m) {
  const ValidityCertificate c = validate(m);
  if (!c.valid) {
    throw DomainError("parameters violate the validity certificate at r = " + std::to_string(c.violations.front()),
                      "gamma");
  }
}

/// A probability-type value. `raw` is the computed value before clamping
/// small negative round-off to 0.
struct ProbabilityValue {
  double value = 0.0;
  double raw = 0.0;
  double error_bound = 0.0;
  std::size_t terms_used = 0;
  bool via_contour = false;
  bool clamped = false;
};

/// Laplace transform of the waiting-time density, lambda / (s^mu (1 + phi s^-rho)^gamma + lambda),
/// within the geometric-series region |lambda s^-mu (1 + phi s^-rho)^-gamma| < 1.
inline cplx waiting_lt(const GfppModel& m, cplx s) {
  m.check();
  if (!(s.real() > 0.0)) throw BranchError("waiting_lt requires Re s > 0", "s");
  const cplx symbol = std::pow(s, m.mu) * std::pow(1.0 + m.phi * std::pow(s, -m.rho), m.gamma);
  if (!(std::abs(m.lambda / symbol) < 1.0)) {
    throw BranchError("waiting_lt outside |lambda s^-mu (1 + phi s^-rho)^-gamma| < 1", "s");
  }
  return m.lambda / (symbol + m.lambda);
}

namespace detail {

inline cplx gfpp_symbol(const GfppModel& m, cplx s) {
  return std::pow(s, m.mu) * std::pow(1.0 + m.phi * std::pow(s, -m.rho), m.gamma);
}

}  // namespace detail

/// Principal-branch continuation of pmf_lt, for inversion contours.
inline cplx pmf_lt_unchecked(const GfppModel& m, std::size_t k, cplx s) {
  const cplx symbol = detail::gfpp_symbol(m, s);
  const cplx ratio = m.lambda / (symbol + m.lambda);
  return std::pow(ratio, static_cast<double>(k)) * symbol / (s * (symbol + m.lambda));
}

/// Laplace transform of P(N(t) = k), lambda^k s^(mu-1) (1 + phi s^-rho)^gamma / (s^mu (1 + phi s^-rho)^gamma + lambda)^(k+1).
inline cplx pmf_lt(const GfppModel& m, std::size_t k, cplx s) {
  m.check();
  if (!(s.real() > 0.0)) throw BranchError("pmf_lt requires Re s > 0", "s");
  return pmf_lt_unchecked(m, k, s);
}

namespace detail {

// E^{a r + b}_{rho, c r + d}(z) for r = 0, 1, ..., with per-r coefficient
// caches so repeated arguments cost only the summation.
class MLFamily {
 public:
  MLFamily(double rho, double upper_step, double upper_offset, double lower_step, double lower_offset)
      : rho_(rho), a_(upper_step), b_(upper_offset), c_(lower_step), d_(lower_offset) {}

  WideEvaluation operator()(std::size_t r, cplx z) const {
    while (members_.size() <= r) {
      const wide rr = static_cast<wide>(members_.size());
      const wide lower = static_cast<wide>(c_) * rr + static_cast<wide>(d_);
      const double upper = static_cast<double>(static_cast<wide>(a_) * rr + static_cast<wide>(b_));
      // Absolute accuracy relative to the natural size 1/Gamma(lower).
      const double scale = std::clamp(static_cast<double>(rgamma(lower)), 1e-280, 1.0);
      members_.push_back({MittagLeffler::with_extended_mu(rho_, lower, upper), 1e-18 * scale});
    }
    const Member& m = members_[r];
    return m.ml.evaluate_wide(z, m.eps);
  }

 private:
  struct Member {
    MittagLeffler ml;
    double eps;
  };

  double rho_;
  double a_;
  double b_;
  double c_;
  double d_;
  mutable std::deque<Member> members_;
};

struct SeriesSum {
  wide value = 0;
  wide error = 0;
  std::size_t terms = 0;
};

// sum_{r >= first} term(r) certified by a dominating ratio: the larger of a
// model ratio and the observed ratio of consecutive terms must fall below
// 1/2 and the geometric remainder below eps |sum|.
template <class Term, class Ratio>
SeriesSum certified_sum(Term term, Ratio model_ratio, std::size_t first, double eps, const char* what) {
  CompensatedSum<wide> sum;
  wide propagated = 0;
  wide abs_sum = 0;
  wide previous = 0;
  for (std::size_t r = first; r < first + kGfppMaxTerms; ++r) {
    const auto [value, error] = term(r);
    if (!std::isfinite(value)) throw NonConvergence(std::string(what) + " series overflowed", "t");
    sum.add(value);
    propagated += error;
    const wide magnitude = std::abs(value);
    abs_sum += magnitude;
    double q = model_ratio(r);
    if (r > first && previous > 0) q = std::max(q, static_cast<double>(magnitude / previous));
    if (r > first && q < 0.5) {
      const wide tail = std::max(magnitude, previous * q) * q / (1 - q);
      if (tail <= eps * std::abs(sum.value()) || abs_sum == 0) {
        return {sum.value(), tail + propagated + 4 * kWideEpsilon * abs_sum * static_cast<wide>(r - first + 4),
                r - first + 1};
      }
    }
    previous = magnitude;
  }
  throw NonConvergence(std::string(what) + " series not certified within " + std::to_string(kGfppMaxTerms) + " terms",
                       "t");
}

inline ProbabilityValue contour_value(const Transform& F, double t) {
  const LaplaceValue v = invert_lt(F, t);
  ProbabilityValue out;
  out.raw = v.value.real();
  out.error_bound = v.error_estimate + std::abs(v.value.imag());
  out.terms_used = ContourConfig{}.node_count;
  out.via_contour = true;
  return out;
}

inline double gamma_ratio(double a, double b) { return std::exp(std::lgamma(a) - std::lgamma(b)); }

}  // namespace detail

/// Series and contour evaluations for one model. The series runs while its
/// scale (lambda t^mu, or lambda (1 - v) t^mu for the generating function)
/// is at most kGfppSeriesReach. When the scale is larger, or when the series
/// bound exceeds eps max(1, |value|) because the alternating terms cancel,
/// the Laplace transform is inverted on a Talbot contour instead.
/// Coefficients are cached, so one instance should serve many evaluations.
/// Not thread-safe.
class GfppSeries {
 public:
  explicit GfppSeries(const GfppModel& m, double eps = 1e-12)
      : model_(m),
        eps_(eps),
        states_(m.rho, m.gamma, 0.0, m.mu, 1.0),
        waiting_(m.rho, m.gamma, m.gamma, m.mu, m.mu) {
    require_valid(m);
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("eps must be positive", "eps");
  }

  const GfppModel& model() const { return model_; }
  double eps() const { return eps_; }

  /// G(v, t) = sum_k (-lambda (1 - v) t^mu)^k E^{gamma k}_{rho, mu k + 1}(-phi t^rho).
  ProbabilityValue pgf(double v, double t) const {
    check_time(t);
    if (!(v >= -1.0 && v <= 1.0)) throw DomainError("pgf requires |v| <= 1", "v");
    if (v == 1.0 || t == 0.0) return exact(1.0);
    const double y = model_.lambda * (1.0 - v) * std::pow(t, model_.mu);
    const cplx z = -model_.phi * std::pow(t, model_.rho);
    const auto series = [&] {
      detail::wide power = 1;
      const auto term = [&](std::size_t k) {
        if (k > 0) power *= -static_cast<detail::wide>(y);
        const detail::WideEvaluation e = states_(k, z);
        return std::pair{power * e.value.real(), std::abs(power) * static_cast<detail::wide>(e.error_bound)};
      };
      const auto ratio = [&](std::size_t k) { return y * state_gamma_ratio(k); };
      return detail::certified_sum(term, ratio, 0, eps_, "pgf");
    };
    const GfppModel m = model_;
    const double load = model_.lambda * (1.0 - v);
    const Transform transform = [m, load](cplx s) {
      const cplx symbol = detail::gfpp_symbol(m, s);
      return symbol / (s * (symbol + load));
    };
    return evaluate(y, series, transform, t);
  }

  /// P(N(t) = k) = sum_{r >= k} (-1)^(r-k) C(r, k) (lambda t^mu)^r E^{gamma r}_{rho, mu r + 1}(-phi t^rho).
  ProbabilityValue pmf(std::size_t k, double t) const {
    check_time(t);
    if (t == 0.0) return exact(k == 0 ? 1.0 : 0.0);
    const double x = model_.lambda * std::pow(t, model_.mu);
    const cplx z = -model_.phi * std::pow(t, model_.rho);
    const auto series = [&] {
      const detail::wide xw = x;
      detail::wide weight = std::pow(xw, static_cast<detail::wide>(k));  // C(r, k) x^r
      const auto term = [&](std::size_t r) {
        if (r > k) weight *= xw * static_cast<detail::wide>(r) / static_cast<detail::wide>(r - k);
        const detail::wide sign = (r - k) % 2 == 0 ? 1 : -1;
        const detail::WideEvaluation e = states_(r, z);
        return std::pair{sign * weight * e.value.real(), weight * static_cast<detail::wide>(e.error_bound)};
      };
      const auto ratio = [&](std::size_t r) {
        return x * static_cast<double>(r + 1) / static_cast<double>(r + 1 - k) * state_gamma_ratio(r);
      };
      return detail::certified_sum(term, ratio, k, eps_, "pmf");
    };
    const GfppModel m = model_;
    return evaluate(x, series, [m, k](cplx s) { return pmf_lt_unchecked(m, k, s); }, t);
  }

  /// P(T > t) = P(N(t) = 0).
  ProbabilityValue survival(double t) const { return pmf(0, t); }

  /// lambda t^(mu-1) sum_r (-lambda t^mu)^r E^{gamma r + gamma}_{rho, mu r + mu}(-phi t^rho).
  ProbabilityValue waiting_density(double t) const {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("waiting_density requires t > 0", "t");
    const double x = model_.lambda * std::pow(t, model_.mu);
    const cplx z = -model_.phi * std::pow(t, model_.rho);
    const auto series = [&] {
      detail::wide power = static_cast<detail::wide>(model_.lambda) *
                           std::pow(static_cast<detail::wide>(t), static_cast<detail::wide>(model_.mu) - 1);
      const auto term = [&](std::size_t r) {
        if (r > 0) power *= -static_cast<detail::wide>(x);
        const detail::WideEvaluation e = waiting_(r, z);
        return std::pair{power * e.value.real(), std::abs(power) * static_cast<detail::wide>(e.error_bound)};
      };
      const auto ratio = [&](std::size_t r) {
        const double b = model_.mu * static_cast<double>(r + 1);
        return x * detail::gamma_ratio(b, b + model_.mu);
      };
      return detail::certified_sum(term, ratio, 0, eps_, "waiting density");
    };
    const GfppModel m = model_;
    return evaluate(x, series, [m](cplx s) { return m.lambda / (detail::gfpp_symbol(m, s) + m.lambda); }, t);
  }

 private:
  static void check_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be non-negative", "t");
  }

  double state_gamma_ratio(std::size_t r) const {
    const double b = model_.mu * static_cast<double>(r) + 1.0;
    return detail::gamma_ratio(b, b + model_.mu);
  }

  static ProbabilityValue exact(double v) { return {v, v, 0.0, 1, false, false}; }

  template <class Series>
  ProbabilityValue evaluate(double scale, Series series, const Transform& transform, double t) const {
    std::optional<ProbabilityValue> from_series;
    if (scale <= kGfppSeriesReach) {
      try {
        const detail::SeriesSum s = series();
        ProbabilityValue out;
        out.raw = static_cast<double>(s.value);
        out.error_bound = static_cast<double>(s.error) + detail::kUnitRoundoff * std::abs(out.raw);
        out.terms_used = s.terms;
        if (detail::accepted(out.error_bound, std::abs(out.raw), eps_)) return finish(out);
        from_series = out;
      } catch (const NonConvergence&) {
      }
    }
    ProbabilityValue contour = detail::contour_value(transform, t);
    if (from_series && from_series->error_bound < contour.error_bound) return finish(*from_series);
    return finish(contour);
  }

  // Negative values within eps (or the error bound) of 0 are round-off and
  // clamp to 0; anything further below means the evaluation is not trustworthy.
  ProbabilityValue finish(ProbabilityValue out) const {
    out.value = out.raw;
    if (out.raw < 0.0) {
      const double slack = std::max(eps_, out.error_bound);
      if (out.raw < -slack) {
        throw NonConvergence("probability evaluated to " + std::to_string(out.raw) + " below -eps", "t");
      }
      out.value = 0.0;
      out.clamped = true;
    }
    return out;
  }

  GfppModel model_;
  double eps_;
  detail::MLFamily states_;
  detail::MLFamily waiting_;
};

inline ProbabilityValue pgf(const GfppModel& m, double v, double t, double eps = 1e-12) {
  return GfppSeries(m, eps).pgf(v, t);
}

inline ProbabilityValue pmf(const GfppModel& m, std::size_t k, double t, double eps = 1e-12) {
  return GfppSeries(m, eps).pmf(k, t);
}

inline ProbabilityValue survival(const GfppModel& m, double t, double eps = 1e-12) {
  return GfppSeries(m, eps).survival(t);
}

inline ProbabilityValue waiting_density(const GfppModel& m, double t, double eps = 1e-12) {
  return GfppSeries(m, eps).waiting_density(t);
}

/// E N(t) = lambda t^mu E^gamma_{rho, 1 + mu}(-phi t^rho).
inline double mean_count(const GfppModel& m, double t) {
  require_valid(m);
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be non-negative", "t");
  if (t == 0.0) return 0.0;
  const SeriesEvaluation e = ml3(m.rho, 1.0 + m.mu, m.gamma, -m.phi * std::pow(t, m.rho));
  return m.lambda * std::pow(t, m.mu) * e.value.real();
}

/// Mean of the Riemann-Liouville integral of order alpha of N,
/// lambda t^(alpha + mu) E^gamma_{rho, alpha + mu + 1}(-phi t^rho).
inline double fractional_integral_mean(const GfppModel& m, double alpha, double t) {
  require_valid(m);
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be positive", "alpha");
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be non-negative", "t");
  if (t == 0.0) return 0.0;
  const SeriesEvaluation e = ml3(m.rho, alpha + m.mu + 1.0, m.gamma, -m.phi * std::pow(t, m.rho));
  return m.lambda * std::pow(t, alpha + m.mu) * e.value.real();
}

/// Inverse-CDF sampler of the waiting time on (0, horizon]: log t is a
/// monotone cubic (PCHIP) interpolant of log F on a log-spaced table of
/// F = 1 - survival. Draws with u >= F(horizon) fall beyond the horizon.
class WaitingTimeSampler {
 public:
  WaitingTimeSampler(const GfppModel& m, double horizon, std::size_t nodes = kSamplingTableNodes)
      : horizon_(horizon) {
    require_valid(m);
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive", "horizon");
    if (nodes < 16) throw ConfigError("sampling table needs at least 16 nodes", "nodes");
    // Below F ~ 1e-10 the law is the power lambda t^mu / Gamma(1 + mu);
    // the table starts there and extrapolates linearly in log-log.
    const double start = std::pow(1e-10 * std::tgamma(1.0 + m.mu) / m.lambda, 1.0 / m.mu);
    const double t_lo = std::min(start, 1e-6 * horizon);
    const GfppSeries series(m);
    std::vector<double> log_f;
    std::vector<double> log_t;
    const double ratio = std::log(horizon / t_lo) / static_cast<double>(nodes - 1);
    for (std::size_t i = 0; i < nodes; ++i) {
      const double t = i + 1 == nodes ? horizon : t_lo * std::exp(ratio * static_cast<double>(i));
      double f = 0.0;
      try {
        const ProbabilityValue s = series.survival(t);
        if (!(s.error_bound <= 1e-8)) {
          throw TableError("survival not certified at t = " + std::to_string(t), "horizon");
        }
        f = 1.0 - s.value;
      } catch (const TableError&) {
        throw;
      } catch (const Error& e) {
        throw TableError(std::string("survival failed on the sampling table: ") + e.what(), "horizon");
      }
      if (f < -1e-8 || f > 1.0 + 1e-8) throw TableError("survival left [0, 1] on the sampling table", "horizon");
      if (!log_f.empty() && f < std::exp(log_f.back()) - 1e-8) {
        throw TableError("survival increased on the sampling table", "horizon");
      }
      if (!(f > 0.0) || (!log_f.empty() && std::log(f) <= log_f.back())) continue;
      log_f.push_back(std::log(f));
      log_t.push_back(std::log(t));
    }
    if (log_f.size() < 4) throw TableError("sampling table is degenerate", "horizon");
    f_lo_ = std::exp(log_f.front());
    f_hi_ = std::exp(log_f.back());
    log_t_lo_ = log_t.front();
    slope_lo_ = (log_t[1] - log_t[0]) / (log_f[1] - log_f[0]);
    table_ = std::make_shared<Interpolant>(std::move(log_f), std::move(log_t));
  }

  double horizon() const { return horizon_; }
  double cdf_at_horizon() const { return f_hi_; }

  /// Waiting time for a uniform u in (0, 1), or nothing when it exceeds the horizon.
  std::optional<double> draw(double u) const {
    if (u >= f_hi_) return std::nullopt;
    if (u < f_lo_) return std::exp(log_t_lo_ + slope_lo_ * (std::log(u) - std::log(f_lo_)));
    return std::min(horizon_, std::exp((*table_)(std::log(u))));
  }

 private:
  using Interpolant = boost::math::interpolators::pchip<std::vector<double>>;

  double horizon_;
  double f_lo_ = 0.0;
  double f_hi_ = 0.0;
  double log_t_lo_ = 0.0;
  double slope_lo_ = 1.0;
  std::shared_ptr<Interpolant> table_;
};

/// Event times of one renewal path on [0, horizon].
struct PathSample {
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  std::vector<double> event_times;
  double horizon = 0.0;

  std::size_t count(double t) const {
    return static_cast<std::size_t>(std::upper_bound(event_times.begin(), event_times.end(), t) - event_times.begin());
  }
};

/// Path `index` of run `seed`: uniforms come from the Philox stream keyed by
/// the seed with the path index as stream id, consumed in order.
inline PathSample sample_path(const WaitingTimeSampler& sampler, std::uint64_t seed, std::uint64_t index) {
  const Philox4x32 rng(seed);
  PathSample path{seed, index, {}, sampler.horizon()};
  double clock = 0.0;
  for (std::uint64_t block = 0;; ++block) {
    for (double u : rng.uniforms(index, block)) {
      const std::optional<double> wait = sampler.draw(u);
      if (!wait || clock + *wait > sampler.horizon()) return path;
      clock += *wait;
      path.event_times.push_back(clock);
    }
  }
}

/// n_paths independent paths. Work is split over `threads` workers; each
/// path depends only on (seed, path index), so the result does not depend
/// on the worker count.
inline std::vector<PathSample> sample_paths(const GfppModel& m, double horizon, std::size_t n_paths, std::uint64_t seed,
                                            unsigned threads = 0) {
  const WaitingTimeSampler sampler(m, horizon);
  std::vector<PathSample> paths(n_paths);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, n_paths / 1024)));
  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) paths[i] = sample_path(sampler, seed, i);
  };
  if (threads <= 1) {
    work(0, n_paths);
    return paths;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n_paths + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t begin = std::min(n_paths, w * chunk);
    pool.emplace_back(work, begin, std::min(n_paths, begin + chunk));
  }
  for (auto& th : pool) th.join();
  return paths;
}

}  // namespace hpfrac

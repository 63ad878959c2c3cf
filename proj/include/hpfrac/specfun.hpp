#pragma once

// Three-parameter (Prabhakar) Mittag-Leffler function, the Prabhakar kernel
// and the Gamma function for real and complex arguments.
//
// Series are generated in extended precision (long double) with compensated
// summation. Every evaluation carries an error bound made of a rigorous
// truncation bound plus a rounding estimate proportional to the sum of the
// absolute values of the terms, so ill-conditioned arguments (large negative
// z with small rho) are reported rather than silently returned.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hpfrac/detail/numeric.hpp"
#include "hpfrac/error.hpp"

namespace hpfrac {

inline constexpr std::size_t kDefaultMaxTerms = 2000;
inline constexpr double kDefaultEps = 1e-14;

/// Parameters (rho, mu, gamma, omega) of a Prabhakar kernel or of a
/// Mittag-Leffler evaluation (omega unused there).
struct MLParams {
  double rho = 1.0;
  cplx mu = 1.0;
  double gamma = 1.0;
  cplx omega = 0.0;

  void validate() const {
    if (!std::isfinite(rho) || !detail::is_finite(mu) || !std::isfinite(gamma) ||
        !detail::is_finite(omega)) {
      throw DomainError("Mittag-Leffler parameters must be finite", "params");
    }
    if (!(rho > 0.0)) throw DomainError("rho must be positive", "rho");
    if (!(mu.real() > 0.0)) throw DomainError("Re(mu) must be positive", "mu");
  }
};

/// Result of a truncated series evaluation.
struct SeriesEvaluation {
  cplx value{};
  std::size_t terms_used = 0;
  double error_bound = 0.0;  // truncation bound + rounding estimate
  bool accepted = false;     // error_bound <= eps * max(1, |value|)
};

namespace detail {

// Same as SeriesEvaluation but keeps the value in working precision so
// callers that accumulate further series do not lose the extra digits.
struct WideEvaluation {
  wcplx value{};
  std::size_t terms_used = 0;
  double error_bound = 0.0;
  wide abs_sum = 0;
};

inline bool accepted(double error_bound, double magnitude, double eps) {
  return error_bound <= eps * std::max(1.0, magnitude);
}

// ln Gamma(z) for complex z. Only exp() of the result is used, so the branch
// of the imaginary part is irrelevant.
inline wcplx log_gamma(wcplx z) {
  constexpr wide pi = std::numbers::pi_v<wide>;
  if (z.real() < 0.5L) {
    return std::log(pi) - std::log(std::sin(pi * z)) - log_gamma(wide{1} - z);
  }
  wcplx prod{1};
  while (std::abs(z) < 18.0L) {
    prod *= z;
    z += wide{1};
  }
  // Stirling series, B_{2j} / (2j (2j-1)) for j = 1..10.
  static constexpr wide c[] = {
      1.0L / 12.0L,           -1.0L / 360.0L,         1.0L / 1260.0L,
      -1.0L / 1680.0L,        1.0L / 1188.0L,         -691.0L / 360360.0L,
      1.0L / 156.0L,          -3617.0L / 122400.0L,   43867.0L / 244188.0L,
      -174611.0L / 125400.0L,
  };
  const wcplx w = wide{1} / (z * z);
  wcplx s = c[9];
  for (int j = 8; j >= 0; --j) s = s * w + c[j];
  s /= z;
  const wide half_log_two_pi = 0.918938533204672741780329736405617639861L;
  return (z - wide{0.5}) * std::log(z) - z + half_log_two_pi + s - std::log(prod);
}

inline wide rgamma(wide x) {
  if (x <= 0 && x == std::floor(x)) return 0;
  if (x > 1700.0L) return std::exp(-std::lgamma(x));
  return wide{1} / std::tgamma(x);
}

// 1 / Gamma(z), zero at the poles.
inline wcplx rgamma(wcplx z) {
  if (z.imag() == 0) return rgamma(z.real());
  constexpr wide pi = std::numbers::pi_v<wide>;
  if (z.real() < 0.5L) return std::sin(pi * z) / pi * std::exp(log_gamma(wide{1} - z));
  return std::exp(-log_gamma(z));
}

// Rough |ln Gamma(z)| used to size rounding estimates when 1/Gamma is
// formed through exp(-lnGamma).
inline wide log_gamma_magnitude(wcplx z) {
  if (z.imag() == 0 && z.real() > 0) return std::abs(std::lgamma(z.real()));
  return std::abs(log_gamma(z));
}

}  // namespace detail

/// Gamma(z) for complex z; PoleError at non-positive integers.
inline cplx gamma_fn(cplx z) {
  if (!detail::is_finite(z)) throw DomainError("gamma_fn argument must be finite", "z");
  if (z.imag() == 0.0 && detail::is_nonpositive_integer(z.real())) {
    throw PoleError("Gamma has a pole at non-positive integer " + std::to_string(z.real()), "z");
  }
  if (z.imag() == 0.0) return std::tgamma(z.real());
  return detail::narrow(std::exp(detail::log_gamma(detail::widen<detail::wide>(z))));
}

/// Gamma(z + a) / Gamma(z + b) through the two-term large-|z| expansion,
/// falling back to an explicit ratio below `threshold` or close to the
/// negative real axis. Intended for truncation heuristics only.
inline cplx gamma_ratio_asymptotic(cplx z, double a, double b, double threshold = 30.0) {
  if (a == b) return 1.0;
  if (std::abs(z) < threshold || std::abs(std::arg(z)) > std::numbers::pi - 0.1) {
    return gamma_fn(z + a) / gamma_fn(z + b);
  }
  return std::pow(z, a - b) * (1.0 + (a - b) * (a + b - 1.0) / (2.0 * z));
}

/// E^gamma_{rho,mu}(z) = sum_k (gamma)_k z^k / (k! Gamma(rho k + mu)).
///
/// Coefficients are cached lazily, so an instance is cheap to evaluate at
/// many arguments. Instances are not meant to be shared between threads.
class MittagLeffler {
 public:
  MittagLeffler(double rho, cplx mu, double gamma, std::size_t max_terms = kDefaultMaxTerms)
      : rho_(rho), mu_(mu), mu_wide_(detail::widen<detail::wide>(mu)), gamma_(gamma), max_terms_(max_terms) {
    MLParams{rho, mu, gamma, 0.0}.validate();
    if (detail::is_nonpositive_integer(gamma)) {
      last_term_ = static_cast<std::size_t>(-gamma);
    }
  }

  /// Same function with a real lower parameter held in working precision,
  /// for callers that generate it arithmetically (mu = a n + b).
  static MittagLeffler with_extended_mu(double rho, detail::wide mu, double gamma,
                                        std::size_t max_terms = kDefaultMaxTerms) {
    MittagLeffler ml(rho, static_cast<double>(mu), gamma, max_terms);
    ml.mu_wide_ = mu;
    return ml;
  }

  double rho() const { return rho_; }
  cplx mu() const { return mu_; }
  double gamma() const { return gamma_; }

  SeriesEvaluation operator()(cplx z, double eps = kDefaultEps) const {
    const detail::WideEvaluation w = evaluate_wide(z, eps);
    SeriesEvaluation out;
    out.value = detail::narrow(w.value);
    out.terms_used = w.terms_used;
    out.error_bound = w.error_bound + detail::kUnitRoundoff * std::abs(out.value);
    out.accepted = detail::accepted(out.error_bound, std::abs(out.value), eps);
    return out;
  }

  detail::WideEvaluation evaluate_wide(cplx z_in, double eps) const {
    using detail::wcplx;
    using detail::wide;
    if (!(eps > 0.0)) throw DomainError("eps must be positive", "eps");
    if (!detail::is_finite(z_in)) throw DomainError("argument must be finite", "z");
    const wcplx z = detail::widen<wide>(z_in);
    const wide abs_z = std::abs(z);

    detail::CompensatedSum<wcplx> sum;
    wcplx zpow{1};
    wide abs_sum = 0;
    wide rounding = 0;
    int small_run = 0;

    for (std::size_t k = 0; k < max_terms_; ++k) {
      const Coefficient& c = coefficient(k);
      const wcplx term = c.value * zpow;
      if (!detail::is_finite(term)) {
        throw NonConvergence("Mittag-Leffler series overflowed at term " + std::to_string(k), "z");
      }
      sum.add(term);
      const wide abs_term = std::abs(term);
      abs_sum += abs_term;
      rounding += abs_term * c.rounding_weight;

      const bool exhausted = (last_term_ && k == *last_term_) || abs_z == 0;
      const wide scale = std::max<wide>(1, std::abs(sum.value()));
      wide tail = -1;
      if (exhausted) {
        tail = 0;
      } else {
        small_run = abs_term <= eps * scale ? small_run + 1 : 0;
        if (small_run >= 3) tail = tail_bound(k, abs_term, abs_z);
      }
      if (tail >= 0 && tail <= eps * scale) {
        detail::WideEvaluation out;
        out.value = sum.value();
        out.terms_used = k + 1;
        out.abs_sum = abs_sum;
        out.error_bound = static_cast<double>(tail + 2 * detail::kWideEpsilon * rounding);
        return out;
      }
      zpow *= z;
    }
    throw NonConvergence("Mittag-Leffler series did not reach eps within " +
                             std::to_string(max_terms_) + " terms",
                         "z");
  }

 private:
  struct Coefficient {
    detail::wcplx value;
    detail::wcplx rgamma;  // 1 / Gamma(rho k + mu)
    detail::wide rounding_weight;
  };

  const Coefficient& coefficient(std::size_t k) const {
    using detail::wcplx;
    using detail::wide;
    while (cache_.size() <= k) {
      const std::size_t j = cache_.size();
      if (j == 0) {
        pochhammer_ = 1;
      } else {
        pochhammer_ *= (static_cast<wide>(gamma_) + static_cast<wide>(j - 1)) / static_cast<wide>(j);
      }
      const wcplx arg = static_cast<wide>(rho_) * static_cast<wide>(j) + mu_wide_;
      const wcplx rg = detail::rgamma(arg);
      wide weight = 2 * static_cast<wide>(j) + 32;
      if (arg.imag() != 0 || arg.real() > 1700.0L) weight += detail::log_gamma_magnitude(arg);
      if (last_term_ && j > *last_term_) pochhammer_ = 0;
      cache_.push_back({pochhammer_ * rg, rg, weight});
    }
    return cache_[k];
  }

  // Rigorous bound on sum_{j>k} |t_j| from |t_{j+1} / t_j| <= q for all j >= k.
  // Returns -1 when the monotonicity conditions behind q do not hold yet.
  detail::wide tail_bound(std::size_t k, detail::wide abs_term, detail::wide abs_z) const {
    using detail::wide;
    const wide kk = static_cast<wide>(k);
    const wide g = static_cast<wide>(gamma_);
    const wide x = static_cast<wide>(rho_) * kk + mu_wide_.real();
    if (g + kk < 0 || x <= std::abs(mu_wide_.imag())) return -1;
    const wide rg_k = std::abs(coefficient(k).rgamma);
    const wide rg_next = std::abs(coefficient(k + 1).rgamma);
    if (rg_next == 0) return 0;  // 1/Gamma underflowed: remaining terms vanish
    if (rg_k == 0) return -1;
    const wide pochhammer_factor = std::max<wide>(1, (g + kk) / (kk + 1));
    const wide q = abs_z * pochhammer_factor * rg_next / rg_k;
    if (!(q < 1)) return -1;
    return abs_term * q / (1 - q);
  }

  double rho_;
  cplx mu_;
  detail::wcplx mu_wide_;
  double gamma_;
  std::size_t max_terms_;
  std::optional<std::size_t> last_term_;
  mutable std::vector<Coefficient> cache_;
  mutable detail::wide pochhammer_ = 1;
};

/// Three-parameter Mittag-Leffler function E^gamma_{rho,mu}(z).
inline SeriesEvaluation ml3(double rho, cplx mu, double gamma, cplx z, double eps = kDefaultEps,
                            std::size_t max_terms = kDefaultMaxTerms) {
  return MittagLeffler(rho, mu, gamma, max_terms)(z, eps);
}

inline SeriesEvaluation ml3(const MLParams& p, cplx z, double eps = kDefaultEps) {
  return ml3(p.rho, p.mu, p.gamma, z, eps);
}

/// Prabhakar kernel e^gamma_{rho,mu,omega}(t) = t^(mu-1) E^gamma_{rho,mu}(omega t^rho)
/// together with its first two primitives, which drive product integration.
class PrabhakarKernel {
 public:
  explicit PrabhakarKernel(const MLParams& p, double eps = kDefaultEps)
      : params_(p),
        eps_(eps),
        value_(p.rho, p.mu, p.gamma),
        first_(p.rho, p.mu + 1.0, p.gamma),
        second_(p.rho, p.mu + 2.0, p.gamma) {
    p.validate();
  }

  const MLParams& params() const { return params_; }

  SeriesEvaluation value(double t) const { return scaled(value_, t, params_.mu - 1.0); }

  /// Integral of the kernel over [0, t]: t^mu E^gamma_{rho,mu+1}(omega t^rho).
  SeriesEvaluation primitive(double t) const {
    if (t == 0.0) return zero();
    return scaled(first_, t, params_.mu);
  }

  /// Integral of primitive() over [0, t]: t^(mu+1) E^gamma_{rho,mu+2}(omega t^rho).
  SeriesEvaluation second_primitive(double t) const {
    if (t == 0.0) return zero();
    return scaled(second_, t, params_.mu + 1.0);
  }

 private:
  static SeriesEvaluation zero() { return {0.0, 1, 0.0, true}; }

  SeriesEvaluation scaled(const MittagLeffler& ml, double t, cplx power) const {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("kernel time must be positive", "t");
    const cplx z = params_.omega * std::pow(t, params_.rho);
    SeriesEvaluation e = ml(z, eps_);
    const cplx factor = std::pow(cplx(t), power);
    e.value *= factor;
    e.error_bound *= std::abs(factor);
    return e;
  }

  MLParams params_;
  double eps_;
  MittagLeffler value_;
  MittagLeffler first_;
  MittagLeffler second_;
};

/// e^gamma_{rho,mu,omega}(t) with propagated error bound; DomainError for t <= 0.
inline SeriesEvaluation prabhakar_kernel(const MLParams& p, double t, double eps = kDefaultEps) {
  if (!(t > 0.0)) throw DomainError("prabhakar_kernel requires t > 0", "t");
  return PrabhakarKernel(p, eps).value(t);
}

}  // namespace hpfrac

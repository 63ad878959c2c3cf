#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace hpfrac {

using cplx = std::complex<double>;

namespace detail {

// Extended working precision used inside series evaluations.
using wide = long double;
using wcplx = std::complex<wide>;

inline constexpr wide kWideEpsilon = std::numeric_limits<wide>::epsilon();
inline constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;

template <class T>
bool is_finite(const std::complex<T>& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline bool is_finite(double x) { return std::isfinite(x); }

// Neumaier's variant of compensated summation, one instance per real lane.
template <class T>
class CompensatedSum {
 public:
  void add(T x) {
    const T t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  T value() const { return sum_ + comp_; }

 private:
  T sum_{0};
  T comp_{0};
};

template <class T>
class CompensatedSum<std::complex<T>> {
 public:
  void add(const std::complex<T>& x) {
    re_.add(x.real());
    im_.add(x.imag());
  }
  std::complex<T> value() const { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum<T> re_;
  CompensatedSum<T> im_;
};

template <class T>
std::complex<T> widen(const std::complex<double>& z) {
  return {static_cast<T>(z.real()), static_cast<T>(z.imag())};
}

inline cplx narrow(const wcplx& z) {
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

// True when x is an integer <= 0 (to within exact representation).
inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

}  // namespace detail
}  // namespace hpfrac

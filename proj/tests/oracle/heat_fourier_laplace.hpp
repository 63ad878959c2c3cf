#pragma once

// Independent heat oracle: Talbot inversion of the Fourier-Laplace solution
// at every wavenumber, then Gauss-Legendre quadrature over k.

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "hpfrac/heat.hpp"
#include "hpfrac/laplace.hpp"

namespace oracle {

using hpfrac::cplx;

inline cplx heat_fourier_laplace(const hpfrac::HeatProblem& p, double k, double t) {
  const auto& s = p.spec;
  const auto F = [&](cplx z) {
    const cplx base = 1.0 - s.omega * std::pow(z, -s.rho);
    const cplx symbol = std::pow(z, s.mu) * std::pow(base, s.gamma);
    const cplx initial = s.regularized ? std::pow(z, s.mu - 1.0) * std::pow(base, s.gamma)
                                       : std::pow(z, s.nu * (s.mu - 1.0)) * std::pow(base, s.gamma * s.nu);
    return initial / (symbol + p.K * k * k);
  };
  hpfrac::ContourConfig cfg;
  cfg.node_count = 48;
  return p.datum(k) * hpfrac::invert_lt(F, t, cfg).value;
}

inline cplx heat_physical(const hpfrac::HeatProblem& p, double x, double t, double k_max, int panels = 48) {
  using Gauss = boost::math::quadrature::gauss<double, 20>;
  cplx acc = 0.0;
  const double width = 2.0 * k_max / panels;
  for (int i = 0; i < panels; ++i) {
    const double mid = -k_max + width * (i + 0.5);
    for (std::size_t j = 0; j < Gauss::abscissa().size(); ++j) {
      for (double side : {-1.0, 1.0}) {
        const double k = mid + side * 0.5 * width * Gauss::abscissa()[j];
        acc += 0.5 * width * Gauss::weights()[j] * std::exp(cplx(0.0, -k * x)) * heat_fourier_laplace(p, k, t);
      }
    }
  }
  return acc / (2.0 * std::numbers::pi);
}

}  // namespace oracle

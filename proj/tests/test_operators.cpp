#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "hpfrac/laplace.hpp"
#include "hpfrac/operators.hpp"

namespace {

using hpfrac::cplx;
using hpfrac::MLParams;
using hpfrac::SampledSignal;

double max_error(const SampledSignal& a, const std::function<cplx(double)>& exact, double from = 0.0) {
  double worst = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (a.time(i) < from) continue;
    worst = std::max(worst, std::abs(a.values[i] - exact(a.time(i))));
  }
  return worst;
}

double max_diff(const SampledSignal& a, const SampledSignal& b, double from = 0.0) {
  double worst = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (a.time(i) < from) continue;
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  }
  return worst;
}

SampledSignal constant(double c, double horizon, std::size_t n) {
  return SampledSignal::sample([=](double) { return cplx(c); }, horizon, n);
}

SampledSignal monomial(int p, double horizon, std::size_t n) {
  return SampledSignal::sample([=](double t) { return cplx(std::pow(t, p)); }, horizon, n);
}

TEST(PrabhakarIntegral, PlainIntegrationOfOne) {
  const auto out = hpfrac::prabhakar_integral(constant(1.0, 2.0, 64), {1.0, 1.0, 0.0, 0.0});
  EXPECT_EQ(out.values[0], cplx(0.0));
  EXPECT_LT(max_error(out, [](double t) { return cplx(t); }), 1e-14);
}

TEST(PrabhakarIntegral, ExactForLinearData) {
  // Linear interpolation is exact for f = 1 and f = t, so only rounding remains.
  const MLParams p{0.7, 0.45, 1.6, cplx(-0.9, 0.4)};
  const hpfrac::MittagLeffler e1(p.rho, p.mu + 1.0, p.gamma);
  const hpfrac::MittagLeffler e2(p.rho, p.mu + 2.0, p.gamma);
  const auto ones = hpfrac::prabhakar_integral(constant(1.0, 3.0, 100), p);
  EXPECT_LT(max_error(ones, [&](double t) {
              return std::pow(cplx(t), p.mu) * e1(p.omega * std::pow(t, p.rho)).value;
            }),
            1e-11);
  const auto line = hpfrac::prabhakar_integral(monomial(1, 3.0, 100), p);
  EXPECT_LT(max_error(line, [&](double t) {
              return std::tgamma(2.0) * std::pow(cplx(t), p.mu + 1.0) * e2(p.omega * std::pow(t, p.rho)).value;
            }),
            1e-11);
}

TEST(PrabhakarIntegral, RectangularSchemeIsFirstOrder) {
  hpfrac::QuadratureConfig cfg;
  cfg.scheme = hpfrac::Scheme::rectangular;
  const MLParams p{1.0, 0.5, 0.0, 0.0};
  const auto exact = [](double t) { return cplx(std::pow(t, 1.5) / std::tgamma(2.5)); };
  const double coarse = max_error(hpfrac::prabhakar_integral(monomial(1, 1.0, 128), p, cfg), exact);
  const double fine = max_error(hpfrac::prabhakar_integral(monomial(1, 1.0, 256), p, cfg), exact);
  EXPECT_NEAR(coarse / fine, 2.0, 0.2);
}

TEST(PrabhakarDerivative, RiemannLiouvilleOfMonomials) {
  const MLParams p{0.8, 0.5, 0.0, -1.3};
  // D^0.5 t = t^0.5 / Gamma(1.5) and D^0.5 c = c t^-0.5 / Gamma(0.5); the
  // first few nodes carry a boundary layer, so errors are read on [0.25, 1].
  const auto line_exact = [](double t) { return cplx(std::sqrt(t) / std::tgamma(1.5)); };
  const auto const_exact = [](double t) { return cplx(2.0 / std::sqrt(t) / std::tgamma(0.5)); };
  double previous_line = 0.0;
  double previous_const = 0.0;
  for (std::size_t n : {128, 256, 512}) {
    const double e_line = max_error(hpfrac::prabhakar_derivative(monomial(1, 1.0, n), p), line_exact, 0.25);
    const double e_const = max_error(hpfrac::prabhakar_derivative(constant(2.0, 1.0, n), p), const_exact, 0.25);
    EXPECT_LT(e_line, 1e-3);
    EXPECT_LT(e_const, 1e-3);
    if (previous_line > 0.0) {
      EXPECT_GT(previous_line / e_line, 1.7);
      EXPECT_GT(previous_const / e_const, 1.7);
    }
    previous_line = e_line;
    previous_const = e_const;
  }
}

TEST(RegularizedDerivative, ConstantsVanishAndLinesAreExact) {
  const MLParams p{0.9, 0.5, 0.0, 0.0};
  const auto zero = hpfrac::regularized_prabhakar_derivative(constant(3.0, 2.0, 64), p);
  for (const cplx& v : zero.values) EXPECT_EQ(v, cplx(0.0));
  const auto line = hpfrac::regularized_prabhakar_derivative(monomial(1, 2.0, 64), p);
  EXPECT_LT(max_error(line, [](double t) { return cplx(std::sqrt(t) / std::tgamma(1.5)); }), 1e-13);
  // General kernel: D^C t = t^(1-mu) E^{-gamma}_{rho,2-mu}(omega t^rho).
  const MLParams q{0.6, 0.3, 1.4, -0.7};
  const hpfrac::MittagLeffler e(q.rho, 2.0 - 0.3, -q.gamma);
  const auto general = hpfrac::regularized_prabhakar_derivative(monomial(1, 2.0, 64), q);
  EXPECT_LT(max_error(general, [&](double t) { return std::pow(t, 0.7) * e(q.omega * std::pow(t, q.rho)).value; }),
            1e-12);
}

TEST(RegularizedDerivative, UsesRecordedInitialValue) {
  const MLParams p{0.9, 0.5, 0.0, 0.0};
  auto f = monomial(1, 1.0, 32);
  const auto base = hpfrac::regularized_prabhakar_derivative(f, p);
  f.values[0] = 42.0;  // ignored: f(0+) comes from initial_value
  const auto same = hpfrac::regularized_prabhakar_derivative(f, p);
  EXPECT_EQ(base.values, same.values);
}

TEST(RegularizedDerivative, MatchesPlainDerivativeOfShiftedSignal) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng);
  const auto f = [=](double t) { return cplx(1.0 + a * std::sin(3.0 * t) + b * t * t, c * std::cos(t)); };
  const MLParams p{0.7, 0.4, 1.1, -0.6};
  double previous = 0.0;
  for (std::size_t n : {128, 256, 512}) {
    const auto s = SampledSignal::sample(f, 1.5, n);
    const SampledSignal shifted = s - SampledSignal::sample([&](double) { return s.initial_value; }, 1.5, n);
    const double err = max_diff(hpfrac::regularized_prabhakar_derivative(s, p),
                                hpfrac::prabhakar_derivative(shifted, p), 0.3);
    if (previous > 0.0) EXPECT_GT(previous / err, 1.5) << n;
    previous = err;
  }
  EXPECT_LT(previous, 2e-3);
}

TEST(HilferPrabhakar, EndpointsInNu) {
  const auto f = SampledSignal::sample([](double t) { return cplx(std::exp(-t), t); }, 2.0, 200);
  hpfrac::HPOperatorSpec spec{0.8, 0.35, 0.0, 0.6, -1.2, false};
  const MLParams p = spec.kernel();
  EXPECT_EQ(hpfrac::hilfer_prabhakar_derivative(f, spec).values, hpfrac::prabhakar_derivative(f, p).values);
  spec.nu = 1.0;
  EXPECT_EQ(hpfrac::hilfer_prabhakar_derivative(f, spec).values,
            hpfrac::regularized_prabhakar_derivative(f, p).values);
}

TEST(HilferPrabhakar, PlainMinusInitialTermIsRegularized) {
  // D f - t^-mu E^{-gamma}_{rho,1-mu}(omega t^rho) f(0+) = D^C f.
  const hpfrac::HPOperatorSpec spec{0.8, 0.35, 0.0, 0.6, -1.2, false};
  const hpfrac::MittagLeffler e(spec.rho, 1.0 - spec.mu, -spec.gamma);
  const auto g = [](double t) { return cplx(std::exp(-t), 1.0 + t); };
  double previous = 0.0;
  for (std::size_t n : {100, 200, 400}) {
    const auto f = SampledSignal::sample(g, 2.0, n);
    auto plain = hpfrac::hilfer_prabhakar_derivative(f, spec);
    for (std::size_t i = 1; i < plain.size(); ++i) {
      const double t = plain.time(i);
      plain.values[i] -= std::pow(t, -spec.mu) * e(spec.omega * std::pow(t, spec.rho)).value * f.initial_value;
    }
    const double err = max_diff(plain, hpfrac::regularized_prabhakar_derivative(f, spec.kernel()), 0.4);
    if (previous > 0.0) EXPECT_GT(previous / err, 1.5) << n;
    previous = err;
  }
  EXPECT_LT(previous, 5e-3);
}

TEST(HilferPrabhakar, HilferDerivativeOfMonomials) {
  // gamma = 0: D^{mu,nu} t^p = Gamma(p+1)/Gamma(p+1-mu) t^(p-mu) for p = 0, 1, 2
  // and nu < 1 (the constant is annihilated only at nu = 1).
  const double mu = 0.4;
  for (double nu : {0.0, 0.3, 0.7}) {
    for (int p : {0, 1, 2}) {
      const hpfrac::HPOperatorSpec spec{0.0, mu, nu, 0.9, -0.5, false};
      const auto exact = [&](double t) {
        return cplx(std::tgamma(p + 1.0) / std::tgamma(p + 1.0 - mu) * std::pow(t, p - mu));
      };
      const double coarse = max_error(hpfrac::hilfer_prabhakar_derivative(monomial(p, 1.0, 200), spec), exact, 0.25);
      const double fine = max_error(hpfrac::hilfer_prabhakar_derivative(monomial(p, 1.0, 400), spec), exact, 0.25);
      EXPECT_LT(fine, 2e-3) << "nu=" << nu << " p=" << p;
      EXPECT_GT(coarse / fine, 1.5) << "nu=" << nu << " p=" << p;
    }
  }
  const hpfrac::HPOperatorSpec caputo{0.0, mu, 1.0, 0.9, -0.5, false};
  for (const cplx& v : hpfrac::hilfer_prabhakar_derivative(constant(1.0, 1.0, 50), caputo).values) {
    EXPECT_EQ(v, cplx(0.0));
  }
}

TEST(Operators, LinearInSignal) {
  const auto f = SampledSignal::sample([](double t) { return cplx(std::cos(t), t); }, 1.0, 128);
  const auto g = SampledSignal::sample([](double t) { return cplx(t * t, -std::sin(2 * t)); }, 1.0, 128);
  const cplx a(0.7, -1.1), b(-2.3, 0.4);
  SampledSignal mix = f;
  for (std::size_t i = 0; i < mix.size(); ++i) mix.values[i] = a * f.values[i] + b * g.values[i];
  mix.initial_value = a * f.initial_value + b * g.initial_value;
  const hpfrac::HPOperatorSpec spec{1.2, 0.6, 0.4, 0.7, cplx(-0.5, 0.5), false};
  auto check = [&](auto op) {
    const auto lhs = op(mix);
    const auto rf = op(f);
    const auto rg = op(g);
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      const cplx rhs = a * rf.values[i] + b * rg.values[i];
      EXPECT_LE(std::abs(lhs.values[i] - rhs), 1e-12 * (1.0 + std::abs(rhs)));
    }
  };
  check([&](const SampledSignal& s) { return hpfrac::prabhakar_integral(s, spec.kernel()); });
  check([&](const SampledSignal& s) { return hpfrac::prabhakar_derivative(s, spec.kernel()); });
  check([&](const SampledSignal& s) { return hpfrac::regularized_prabhakar_derivative(s, spec.kernel()); });
  check([&](const SampledSignal& s) { return hpfrac::hilfer_prabhakar_derivative(s, spec); });
}

TEST(Operators, RegularizedIgnoresNu) {
  const auto f = SampledSignal::sample([](double t) { return cplx(std::exp(t), t); }, 1.0, 100);
  hpfrac::HPOperatorSpec spec{0.9, 0.5, 0.2, 0.8, -1.0, true};
  const auto a = hpfrac::apply(f, spec);
  spec.nu = 0.8;
  const auto b = hpfrac::apply(f, spec);
  EXPECT_EQ(a.values, b.values);
}

TEST(Operators, SemigroupAndLeftInverseConverge) {
  const auto g = [](double t) { return cplx(std::cos(2.0 * t) + t * t, 0.3 * t); };
  const MLParams p1{0.7, 0.6, 0.8, cplx(-1.0, 0.2)};
  const MLParams p2{0.7, 0.5, 1.3, cplx(-1.0, 0.2)};
  const MLParams sum{0.7, 1.1, 2.1, cplx(-1.0, 0.2)};
  const MLParams q{0.7, 0.4, 0.9, -1.5};
  hpfrac::QuadratureConfig cfg;
  cfg.scheme = hpfrac::Scheme::rectangular;
  std::vector<double> semigroup, inverse;
  for (std::size_t n : {256, 512}) {
    const auto f = SampledSignal::sample(g, 2.0, n);
    semigroup.push_back(max_diff(hpfrac::prabhakar_integral(hpfrac::prabhakar_integral(f, p2, cfg), p1, cfg),
                                 hpfrac::prabhakar_integral(f, sum, cfg)));
    inverse.push_back(
        max_diff(hpfrac::prabhakar_derivative(hpfrac::prabhakar_integral(f, q, cfg), q, cfg), f, 0.25));
  }
  EXPECT_NEAR(semigroup[0] / semigroup[1], 2.0, 0.4);
  EXPECT_NEAR(inverse[0] / inverse[1], 2.0, 0.4);
}

TEST(Operators, Validation) {
  const auto f = constant(1.0, 1.0, 8);
  EXPECT_THROW(hpfrac::prabhakar_derivative(f, {1.0, 1.5, 0.0, 0.0}), hpfrac::DomainError);
  EXPECT_THROW((hpfrac::HPOperatorSpec{0.0, 1.2, 0.0, 1.0, 0.0, false}).validate(), hpfrac::DomainError);
  EXPECT_THROW((hpfrac::HPOperatorSpec{0.0, 0.5, 1.5, 1.0, 0.0, false}).validate(), hpfrac::DomainError);
  EXPECT_THROW((hpfrac::HPOperatorSpec{-1.0, 0.5, 0.5, 1.0, 0.0, false}).validate(), hpfrac::DomainError);
  SampledSignal tiny = f;
  tiny.values.resize(3);
  EXPECT_THROW(hpfrac::prabhakar_integral(tiny, {1.0, 1.0, 0.0, 0.0}), hpfrac::DomainError);
  hpfrac::QuadratureConfig cfg;
  cfg.fd_order = 3;
  EXPECT_THROW(hpfrac::prabhakar_integral(f, {1.0, 1.0, 0.0, 0.0}, cfg), hpfrac::ConfigError);
}

TEST(LaplaceSymbol, Reductions) {
  const cplx s(2.0, 1.0);
  const hpfrac::HPOperatorSpec hilfer{0.0, 0.4, 0.3, 0.5, -1.0, false};
  const auto h = hpfrac::laplace_symbol(hilfer, s);
  EXPECT_LT(std::abs(h.multiplier - std::pow(s, 0.4)), 1e-15);
  EXPECT_LT(std::abs(h.initial_coefficient - std::pow(s, 0.3 * (0.4 - 1.0))), 1e-15);
  const hpfrac::HPOperatorSpec caputo{1.3, 0.4, 0.3, 0.5, 0.0, true};
  const auto c = hpfrac::laplace_symbol(caputo, s);
  EXPECT_LT(std::abs(c.multiplier - std::pow(s, 0.4)), 1e-15);
  EXPECT_LT(std::abs(c.initial_coefficient - std::pow(s, 0.4 - 1.0)), 1e-15);
  EXPECT_THROW(hpfrac::laplace_symbol({1.0, 0.4, 0.3, 0.5, -4.0, false}, 2.0), hpfrac::BranchError);
  EXPECT_THROW(hpfrac::laplace_symbol(hilfer, cplx(-1.0, 1.0)), hpfrac::BranchError);
}

TEST(LaplaceSymbol, MatchesTransformOfDiscreteOperator) {
  // L[D f] = multiplier L[f] - coefficient * datum, with datum the value at
  // 0+ of the inner Prabhakar integral (f(0+) for the regularized form).
  const auto g = [](double t) { return cplx(std::exp(-t)); };
  const auto f = SampledSignal::sample(g, 40.0, 8000);
  for (bool regularized : {false, true}) {
    const hpfrac::HPOperatorSpec spec{0.7, 0.6, regularized ? 0.5 : 1.0, 0.5, -0.3, regularized};
    const auto d = hpfrac::apply(f, spec);
    for (cplx s : {cplx(2.0), cplx(3.0, 1.0)}) {
      const auto sym = hpfrac::laplace_symbol(spec, s);
      const cplx expected = sym.multiplier / (s + 1.0) - sym.initial_coefficient * f.initial_value;
      EXPECT_LT(std::abs(hpfrac::forward_lt(d, s, 1e-3).value - expected), 2e-3 * std::abs(expected))
          << "regularized=" << regularized << " s=" << s;
    }
  }
}

}  // namespace

#include "oslab/semiclass.hpp"

#include "doctest.h"

#include <cmath>

using namespace oslab;

namespace {

Point p1(double x) {
  Point v(1);
  v << x;
  return v;
}

Complex gauss(double x, double c, double w) { return std::exp(-M_PI * std::pow((x - c) / w, 2)); }

GridFunction packet(const Grid& g, double c, double w, double k = 0.0) {
  return GridFunction::sample(g, [&](const Point& x) { return gauss(x(0), c, w) * std::polar(1.0, 2 * M_PI * k * x(0)); });
}

GridFunction bump(const Grid& g, double radius) {
  return GridFunction::sample(g, [&](const Point& x) {
    const double r = wrap(x(0), g.L) / radius;
    return Complex(std::abs(r) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0);
  });
}

PhaseSymbol::SpaceFn gaussian_x(double c, double w) {
  return [=](const Point& x) { return gauss(x(0), c, w); };
}

PhaseSymbol::SpaceFn bump_x(double radius) {
  return [=](const Point& x) {
    const double r = x(0) / radius;
    return Complex(std::abs(r) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0);
  };
}

std::vector<double> dyadic_omegas(int lo, int hi) {
  std::vector<double> out;
  for (int j = lo; j <= hi; ++j) out.push_back(std::ldexp(1.0, -j));
  return out;
}

}  // namespace

TEST_CASE("quantisation of special symbols") {
  const Grid g(1, 1.0, 128);
  const GridFunction u = packet(g, 0.05, 0.2, 3.0);
  SUBCASE("xi-only symbols are Fourier multipliers for every t") {
    const Symbol psi = Symbol::gaussian(1);
    const PhaseSymbol a = PhaseSymbol::xi_only(psi);
    const PhaseSymbol general = PhaseSymbol::general(1, [&](const Point&, const Freq& xi) { return a(p1(0), xi); }, true);
    const GridFunction ref = apply_multiplier(psi, 0.25, u);
    for (double t : {0.0, 0.3, 0.5, 1.0}) {
      CHECK(sup_norm(op_t_apply(a, {t, 0.25}, u) - ref) < 1e-12);
      CHECK(sup_norm(op_t_apply(general, {t, 0.25}, u) - ref) < 1e-12);
    }
  }
  SUBCASE("x-only symbols multiply pointwise") {
    const PhaseSymbol a = PhaseSymbol::x_only(1, gaussian_x(0.1, 0.3));
    const GridFunction ref =
        multiply_pointwise(GridFunction::sample(g, [](const Point& x) { return gauss(x(0), 0.1, 0.3); }), u);
    CHECK(sup_norm(op_t_apply(a, {1.0, 0.25}, u) - ref) < 1e-12);
    const PhaseSymbol general = PhaseSymbol::general(1, [](const Point& x, const Freq&) { return gauss(x(0), 0.1, 0.3); }, false);
    CHECK(sup_norm(op_t_apply(general, {1.0, 0.25}, u) - ref) < 1e-10);
  }
  SUBCASE("the unit symbol is the identity") {
    const PhaseSymbol one = PhaseSymbol::xi_only(Symbol::constant(1, 1.0));
    CHECK(sup_norm(op_t_apply(one, {0.5, 0.125}, u) - u) < 1e-13);
  }
  SUBCASE("separable fast paths agree with the general kernel") {
    const PhaseSymbol a = PhaseSymbol::separable(gaussian_x(0.0, 0.3), Symbol::gaussian(1));
    const PhaseSymbol general = PhaseSymbol::general(1, [&](const Point& x, const Freq& xi) { return a(x, xi); }, true);
    for (double t : {0.0, 0.3, 0.5, 1.0})
      CHECK(sup_norm(op_t_apply(a, {t, 0.25}, u) - op_t_apply(general, {t, 0.25}, u)) < 1e-10);
  }
}

TEST_CASE("Wigner transform") {
  const Grid g(1, 1.0, 128);
  SUBCASE("xi marginal is u conj(v)") {
    const GridFunction u = packet(g, 0.05, 0.2, 3.0);
    for (double t : {0.0, 0.5, 0.8}) {
      const WignerTransform w = wigner(u, u, {t, 0.25});
      const GridFunction sq(g, u.values().cwiseAbs2().cast<Complex>());
      CHECK(sup_norm(w.xi_marginal() - sq) < 1e-8);
    }
  }
  SUBCASE("two pure modes meet on one frequency line") {
    const GridFunction u = packet(g, 0.0, 1e6, 3.0), v = packet(g, 0.0, 1e6, 5.0);
    const WignerTransform w = wigner(u, v, {0.5, 1.0});
    double off = 0.0, on = 0.0;
    for (Eigen::Index k = 0; k < w.values.cols(); ++k) {
      const double m = w.values.col(k).cwiseAbs().maxCoeff();
      if (g.wavenumber(k)[0] == 4) on = m;
      else off = std::max(off, m);
    }
    CHECK(on > 0.5);
    CHECK(off < 1e-10 * on);
  }
  SUBCASE("zero input") {
    const WignerTransform w = wigner(GridFunction(g), packet(g, 0.0, 0.2), {0.5, 0.5});
    CHECK(w.values.isZero(0.0));
  }
}

TEST_CASE("Wigner pairing identity") {
  const Grid g(1, 1.0, 256);
  const GridFunction u = packet(g, 0.05, 0.2, 3.0), v = packet(g, -0.03, 0.25);
  const PhaseSymbol a = PhaseSymbol::separable(gaussian_x(0.0, 0.3), Symbol::gaussian(1));
  for (double t : {0.5, 1.0})
    for (double w : {0.25, 1.0 / 16}) CHECK(pairing_identity(u, v, {t, w}, a).relative() < 1e-8);

  SUBCASE("unit symbol pairs to <u, conj v>") {
    const PairingIdentity id = pairing_identity(u, v, {0.5, 0.25}, PhaseSymbol::xi_only(Symbol::constant(1, 1.0)));
    const Complex ref = integral_product(u, v);
    CHECK(std::abs(id.wigner_side - ref) < 1e-10);
    CHECK(std::abs(id.operator_side - ref) < 1e-12);
  }
  SUBCASE("the gap is subadditive in the symbol") {
    const PhaseSymbol b = PhaseSymbol::separable(gaussian_x(0.1, 0.2), Symbol::gaussian(1, 0.5));
    const QuantParams q{0.5, 0.25};
    CHECK(wigner_pairing_gap(u, v, q, a + b) <= wigner_pairing_gap(u, v, q, a) + wigner_pairing_gap(u, v, q, b) + 1e-14);
  }
}

TEST_CASE("quantisation gaps") {
  const Grid g(1, 1.0, 512);
  const GridFunction u = packet(g, 0.05, 0.2);
  const auto omegas = dyadic_omegas(2, 7);
  SUBCASE("xi-only symbols have no gap") {
    const NormProfile p = quantisation_gap(PhaseSymbol::xi_only(Symbol::gaussian(1)), 1.0, 0.5, omegas, u);
    CHECK(p.identically_zero);
    for (double n : p.norms) CHECK(n == 0.0);
  }
  SUBCASE("equal parameters") {
    const PhaseSymbol a = PhaseSymbol::separable(bump_x(0.3), Symbol::gaussian(1));
    for (double n : quantisation_gap(a, 0.5, 0.5, omegas, u).norms) CHECK(n == 0.0);
  }
  SUBCASE("first-order gap for bump times shifted Gaussian") {
    Freq shift(1);
    shift << 0.5;
    const PhaseSymbol a = PhaseSymbol::separable(bump_x(0.3), translate(Symbol::gaussian(1), shift));
    const NormProfile p = quantisation_gap(a, 1.0, 0.5, omegas, u);
    CHECK(p.slope >= 0.8);
    CHECK(p.slope <= 1.2);
  }
}

TEST_CASE("semiclassical pairing") {
  const Grid g(1, 1.0, 4096);
  const Schedule inv_n = Schedule::power(1.0, -1.0);
  const SequenceFamily u = SequenceFamily::oscillation(Profile::constant(), p1(1.0), inv_n, 2.0);
  const GridFunction phi = bump(g, 0.3);
  const auto ns = dyadic_schedule(6);
  const double bump_sq = 0.2950142438738155;

  const SemiclassicalTrace lost = semiclassical_pairing(u, u, Schedule::power(1.0, -0.5), phi, phi, Symbol::gaussian(1), ns, g);
  CHECK(std::abs(lost.trace.value()) < 1e-2 * lost.trace.scale);

  const SemiclassicalTrace kept = semiclassical_pairing(u, u, inv_n, phi, phi, Symbol::gaussian(1), ns, g);
  CHECK(std::abs(kept.trace.value() - std::exp(-M_PI) * bump_sq) < 0.01 * std::exp(-M_PI) * bump_sq);

  const SemiclassicalTrace zero = semiclassical_pairing(u, u, inv_n, phi, phi, Symbol::gaussian(1).scaled(0.0), ns, g);
  CHECK(std::abs(zero.trace.value()) == 0.0);

  CHECK_THROWS_AS(semiclassical_pairing(u, u, inv_n, phi, phi, Symbol::rational(1, MultiIndex{0, 0, 0}, 0, 1), ns, g),
                  DomainError);
}

TEST_CASE("guards") {
  const PhaseSymbol a = PhaseSymbol::general(1, [](const Point&, const Freq&) { return Complex(1.0); }, true);
  const Grid big(1, 1.0, 4096);
  CHECK_THROWS_AS(op_t_apply(a, {0.5, 0.5}, GridFunction(big)), CostGuard);
  CHECK_THROWS_AS((QuantParams{1.5, 0.5}.validate()), DomainError);
  CHECK_THROWS_AS((QuantParams{0.5, 0.0}.validate()), DomainError);
}

#include "oslab/symbol.hpp"

#include "doctest.h"

#include <cmath>

using namespace oslab;

namespace {

Freq f1(double x) {
  Freq v(1);
  v << x;
  return v;
}
Freq f2(double x, double y) {
  Freq v(2);
  v << x, y;
  return v;
}

Symbol coordinate_symbol(int d) {
  SpherePolynomial poly;
  poly.a = Eigen::VectorXcd::Zero(d);
  poly.a(0) = 1.0;
  return Symbol::homogeneous(d, poly);
}

}  // namespace

TEST_CASE("rational 1/(1+xi^2) has traces 1 and 0") {
  const Symbol s = Symbol::rational(1, MultiIndex{0, 0, 0}, 0, 2);
  CHECK(std::abs(s(f1(2.0)) - 0.2) < 1e-15);
  REQUIRE(s.has_trace0());
  REQUIRE(s.has_trace_inf());
  CHECK(std::abs(s.trace0(f1(1)) - 1.0) < 1e-15);
  CHECK(std::abs(s.trace_inf(f1(-1))) < 1e-15);
}

TEST_CASE("rational xi_1/(|xi|+|xi|) is a halved coordinate on the circle") {
  const Symbol s = Symbol::rational(2, MultiIndex{1, 0, 0}, 1, 1);
  const Freq xi = f2(3.0, 4.0);
  CHECK(std::abs(s(xi) - 0.3) < 1e-15);
  for (const Freq& e : sphere_directions(2, 12)) {
    CHECK(std::abs(s.trace0(e) - 0.5 * e(0)) < 1e-15);
    CHECK(std::abs(s.trace_inf(e) - 0.5 * e(0)) < 1e-15);
  }
  CHECK_THROWS_AS(Symbol::rational(2, MultiIndex{1, 0, 0}, 2, 1), DomainError);
}

TEST_CASE("constant homogeneous symbol") {
  SpherePolynomial one;
  one.c0 = 1.0;
  const Symbol s = Symbol::homogeneous(3, one);
  Freq xi(3);
  xi << 0.1, -2.0, 7.0;
  CHECK(s(xi) == Complex(1.0));
  CHECK(s.trace0(xi / xi.norm()) == Complex(1.0));
  CHECK(s.trace_inf(xi / xi.norm()) == Complex(1.0));
}

TEST_CASE("boundary traces from radial sampling") {
  SUBCASE("Gaussian decays at infinity") {
    const TraceReport r = boundary_traces(Symbol::gaussian(2), 8, 3);
    CHECK(r.has_trace_inf);
    CHECK(r.residual_inf() < 1e-8);
    for (const Complex& v : r.trace_inf) CHECK(std::abs(v) < 1e-8);
  }
  SUBCASE("degree-zero coordinate symbol is constant along rays") {
    const TraceReport r = boundary_traces(coordinate_symbol(2), 16);
    REQUIRE(r.has_trace0);
    REQUIRE(r.has_trace_inf);
    for (std::size_t k = 0; k < r.directions.size(); ++k) {
      CHECK(std::abs(r.trace0[k] - r.directions[k](0)) < 1e-15);
      CHECK(std::abs(r.trace_inf[k] - r.directions[k](0)) < 1e-15);
    }
    CHECK(r.residual0() == 0.0);
    CHECK(r.residual_inf() == 0.0);
  }
  SUBCASE("sin(log|xi|) has no trace") {
    const Symbol s = Symbol::custom(
        1, [](const Freq& xi) { return Complex(std::sin(std::log(xi.norm()))); }, "sin-log");
    const TraceReport r = boundary_traces(s, 2);
    CHECK_FALSE(r.has_trace0);
    CHECK_FALSE(r.has_trace_inf);
  }
  SUBCASE("built-in families agree with their attached traces") {
    const std::vector<Symbol> suite{Symbol::rational(1, MultiIndex{0, 0, 0}, 0, 1),
                                    Symbol::rational(2, MultiIndex{0, 1, 0}, 0, 2),
                                    Symbol::sobolev_weight(2, 2.0), Symbol::gaussian(3, 0.5),
                                    coordinate_symbol(3)};
    for (const Symbol& s : suite) {
      const TraceReport r = boundary_traces(s, 16, 12);
      REQUIRE(r.has_trace0);
      REQUIRE(r.has_trace_inf);
      for (std::size_t k = 0; k < r.directions.size(); ++k) {
        CHECK(std::abs(r.trace0[k] - s.trace0(r.directions[k])) <= 2 * r.residual0() + 1e-6);
        CHECK(std::abs(r.trace_inf[k] - s.trace_inf(r.directions[k])) <= 2 * r.residual_inf() + 1e-6);
      }
    }
  }
}

TEST_CASE("Mihlin constants") {
  SUBCASE("constant symbol") {
    const MihlinReport r = mihlin_estimate(Symbol::constant(2, 1.0), 2);
    CHECK(r.constant == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("sign in one dimension") {
    const MihlinReport r = mihlin_estimate(coordinate_symbol(1), 1);
    CHECK(r.constant == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.ray_spread < 1e-14);
  }
  SUBCASE("1/(1+|xi|^2) is stable across lattice extents") {
    const Symbol s = Symbol::rational(2, MultiIndex{0, 0, 0}, 0, 2);
    MihlinLattice small, large;
    small.j_min = -10;
    small.j_max = 10;
    large.j_min = -20;
    large.j_max = 20;
    const double a = mihlin_estimate(s, 2, small).constant;
    const double b = mihlin_estimate(s, 2, large).constant;
    CHECK(std::isfinite(a));
    CHECK(std::abs(a - b) / a < 0.05);
  }
  SUBCASE("order above floor(d/2)+1 is refused") {
    CHECK_THROWS(mihlin_estimate(Symbol::gaussian(1), 2));
  }
}

TEST_CASE("dilation") {
  const Symbol r = Symbol::rational(1, MultiIndex{0, 0, 0}, 0, 2);
  CHECK(std::abs(dilate(r, 2.0)(f1(1.0)) - 0.2) < 1e-15);
  CHECK(dilate(r, 1.0)(f1(0.37)) == r(f1(0.37)));
  CHECK_THROWS_AS(dilate(r, 0.0), DomainError);
  CHECK_THROWS_AS(dilate(r, -1.0), DomainError);
  CHECK(dilate(r, 3.0).trace0(f1(1)) == r.trace0(f1(1)));

  const std::vector<Symbol> suite{r, Symbol::gaussian(2), Symbol::sobolev_weight(1, 3.0), coordinate_symbol(2),
                                  Symbol::rational(2, MultiIndex{1, 1, 0}, 1, 3)};
  for (const Symbol& s : suite) {
    const int order = s.dim() / 2 + 1;
    const MihlinLattice lat;
    const double base = mihlin_estimate(s, order, lat).constant;
    for (double a : {0.1, 10.0}) {
      MihlinLattice scaled = lat;
      scaled.scale = lat.scale / a;
      CHECK(mihlin_estimate(dilate(s, a), order, scaled).constant == base);
      CHECK(std::abs(mihlin_estimate(dilate(s, a), order, lat).constant - base) <= 0.05 * base);
    }
  }
}

TEST_CASE("translate keeps Schwartz symbols Schwartz") {
  const Symbol g = Symbol::gaussian(1);
  const Symbol t = translate(g, f1(0.5));
  CHECK(t.schwartz());
  CHECK(std::abs(t(f1(0.5)) - 1.0) < 1e-15);
  CHECK(std::abs(t.trace0(f1(1)) - std::exp(-M_PI * 0.25)) < 1e-15);
  CHECK_THROWS_AS(translate(Symbol::rational(1, MultiIndex{0, 0, 0}, 0, 1), f1(1.0)), DomainError);
}

TEST_CASE("zero value policy and algebra") {
  const Symbol s = coordinate_symbol(1);
  CHECK(s.zero_value() == Complex(0.0));
  CHECK(s.with_zero_value(0.5).zero_value() == Complex(0.5));
  CHECK(Symbol::gaussian(1).zero_value() == Complex(1.0));
  const Symbol prod = Symbol::gaussian(1) * Symbol::rational(1, MultiIndex{0, 0, 0}, 0, 2);
  CHECK(std::abs(prod(f1(1.0)) - 0.5 * std::exp(-M_PI)) < 1e-15);
  const Symbol sum = Symbol::constant(1, 2.0) + s;
  CHECK(std::abs(sum(f1(-3.0)) - 1.0) < 1e-15);
}

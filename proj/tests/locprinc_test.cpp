#include "oslab/locprinc.hpp"

#include "doctest.h"

#include <cmath>

using namespace oslab;

namespace {

Point p1(double x) {
  Point v(1);
  v << x;
  return v;
}

Freq xi2(double a, double b) {
  Freq v(2);
  v << a, b;
  return v;
}

const Schedule inv_n = Schedule::power(1.0, -1.0);
const Complex kMatched(0.0, 0.5 / M_PI);

std::vector<GridFunction> terms_of(const SequenceFamily& f, const std::vector<long long>& ns, const Grid& g) {
  std::vector<GridFunction> out;
  for (long long n : ns) out.push_back(term(f, n, g));
  return out;
}

PdeSystem identity_system(int d, int size) {
  PdeSystem s;
  s.d = d;
  s.m = 1;
  s.q = s.r = size;
  SystemTerm t;
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      if (i == j) t.entries.emplace_back([](const Point&) { return Complex(1.0); });
      else t.entries.emplace_back();
    }
  s.terms.push_back(t);
  return s;
}

}  // namespace

TEST_CASE("eps-compactness of concentrating right-hand sides") {
  const Grid g(1, 16.0, 16384);
  const SequenceFamily f = SequenceFamily::concentration(Profile::gaussian_derivative(), p1(0.0), inv_n, 2.0);
  const auto ns = dyadic_schedule(7);
  const auto terms = terms_of(f, ns, g);

  const CompactnessProfile separated = eps_compactness_norms(terms, ns, Schedule::constant(1.0), 2, 2.0);
  CHECK(separated.compact);
  CHECK(separated.ratio() < 1e-2);

  // sqrt(int xi^2 e^{-2 pi xi^2} / (1 + xi^2)^2 d xi), by adaptive quadrature.
  const double plateau = 0.19729065692785194;
  const CompactnessProfile same = eps_compactness_norms(terms, ns, inv_n, 2, 2.0);
  CHECK_FALSE(same.compact);
  for (double v : same.norms) CHECK(std::abs(v - plateau) < 0.05 * plateau);
}

TEST_CASE("eps-compactness of modulated profiles") {
  const Grid g(1, 1.0, 1024);
  const SequenceFamily f = SequenceFamily::oscillation(Profile::gaussian(0.2), p1(1.0), inv_n, 2.0);
  const auto ns = dyadic_schedule(6);
  const CompactnessProfile p = eps_compactness_norms(terms_of(f, ns, g), ns, Schedule::constant(1.0), 2, 2.0);
  CHECK(p.compact);
  const double unorm = lp_norm(term(f, 1, g), 2.0);
  // The 1/(1+n^2) rate sets in once n exceeds the envelope's spectral width.
  for (std::size_t i = 4; i < ns.size(); ++i) {
    const double n = double(ns[i]);
    CHECK(p.norms[i] * (1.0 + n * n) / unorm == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("rescaled sequences") {
  const Grid g(1, 4.0, 2048);
  const auto ns = dyadic_schedule(8);
  const SequenceFamily small = SequenceFamily::scaled(Profile::bump(0.5), p1(0.0), inv_n, 2.0);
  const auto f = terms_of(small, ns, g);

  CHECK(rescale_check(f, ns, inv_n, 0, 1, 2.0).primary.compact);

  std::vector<GridFunction> deriv;
  for (const auto& t : f) deriv.push_back(spectral_derivative(t, MultiIndex{1, 0, 0}));
  const RescaleReport r = rescale_check(deriv, ns, inv_n, 1, 1, 2.0, Schedule::power(2.0, -1.0));
  CHECK(r.primary.compact);
  REQUIRE(r.second);
  CHECK(r.agree());
}

TEST_CASE("localisation symbols") {
  const PdeSystem sys = PdeSystem::first_order_scalar(2, 0, Complex(0.3, -0.2), inv_n, 2.0);
  const Point x = Point::Zero(2);
  const Freq xi = xi2(0.7, -1.3);
  const double r = xi.norm();

  const LocSymbol pc1 = build_pc(sys, RatioClass::finite(1.0));
  const Complex want = 1.0 / (1.0 + r) + 2.0 * M_PI * Complex(0, 1) * Complex(0.3, -0.2) * xi(0) / (1.0 + r);
  CHECK(std::abs(pc1(x, xi)(0, 0) - want) < 1e-14);

  const LocSymbol pinf = build_pc(sys, RatioClass::infinity());
  CHECK(std::abs(pinf(x, xi)(0, 0) - 1.0 / (1.0 + r)) < 1e-15);

  const PdeSystem id = identity_system(2, 2);
  for (double c : {0.5, 1.0, 3.0}) {
    const Eigen::MatrixXcd m = build_pc(id, RatioClass::finite(c))(x, xi);
    CHECK((m - Eigen::MatrixXcd::Identity(2, 2) / (1.0 + r)).norm() < 1e-15);
  }

  // With no lower-order terms the c = 1 and c = 0 symbols coincide.
  PdeSystem top = sys;
  top.terms.erase(std::remove_if(top.terms.begin(), top.terms.end(),
                                 [&](const SystemTerm& t) { return order(t.alpha, 2) < top.m; }),
                  top.terms.end());
  CHECK((build_pc(top, RatioClass::finite(1.0))(x, xi) - build_pc(top, RatioClass::zero())(x, xi)).norm() < 1e-14);

  CHECK_THROWS_AS(build_pc(sys, RatioClass::finite(0.0)), DomainError);
  RatioClass np;
  np.kind = RatioKind::non_pure;
  CHECK_THROWS(build_pc(sys, np));
}

TEST_CASE("right-hand sides of the model equation") {
  const Grid g(1, 1.0, 1024);
  const SequenceFamily f = SequenceFamily::oscillation(Profile::gaussian(0.2), p1(1.0), inv_n, 2.0);
  const PdeSystem matched = PdeSystem::first_order_scalar(1, 0, kMatched, inv_n, 2.0);
  const GridFunction u = term(f, 64, g);
  const GridFunction rhs = compute_rhs(matched, {u}, 64)[0];
  CHECK(lp_norm(rhs, 2.0) < 0.05 * lp_norm(u, 2.0));
}

TEST_CASE("localisation residuals") {
  const Grid g(1, 1.0, 1024);
  const auto ns = dyadic_schedule(7);
  const TestBank bank = default_localisation_bank(g);
  const SequenceFamily wave = SequenceFamily::oscillation(Profile::gaussian(0.2), p1(1.0), inv_n, 2.0);

  SUBCASE("matched coefficient") {
    const auto sys = PdeSystem::first_order_scalar(1, 0, kMatched, inv_n, 2.0);
    const ResidualTable t = localisation_residual({wave}, {wave}, sys, inv_n, bank, ns, g);
    CHECK(t.applicable);
    CHECK(t.ratio.kind == RatioKind::finite);
    CHECK(t.ratio.c == doctest::Approx(1.0));
    CHECK(t.max_relative() < 1e-2);
  }
  SUBCASE("wrong sign") {
    const auto sys = PdeSystem::first_order_scalar(1, 0, std::conj(kMatched), inv_n, 2.0);
    const ResidualTable t = localisation_residual({wave}, {wave}, sys, inv_n, bank, ns, g);
    CHECK(t.max_relative() > 0.1);
  }
  SUBCASE("identity system with a strongly null sequence") {
    const SequenceFamily null = SequenceFamily::scaled(Profile::bump(0.3), p1(0.0), Schedule::power(1.0, -3.0), 2.0);
    PdeSystem id = identity_system(1, 1);
    const ResidualTable t = localisation_residual({null}, {null}, id, inv_n, bank, ns, g);
    CHECK(t.applicable);
    // The pairings decay like n^-6; the four-point extrapolation leaves
    // about 5% of the oldest point it uses.
    CHECK(t.max_relative() < 1e-8);
  }
}

TEST_CASE("common zeros of the worked-example symbols") {
  const Grid g(2, 1.0, 64);
  const PdeSystem a = PdeSystem::first_order_scalar(2, 0, kMatched, inv_n, 2.0);
  const PdeSystem b = PdeSystem::first_order_scalar(2, 1, kMatched, inv_n, 2.0);
  const CommonZero z = common_zero_search(build_pc(a, RatioClass::finite(1.0)), build_pc(b, RatioClass::finite(1.0)), g);
  CHECK(z.margin < 1e-8);
  CHECK((z.xi - xi2(1.0, 1.0)).norm() < 1e-6);
}

TEST_CASE("worked example diagnostics") {
  const Grid g(2, 1.0, 128);
  const TestBank bank = default_localisation_bank(g);
  const Profile gp = Profile::gaussian(0.25), zero = Profile::constant(0.0);

  const WorkedExampleVerdict single = worked_example_53(2.0, gp, gp, gp, gp, {1}, g, bank);
  CHECK(single.status == "inconclusive");

  const WorkedExampleVerdict pure = worked_example_53(2.0, gp, zero, zero, gp, {1, 2, 4, 8, 16}, g, bank);
  CHECK(pure.products_vanish);
  CHECK(pure.product_pairings.back() < 0.05 * pure.product_pairings.front());

  CHECK_THROWS_AS(worked_example_53(2.0, gp, gp, gp, gp, {1, 2, 4, 8}, g, bank), UnderResolved);
}

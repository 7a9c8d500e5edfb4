#include "oslab/fourmult.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace oslab;

namespace {

GridFunction mode(const Grid& g, int k) {
  return GridFunction::sample(g, [&](const Point& x) { return std::polar(1.0, 2.0 * M_PI * k * x(0)); });
}

GridFunction bump(const Grid& g, double radius, double center = 0.0) {
  return GridFunction::sample(g, [&](const Point& x) {
    const double r = wrap(x(0) - center, g.L) / radius;
    return Complex(std::abs(r) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0);
  });
}

GridFunction random_function(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  GridFunction u(g);
  for (std::int64_t i = 0; i < g.size(); ++i) u[i] = Complex(nd(rng), nd(rng));
  return u;
}

Symbol sign_symbol() {
  SpherePolynomial poly;
  poly.a = Eigen::VectorXcd::Ones(1);
  return Symbol::homogeneous(1, poly);
}

}  // namespace

TEST_CASE("Fourier modes are eigenvectors") {
  const Grid g(1, 1.0, 64);
  const GridFunction u = mode(g, 3);
  const GridFunction out = apply_multiplier(Symbol::rational(1, MultiIndex{0, 0, 0}, 0, 1), 1.0, u);
  CHECK(sup_norm(out - 0.25 * u) < 1e-14);
}

TEST_CASE("the identity multiplier leaves data unchanged") {
  std::mt19937_64 rng(3);
  const Grid g(2, 1.0, 32);
  const GridFunction u = random_function(g, rng);
  CHECK(sup_norm(apply_multiplier(Symbol::constant(2, 1.0), 0.7, u) - u) < 1e-13 * sup_norm(u));
}

TEST_CASE("sign multiplier equals the half-spectrum projection difference") {
  const Grid g(1, 2.0, 256);
  const GridFunction u = bump(g, 0.4, 0.1);
  Eigen::VectorXcd spec = fft_forward(u);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const int k = g.wavenumber(i)[0];
    spec(i) *= k > 0 ? 1.0 : (k < 0 ? -1.0 : 0.0);
  }
  const GridFunction oracle = fft_inverse(g, spec);
  CHECK(sup_norm(apply_multiplier(sign_symbol(), 1.0, u) - oracle) < 1e-12);
}

TEST_CASE("discrete adjointness") {
  std::mt19937_64 rng(5);
  const Grid g(1, 1.0, 128);
  const GridFunction phi = bump(g, 0.3);
  const std::vector<Symbol> suite{Symbol::gaussian(1), Symbol::rational(1, MultiIndex{0, 0, 0}, 0, 2),
                                  sign_symbol().scaled(Complex(0.3, 0.8)), Symbol::sobolev_weight(1, 1.0)};
  for (const Symbol& s : suite) {
    const GridFunction u = random_function(g, rng), v = random_function(g, rng);
    const GridFunction pu = multiply_pointwise(phi, u), pv = multiply_pointwise(phi, v);
    const double norms = std::sqrt(std::abs(integral_product(pu, pu)) * std::abs(integral_product(pv, pv)));
    CHECK(adjoint_pairing_gap(s, 0.25, pu, pv) < 1e-10 * norms);
  }
  SUBCASE("real symbol and u = v give a real pairing") {
    const GridFunction u = random_function(g, rng);
    const Complex ip = integral_product(apply_multiplier(Symbol::gaussian(1), 0.5, u), u);
    CHECK(std::abs(ip.imag()) < 1e-12 * std::abs(ip));
  }
  SUBCASE("random complex symbol samples") {
    Eigen::VectorXcd samples(g.size());
    std::normal_distribution<double> nd;
    for (auto& s : samples) s = Complex(nd(rng), nd(rng));
    const GridFunction u = random_function(g, rng), v = random_function(g, rng);
    const Complex lhs = integral_product(apply_samples(samples, u), v);
    const Complex rhs = integral_product(u, apply_samples(samples.conjugate(), v));
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));
  }
}

TEST_CASE("pointwise multiplication") {
  std::mt19937_64 rng(9);
  const Grid g(1, 1.0, 64);
  const GridFunction u = random_function(g, rng);
  CHECK(sup_norm(multiply_pointwise(GridFunction::constant(g, 1.0), u) - u) == 0.0);
  CHECK(sup_norm(multiply_pointwise(bump(g, 0.1, -0.3), bump(g, 0.1, 0.3))) == 0.0);
  const GridFunction phi = random_function(g, rng);
  CHECK(sup_norm(multiply_pointwise(phi, u)) <= sup_norm(phi) * sup_norm(u));
  CHECK_THROWS_AS(multiply_pointwise(u, GridFunction(Grid(1, 1.0, 32))), GridMismatch);
}

TEST_CASE("commutator decay") {
  const Grid g(1, 1.0, 1024);
  const GridFunction phi = bump(g, 0.3);
  std::vector<double> omegas;
  for (int j = 0; j <= 8; ++j) omegas.push_back(std::ldexp(1.0, -j));

  SUBCASE("homogeneous symbols leave nothing after the split") {
    const CommutatorProfile p = commutator_decay(sign_symbol(), phi, omegas, 2.0, 4, 1);
    CHECK(p.split_applied);
    for (double n : p.norms) CHECK(n < 1e-12);
  }
  SUBCASE("the Gaussian commutator vanishes as omega shrinks") {
    // The norm is first order in omega, so over omega = 2^-8 .. 1 the ratio
    // cannot drop below about 2^-8; the test checks that rate.
    const CommutatorProfile p = commutator_decay(Symbol::gaussian(1), phi, omegas, 2.0, 8, 1);
    for (std::size_t i = 1; i < p.norms.size(); ++i) CHECK(p.norms[i] <= p.norms[i - 1] * (1 + 1e-9));
    CHECK(p.norms.back() < 0.02 * p.norms.front());
    const double tail_slope = std::log2(p.norms[p.norms.size() - 2] / p.norms.back());
    CHECK(tail_slope == doctest::Approx(1.0).epsilon(0.1));
  }
  SUBCASE("a constant cutoff commutes with everything") {
    const CommutatorProfile p =
        commutator_decay(Symbol::rational(1, MultiIndex{0, 0, 0}, 0, 1), GridFunction::constant(g, 1.0), omegas, 2.0, 4, 1);
    for (double n : p.norms) CHECK(n == 0.0);
  }
}

TEST_CASE("Lp norms") {
  const Grid g1(1, 1.0, 64);
  for (double p : {1.5, 2.0, 3.0, 7.0}) CHECK(lp_norm(GridFunction::constant(g1, 1.0), p) == doctest::Approx(1.0).epsilon(1e-14));
  const GridFunction half = GridFunction::sample(g1, [](const Point& x) { return Complex(x(0) < 0.0 ? 1.0 : 0.0); });
  CHECK(lp_norm(half, 2.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));

  const Grid g(1, 16.0, 4096);
  const GridFunction gauss = GridFunction::sample(g, [](const Point& x) { return Complex(std::exp(-M_PI * x(0) * x(0))); });
  for (double p : {1.5, 2.0, 4.0}) CHECK(std::abs(lp_norm(gauss, p) - std::pow(p, -1.0 / (2.0 * p))) < 1e-6);
  CHECK_THROWS_AS(lp_norm(gauss, 1.0), UsageError);
  CHECK_THROWS_AS(lp_norm(gauss, INFINITY), UsageError);
}

TEST_CASE("multiplier laws over a seeded suite") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_real_distribution<double> om(0.05, 2.0);
  const Grid g(1, 1.0, 64);
  auto symbol = [&](int i) {
    switch (i) {
      case 0: return Symbol::gaussian(1, 0.5 + om(rng));
      case 1: return Symbol::rational(1, MultiIndex{0, 0, 0}, 0, 2);
      case 2: return sign_symbol();
      default: return Symbol::sobolev_weight(1, 1.0 + om(rng));
    }
  };
  double worst = 0.0;
  for (int c = 0; c < 200; ++c) {
    const Symbol a = symbol(pick(rng)), b = symbol(pick(rng));
    const double w = om(rng);
    const GridFunction u = random_function(g, rng);
    const GridFunction lhs = apply_multiplier(a, w, apply_multiplier(b, w, u));
    const Eigen::VectorXcd sa = multiplier_samples(a, w, g), sb = multiplier_samples(b, w, g);
    const GridFunction rhs = apply_samples(sa.cwiseProduct(sb), u);
    // Relative to the operator bound: products such as sign times a narrow
    // Gaussian can leave an output far smaller than its input.
    const double bound = sa.cwiseAbs().maxCoeff() * sb.cwiseAbs().maxCoeff() * sup_norm(u);
    worst = std::max(worst, sup_norm(lhs - rhs) / bound);
  }
  CHECK(worst < 1e-10);
}

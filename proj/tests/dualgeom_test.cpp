#include "oslab/dualgeom.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace oslab;
using Vec = Eigen::VectorXd;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

CompactPoint random_point(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> kind(0, 5);
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = nd(rng);
  const int k = kind(rng);
  if (k == 0) return CompactPoint::sigma_zero(v / v.norm());
  if (k == 1) return CompactPoint::sigma_infinity(v / v.norm());
  return CompactPoint::interior(v * std::exp(3.0 * nd(rng)));
}

}  // namespace

TEST_CASE("compactify maps the boundary spheres to the shell faces") {
  const CompactParams prm(2, 1.0);
  const SpherePoint s0 = compactify(CompactPoint::sigma_zero(vec({1, 0})), prm);
  CHECK(s0.zeta0 == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(s0.zeta(0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::abs(s0.zeta(1)) < 1e-15);

  const SpherePoint si = compactify(CompactPoint::sigma_infinity(vec({0, 1})), prm);
  CHECK(si.zeta0 == 0.0);
  CHECK(std::abs(si.zeta(0)) < 1e-15);
  CHECK(si.zeta(1) == doctest::Approx(1.0));
}

TEST_CASE("compactify of an interior point follows the closed form") {
  const CompactParams prm(2, 1.0);
  const SpherePoint s = compactify(CompactPoint::interior(vec({3, 4})), prm);
  CHECK(s.zeta0 == doctest::Approx(0.164399).epsilon(1e-6));
  CHECK(s.zeta(0) == doctest::Approx(0.591836).epsilon(1e-6));
  CHECK(s.zeta(1) == doctest::Approx(0.789115).epsilon(1e-6));
  CHECK(std::abs(s.embedded().squaredNorm() - 1.0) < 1e-12);
}

TEST_CASE("decompactify inverts compactify") {
  const CompactParams prm(2, 1.0);
  SpherePoint s;
  s.zeta0 = 1 / std::sqrt(2.0);
  s.zeta = vec({1 / std::sqrt(2.0), 0});
  const CompactPoint b = decompactify(s, prm);
  CHECK(b.kind() == PointKind::sigma_zero);
  CHECK((b.vector() - vec({1, 0})).norm() < 1e-12);

  // The six-digit values sit about 1e-6 off the sphere; project them back.
  const double nrm = std::sqrt(0.164399 * 0.164399 + 0.591836 * 0.591836 + 0.789115 * 0.789115);
  s.zeta0 = 0.164399 / nrm;
  s.zeta = vec({0.591836, 0.789115}) / nrm;
  const CompactPoint p = decompactify(s, prm);
  REQUIRE(p.is_interior());
  CHECK((p.vector() - vec({3, 4})).norm() < 1e-4);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  // Radii far below rho0 are only stored to absolute precision eps * rho0
  // on the sphere, so the relative test uses |xi| in [1e-3, 1e3].
  std::uniform_real_distribution<double> logr(-3.0, 3.0);
  for (int d = 1; d <= 3; ++d) {
    const CompactParams pd(d, 0.5 + d);
    for (int i = 0; i < 1000; ++i) {
      Vec v(d);
      for (int k = 0; k < d; ++k) v(k) = nd(rng);
      v *= std::pow(10.0, logr(rng)) / v.norm();
      const CompactPoint back = decompactify(compactify(CompactPoint::interior(v), pd), pd);
      REQUIRE(back.is_interior());
      CHECK((back.vector() - v).norm() / v.norm() < 1e-10);
    }
  }
}

TEST_CASE("zero interior vectors and malformed parameters are rejected") {
  CHECK_THROWS_AS(CompactPoint::interior(vec({0, 0})), DomainError);
  CHECK_THROWS_AS(CompactParams(0, 1.0), DomainError);
  CHECK_THROWS_AS(CompactParams(2, -1.0), DomainError);
  CHECK_THROWS_AS(CompactPoint::sigma_zero(vec({2, 0})), DomainError);
}

TEST_CASE("metric values and axioms") {
  const CompactParams p1(1, 1.0);
  CHECK(metric(CompactPoint::interior(vec({1})), CompactPoint::sigma_infinity(vec({1})), p1) ==
        doctest::Approx(0.459506).epsilon(1e-6));

  std::mt19937_64 rng(11);
  for (int d = 1; d <= 3; ++d) {
    const CompactParams prm(d, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const CompactPoint a = random_point(rng, d), b = random_point(rng, d), c = random_point(rng, d);
      CHECK(metric(a, a, prm) == 0.0);
      CHECK(metric(a, b, prm) == metric(b, a, prm));
      CHECK(metric(a, c, prm) <= metric(a, b, prm) + metric(b, c, prm) + 1e-14);
    }
  }
}

TEST_CASE("classify_limit recognises both boundary spheres and divergence") {
  const CompactParams prm(2, 1.0);
  std::vector<Vec> to_zero, to_inf, alternating;
  for (int n = 1; n <= 4096; ++n) {
    to_zero.push_back(vec({1.0 / n, 0}));
    to_inf.push_back(vec({double(n), double(n)}));
  }
  for (int n = 1; n <= 64; ++n) alternating.push_back(n % 2 ? vec({double(n), 0}) : vec({1.0 / n, 0}));

  const auto z = classify_limit(to_zero, prm);
  REQUIRE(z);
  CHECK(z->kind() == PointKind::sigma_zero);
  CHECK((z->vector() - vec({1, 0})).norm() < 1e-8);

  const auto inf = classify_limit(to_inf, prm);
  REQUIRE(inf);
  CHECK(inf->kind() == PointKind::sigma_infinity);
  CHECK((inf->vector() - vec({1, 1}) / std::sqrt(2.0)).norm() < 1e-8);

  CHECK_FALSE(classify_limit(alternating, prm));
  CHECK_THROWS_AS(classify_limit(std::vector<Vec>{}, prm), UsageError);
}

TEST_CASE("classify_limit finds interior limits") {
  const CompactParams prm(1, 1.0);
  std::vector<Vec> xs;
  for (int n = 1; n <= 64; ++n) xs.push_back(vec({2.0 + std::ldexp(1.0, -n)}));
  const auto p = classify_limit(xs, prm);
  REQUIRE(p);
  REQUIRE(p->is_interior());
  CHECK(p->vector()(0) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("geometry works in long double") {
  using P = BasicCompactPoint<long double>;
  const BasicCompactParams<long double> prm(1, 1.0L);
  Eigen::Matrix<long double, Eigen::Dynamic, 1> v(1);
  v << 3.0L;
  const auto back = decompactify(compactify(P::interior(v), prm), prm);
  CHECK(std::abs(static_cast<double>(back.vector()(0) - 3.0L)) < 1e-15);
}

#include "oslab/seqgen.hpp"

#include "doctest.h"

#include <cmath>

using namespace oslab;

namespace {

Point p1(double x) {
  Point v(1);
  v << x;
  return v;
}

GridFunction gaussian(const Grid& g, double width, double center = 0.0) {
  return GridFunction::sample(g, [&](const Point& x) {
    const double r = wrap(x(0) - center, g.L) / width;
    return Complex(std::exp(-M_PI * r * r));
  });
}

}  // namespace

TEST_CASE("schedules") {
  CHECK(Schedule::power(2.0, -1.0)(4) == 0.5);
  CHECK(Schedule::constant(3.0)(17) == 3.0);
  CHECK(Schedule::log()(1) == doctest::Approx(1.0 / std::log(2.0)));
  const Schedule alt = Schedule::alternating(Schedule::power(1.0, -1.0), Schedule::power(1.0, -2.0));
  CHECK(alt(3) == doctest::Approx(1.0 / 3));
  CHECK(alt(4) == doctest::Approx(1.0 / 16));
  CHECK(dyadic_schedule(3) == std::vector<long long>{1, 2, 4, 8});
}

TEST_CASE("concentration is an isometry in L^2") {
  const Grid g(1, 16.0, 4096);
  const SequenceFamily f = SequenceFamily::concentration(Profile::gaussian(), p1(0.0), Schedule::power(1.0, -1.0), 2.0);
  const double ref = lp_norm(term(f, 1, g), 2.0);
  CHECK(ref == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-10));
  for (long long n : dyadic_schedule(5)) CHECK(std::abs(lp_norm(term(f, n, g), 2.0) - ref) < 1e-6);
}

TEST_CASE("oscillation with a constant profile is a pure mode") {
  const Grid g(1, 1.0, 256);
  const SequenceFamily f = SequenceFamily::oscillation(Profile::constant(), p1(1.0), Schedule::power(1.0, -1.0), 2.0);
  for (long long n : {1LL, 5LL, 32LL}) {
    const GridFunction u = term(f, n, g);
    const GridFunction ref =
        GridFunction::sample(g, [&](const Point& x) { return std::polar(1.0, 2.0 * M_PI * double(n) * x(0)); });
    CHECK(sup_norm(u - ref) < 1e-12);
    CHECK(std::abs(integral(u)) < 1e-12);
  }
}

TEST_CASE("composite terms match direct assembly") {
  const Grid g(2, 2.0, 256);
  const Profile u1 = Profile::bump(0.8), u2 = Profile::gaussian();
  const SequenceFamily f = SequenceFamily::composite53(u1, u2, 2.0, Role::primal);
  const long long n = 4;
  const GridFunction t = term(f, n, g);
  const GridFunction ref = GridFunction::sample(g, [&](const Point& x) {
    const double x1 = wrap(x(0), g.L), x2 = wrap(x(1), g.L);
    return u1(p1(x1)) * std::polar(1.0, 2.0 * M_PI * double(n) * x(0)) + double(n) * u2(p1(double(n * n) * x2));
  });
  CHECK(sup_norm(t - ref) < 1e-12);
}

TEST_CASE("canonical duals") {
  const Grid g(1, 8.0, 1024);
  const SequenceFamily f2 = SequenceFamily::concentration(Profile::gaussian(), p1(0.0), Schedule::power(1.0, -1.0), 2.0);
  CHECK(sup_norm(dual_term(f2, 4, g) - term(f2, 4, g)) == 0.0);

  const SequenceFamily f4 = SequenceFamily::concentration(Profile::gaussian(), p1(0.0), Schedule::power(1.0, -1.0), 4.0);
  const GridFunction w = term(f4, 2, g), d = dual_term(f4, 2, g);
  const GridFunction cube(g, w.values().array().cube().matrix());
  CHECK(sup_norm(d - cube) < 1e-12 * sup_norm(cube));
  const double pp = 4.0 / 3.0;
  CHECK(std::pow(lp_norm(d, pp), pp) == doctest::Approx(std::pow(lp_norm(w, 4.0), 4.0)).epsilon(1e-10));
  CHECK(duality_map(GridFunction(g), 3.0).values().isZero(0.0));
}

TEST_CASE("weak-null profiles") {
  const Grid g(1, 4.0, 4096);
  const std::vector<GridFunction> tests{gaussian(g, 0.5), gaussian(g, 0.3, 0.4)};
  const auto ns = dyadic_schedule(5);

  SUBCASE("oscillation decays fast") {
    const SequenceFamily f = SequenceFamily::oscillation(Profile::constant(), p1(1.0), Schedule::power(1.0, -1.0), 2.0);
    const auto prof = weak_null_check(f, g, tests, ns);
    CHECK(prof.back() < 1e-12);
  }
  SUBCASE("concentration decays like eps^{1/2}") {
    const SequenceFamily f = SequenceFamily::concentration(Profile::gaussian(0.25), p1(0.0), Schedule::power(1.0, -1.0), 2.0);
    const auto prof = weak_null_check(f, g, {GridFunction::constant(g, 1.0)}, ns);
    for (std::size_t i = 0; i < ns.size(); ++i)
      CHECK(prof[i] == doctest::Approx(0.25 * std::sqrt(1.0 / double(ns[i]))).epsilon(1e-6));
  }
  SUBCASE("a constant sequence does not decay") {
    const SequenceFamily f = SequenceFamily::scaled(Profile::gaussian(0.5), p1(0.0), Schedule::constant(1.0), 2.0);
    const auto prof = weak_null_check(f, g, tests, ns);
    CHECK(prof.back() == doctest::Approx(prof.front()));
    CHECK(prof.front() > 0.1);
  }
}

TEST_CASE("under-resolved terms name the limiting n") {
  const Grid g(1, 1.0, 256);
  const SequenceFamily f = SequenceFamily::concentration(Profile::gaussian(), p1(0.0), Schedule::power(1.0, -1.0), 2.0);
  CHECK_NOTHROW(check_resolved(f, 32, g));
  try {
    term(f, 64, g);
    FAIL("expected UnderResolved");
  } catch (const UnderResolved& e) {
    CHECK(e.offending_n() == 64);
    CHECK(e.limiting_n() == 32);
  }
}

#pragma once

// Canonical weakly-null sequences on the torus and their dual partners:
// concentration eps^{-d/p} u((x - z)/eps), oscillation u(x) e^{2 pi i x.k/eps},
// the two-dimensional mixed family
//   u_n = u1(x1) e^{2 pi i n x1} + n^{2/p} u2(n^2 x2),
//   v_n = n^{2/p'} v1(n^2 x1) + v2(x2) e^{2 pi i n x2},
// and amplitude-scaled profiles a_n u (strongly null or constant controls).

#include "oslab/grid.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace oslab {

// Scale or amplitude schedule n -> value.
class Schedule {
 public:
  enum class Kind { power, log, constant, alternating, table };

  // scale * n^exponent
  static Schedule power(double scale, double exponent);
  // scale / log(n + 1)
  static Schedule log(double scale = 1.0);
  static Schedule constant(double value);
  // odd n -> odd_terms(n), even n -> even_terms(n)
  static Schedule alternating(const Schedule& odd_terms, const Schedule& even_terms);
  static Schedule table(std::vector<long long> ns, std::vector<double> values);

  double operator()(long long n) const;
  // Limit as n -> infinity when it exists in closed form.
  std::optional<double> limit() const;
  Kind kind() const { return kind_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::constant;
  double a_ = 1.0;
  double b_ = 0.0;
  std::shared_ptr<const Schedule> odd_;
  std::shared_ptr<const Schedule> even_;
  std::vector<long long> ns_;
  std::vector<double> values_;
};

// n_j = 2^j, j = 0..max_exponent.
std::vector<long long> dyadic_schedule(int max_exponent = 6);

class Profile {
 public:
  enum class Kind { gaussian, bump, constant, gaussian_derivative, sampled };

  // e^{-pi |x/w|^2}
  static Profile gaussian(double width = 1.0);
  // exp(1 - 1/(1 - |x/R|^2)) inside the ball of radius R, 0 outside.
  static Profile bump(double radius = 1.0);
  static Profile constant(Complex value = 1.0);
  // (x_axis / w) e^{-pi |x/w|^2}: zero mean, decays like the Gaussian.
  static Profile gaussian_derivative(double width = 1.0, int axis = 0);
  // Trigonometric interpolant of samples, evaluated periodically.
  static Profile sampled(const GridFunction& samples);

  Complex operator()(const Point& x) const;
  Profile scaled(Complex amplitude) const;

  Kind kind() const { return kind_; }
  double width() const { return width_; }
  // Length scale used by the resolution guard (the profile's feature size).
  double feature_size() const;
  // Radius outside which the profile is negligible (< 1e-8 relative), used
  // for the torus wrap diagnostic; infinite for constants.
  double support_radius() const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::constant;
  double width_ = 1.0;
  int axis_ = 0;
  Complex amplitude_ = 1.0;
  std::shared_ptr<const TrigInterpolant> table_;
  double table_feature_ = 1.0;
};

enum class FamilyKind { concentration, oscillation, composite53, scaled };
enum class Role { primal, dual };

struct SequenceFamily {
  FamilyKind kind = FamilyKind::oscillation;
  double p = 2.0;
  Profile u = Profile::constant();
  Point center;      // concentration point z (oscillation/scaled: profile centre)
  Point wavevector;  // oscillation k
  Schedule scale = Schedule::power(1.0, -1.0);  // eps_n, or the amplitude a_n for scaled
  Profile first = Profile::gaussian();   // composite: u1 or v1
  Profile second = Profile::gaussian();  // composite: u2 or v2
  Role role = Role::primal;
  bool canonical_dual = false;  // terms are |w|^{p-2} w of the underlying terms
  double resolution_cells = 8.0;

  static SequenceFamily concentration(Profile u, Point z, Schedule eps, double p);
  static SequenceFamily oscillation(Profile u, Point k, Schedule eps, double p);
  static SequenceFamily composite53(Profile first, Profile second, double p, Role role);
  static SequenceFamily scaled(Profile u, Point center, Schedule amplitude, double p);

  int dim() const;
  // eps_n of the family (composite: 1/n; scaled: constant 1).
  Schedule characteristic_length() const;
  std::string describe() const;
};

// The family whose n-th term is the canonical L^{p'} partner |w|^{p-2} w of
// the n-th term w of f.
SequenceFamily dual_family(const SequenceFamily& f);

struct TermInfo {
  double snap_error = 0.0;    // |k/eps - snapped grid frequency|
  // L / (2 * scaled support radius): at least 1 when the profile (down to
  // 1e-8 of its peak) fits in the fundamental domain around its centre.
  double wrap_margin = 0.0;
  bool wrap_ok = true;
};

GridFunction term(const SequenceFamily& f, long long n, const Grid& g);
GridFunction dual_term(const SequenceFamily& f, long long n, const Grid& g);
TermInfo term_info(const SequenceFamily& f, long long n, const Grid& g);
// Throws UnderResolved (with the largest admissible n) if term(f, n) cannot
// be represented on g.
void check_resolved(const SequenceFamily& f, long long n, const Grid& g);

// Weak limit of the family on the grid (zero for the canonical families).
GridFunction weak_limit(const SequenceFamily& f, const Grid& g);

// |w|^{p-2} w pointwise, 0 at w = 0.
GridFunction duality_map(const GridFunction& w, double p);

// max over tests phi of |<term(n), phi>| for every n of the schedule.
std::vector<double> weak_null_check(const SequenceFamily& f, const Grid& g,
                                    const std::vector<GridFunction>& tests,
                                    const std::vector<long long>& n_schedule);

}  // namespace oslab

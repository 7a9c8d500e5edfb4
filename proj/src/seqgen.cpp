#include "oslab/seqgen.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace oslab {

// ---------------------------------------------------------------- Schedule

Schedule Schedule::power(double scale, double exponent) {
  if (!(scale > 0.0)) throw DomainError("schedule: scale must be positive");
  Schedule s;
  s.kind_ = Kind::power;
  s.a_ = scale;
  s.b_ = exponent;
  return s;
}

Schedule Schedule::log(double scale) {
  if (!(scale > 0.0)) throw DomainError("schedule: scale must be positive");
  Schedule s;
  s.kind_ = Kind::log;
  s.a_ = scale;
  return s;
}

Schedule Schedule::constant(double value) {
  if (!(value > 0.0)) throw DomainError("schedule: constant value must be positive");
  Schedule s;
  s.kind_ = Kind::constant;
  s.a_ = value;
  return s;
}

Schedule Schedule::alternating(const Schedule& odd_terms, const Schedule& even_terms) {
  Schedule s;
  s.kind_ = Kind::alternating;
  s.odd_ = std::make_shared<const Schedule>(odd_terms);
  s.even_ = std::make_shared<const Schedule>(even_terms);
  return s;
}

Schedule Schedule::table(std::vector<long long> ns, std::vector<double> values) {
  if (ns.size() != values.size() || ns.empty()) throw DomainError("schedule table: sizes differ or empty");
  for (double v : values)
    if (!(v > 0.0)) throw DomainError("schedule table: values must be positive");
  Schedule s;
  s.kind_ = Kind::table;
  s.ns_ = std::move(ns);
  s.values_ = std::move(values);
  return s;
}

double Schedule::operator()(long long n) const {
  if (n < 1) throw DomainError("schedule: n must be >= 1");
  switch (kind_) {
    case Kind::power: return a_ * std::pow(static_cast<double>(n), b_);
    case Kind::log: return a_ / std::log(static_cast<double>(n) + 1.0);
    case Kind::constant: return a_;
    case Kind::alternating: return (n % 2 == 1) ? (*odd_)(n) : (*even_)(n);
    case Kind::table:
      for (std::size_t i = 0; i < ns_.size(); ++i)
        if (ns_[i] == n) return values_[i];
      throw DomainError("schedule table has no entry for n = " + std::to_string(n));
  }
  return a_;
}

std::optional<double> Schedule::limit() const {
  switch (kind_) {
    case Kind::power:
      if (b_ < 0.0) return 0.0;
      if (b_ == 0.0) return a_;
      return std::nullopt;
    case Kind::log: return 0.0;
    case Kind::constant: return a_;
    case Kind::alternating: {
      auto lo = odd_->limit();
      auto le = even_->limit();
      if (lo && le && *lo == *le) return lo;
      return std::nullopt;
    }
    case Kind::table: return std::nullopt;
  }
  return std::nullopt;
}

std::string Schedule::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::power: os << a_ << "*n^" << b_; break;
    case Kind::log: os << a_ << "/log(n+1)"; break;
    case Kind::constant: os << a_; break;
    case Kind::alternating: os << "alternating(" << odd_->describe() << ", " << even_->describe() << ")"; break;
    case Kind::table: os << "table[" << ns_.size() << "]"; break;
  }
  return os.str();
}

std::vector<long long> dyadic_schedule(int max_exponent) {
  std::vector<long long> ns;
  for (int j = 0; j <= max_exponent; ++j) ns.push_back(1LL << j);
  return ns;
}

// ---------------------------------------------------------------- Profile

Profile Profile::gaussian(double width) {
  if (!(width > 0.0)) throw DomainError("profile: width must be positive");
  Profile p;
  p.kind_ = Kind::gaussian;
  p.width_ = width;
  return p;
}

Profile Profile::bump(double radius) {
  if (!(radius > 0.0)) throw DomainError("profile: radius must be positive");
  Profile p;
  p.kind_ = Kind::bump;
  p.width_ = radius;
  return p;
}

Profile Profile::constant(Complex value) {
  Profile p;
  p.kind_ = Kind::constant;
  p.amplitude_ = value;
  return p;
}

Profile Profile::gaussian_derivative(double width, int axis) {
  if (!(width > 0.0)) throw DomainError("profile: width must be positive");
  if (axis < 0 || axis >= kMaxDim) throw DomainError("profile: axis out of range");
  Profile p;
  p.kind_ = Kind::gaussian_derivative;
  p.width_ = width;
  p.axis_ = axis;
  return p;
}

Profile Profile::sampled(const GridFunction& samples) {
  Profile p;
  p.kind_ = Kind::sampled;
  p.width_ = samples.grid().L;
  p.table_ = std::make_shared<const TrigInterpolant>(samples);
  p.table_feature_ = 8.0 * samples.grid().spacing();
  return p;
}

Complex Profile::operator()(const Point& x) const {
  switch (kind_) {
    case Kind::gaussian: return amplitude_ * std::exp(-M_PI * x.squaredNorm() / (width_ * width_));
    case Kind::bump: {
      const double r2 = x.squaredNorm() / (width_ * width_);
      if (r2 >= 1.0) return 0.0;
      return amplitude_ * std::exp(1.0 - 1.0 / (1.0 - r2));
    }
    case Kind::constant: return amplitude_;
    case Kind::gaussian_derivative: {
      if (axis_ >= x.size()) throw DomainError("profile: derivative axis exceeds dimension");
      return amplitude_ * (x(axis_) / width_) * std::exp(-M_PI * x.squaredNorm() / (width_ * width_));
    }
    case Kind::sampled: return amplitude_ * (*table_)(x);
  }
  return 0.0;
}

Profile Profile::scaled(Complex amplitude) const {
  Profile p = *this;
  p.amplitude_ *= amplitude;
  return p;
}

double Profile::feature_size() const {
  switch (kind_) {
    case Kind::constant: return std::numeric_limits<double>::infinity();
    case Kind::sampled: return table_feature_;
    default: return width_;
  }
}

double Profile::support_radius() const {
  // e^{-pi r^2} < 1e-8 beyond r = sqrt(8 ln 10 / pi); the derivative
  // profile carries an extra linear factor, absorbed by a slightly larger
  // radius.
  const double gauss = std::sqrt(8.0 * std::log(10.0) / M_PI);
  switch (kind_) {
    case Kind::gaussian: return gauss * width_;
    case Kind::gaussian_derivative: return 1.1 * gauss * width_;
    case Kind::bump: return width_;
    case Kind::sampled: return 0.5 * width_;
    case Kind::constant: return std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::infinity();
}

std::string Profile::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::gaussian: os << "gaussian(w=" << width_ << ")"; break;
    case Kind::bump: os << "bump(R=" << width_ << ")"; break;
    case Kind::constant: os << "constant(" << amplitude_.real() << "," << amplitude_.imag() << ")"; break;
    case Kind::gaussian_derivative: os << "gaussian_derivative(w=" << width_ << ",axis=" << axis_ << ")"; break;
    case Kind::sampled: os << "sampled"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------- families

SequenceFamily SequenceFamily::concentration(Profile u, Point z, Schedule eps, double p) {
  SequenceFamily f;
  f.kind = FamilyKind::concentration;
  f.u = std::move(u);
  f.center = std::move(z);
  f.scale = std::move(eps);
  f.p = p;
  return f;
}

SequenceFamily SequenceFamily::oscillation(Profile u, Point k, Schedule eps, double p) {
  if (k.size() == 0 || k.isZero(0.0)) throw DomainError("oscillation: wavevector must be nonzero");
  SequenceFamily f;
  f.kind = FamilyKind::oscillation;
  f.u = std::move(u);
  f.center = Point::Zero(k.size());
  f.wavevector = std::move(k);
  f.scale = std::move(eps);
  f.p = p;
  return f;
}

SequenceFamily SequenceFamily::composite53(Profile first, Profile second, double p, Role role) {
  SequenceFamily f;
  f.kind = FamilyKind::composite53;
  f.first = std::move(first);
  f.second = std::move(second);
  f.p = p;
  f.role = role;
  f.center = Point::Zero(2);
  return f;
}

SequenceFamily SequenceFamily::scaled(Profile u, Point center, Schedule amplitude, double p) {
  SequenceFamily f;
  f.kind = FamilyKind::scaled;
  f.u = std::move(u);
  f.center = std::move(center);
  f.scale = std::move(amplitude);
  f.p = p;
  return f;
}

int SequenceFamily::dim() const {
  switch (kind) {
    case FamilyKind::composite53: return 2;
    case FamilyKind::oscillation: return static_cast<int>(wavevector.size());
    default: return static_cast<int>(center.size());
  }
}

Schedule SequenceFamily::characteristic_length() const {
  switch (kind) {
    case FamilyKind::concentration:
    case FamilyKind::oscillation: return scale;
    case FamilyKind::composite53: return Schedule::power(1.0, -1.0);
    case FamilyKind::scaled: return Schedule::constant(1.0);
  }
  return Schedule::constant(1.0);
}

std::string SequenceFamily::describe() const {
  std::ostringstream os;
  switch (kind) {
    case FamilyKind::concentration: os << "concentration(" << u.describe() << ", eps=" << scale.describe(); break;
    case FamilyKind::oscillation: os << "oscillation(" << u.describe() << ", eps=" << scale.describe(); break;
    case FamilyKind::composite53:
      os << "composite(" << (role == Role::primal ? "primal" : "dual") << ", " << first.describe() << ", "
         << second.describe();
      break;
    case FamilyKind::scaled: os << "scaled(" << u.describe() << ", a=" << scale.describe(); break;
  }
  os << ", p=" << p << ")";
  if (canonical_dual) return "dual(" + os.str() + ")";
  return os.str();
}

SequenceFamily dual_family(const SequenceFamily& f) {
  SequenceFamily d = f;
  d.canonical_dual = !f.canonical_dual;
  return d;
}

// ---------------------------------------------------------------- terms

namespace {

void require_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("sequence family: p must lie in (1, inf)");
}

Point one(double x) {
  Point p(1);
  p(0) = x;
  return p;
}

double conjugate_exponent(double p) { return p / (p - 1.0); }

// Signed grid wave number nearest to L * freq.
long long snap(double freq, const Grid& g) { return std::llround(freq * g.L); }

bool in_band(long long k, const Grid& g) { return k > -g.N / 2 && k < g.N / 2; }

// Returns an empty string when the n-th term is representable, otherwise a
// diagnostic.
std::string resolution_problem(const SequenceFamily& f, long long n, const Grid& g) {
  const double h = g.spacing();
  std::ostringstream os;
  switch (f.kind) {
    case FamilyKind::concentration: {
      const double eps = f.scale(n);
      if (eps * f.u.feature_size() < f.resolution_cells * h)
        os << "concentration scale " << eps << " resolves the profile with fewer than " << f.resolution_cells
           << " cells";
      break;
    }
    case FamilyKind::oscillation: {
      const double eps = f.scale(n);
      for (Eigen::Index a = 0; a < f.wavevector.size(); ++a)
        if (!in_band(snap(f.wavevector(a) / eps, g), g))
          os << "oscillation frequency " << f.wavevector(a) / eps << " outside the Nyquist band";
      break;
    }
    case FamilyKind::composite53: {
      const Profile& conc = f.role == Role::primal ? f.second : f.first;
      const double nn = static_cast<double>(n);
      if (conc.feature_size() / (nn * nn) < f.resolution_cells * h)
        os << "concentrating piece at scale 1/" << n * n << " resolved with fewer than " << f.resolution_cells
           << " cells";
      if (!in_band(snap(nn, g), g)) os << "oscillation frequency " << n << " outside the Nyquist band";
      break;
    }
    case FamilyKind::scaled: break;
  }
  return os.str();
}

GridFunction underlying_term(const SequenceFamily& f, long long n, const Grid& g) {
  require_p(f.p);
  if (f.dim() != g.d) throw DomainError("sequence family dimension differs from the grid");
  check_resolved(f, n, g);
  const double d = g.d;
  switch (f.kind) {
    case FamilyKind::concentration: {
      const double eps = f.scale(n);
      const double amp = std::pow(eps, -d / f.p);
      return GridFunction::sample(g, [&](const Point& x) {
        return amp * f.u(wrap(x - f.center, g.L) / eps);
      });
    }
    case FamilyKind::oscillation: {
      const double eps = f.scale(n);
      Point kk(g.d);
      for (int a = 0; a < g.d; ++a) kk(a) = static_cast<double>(snap(f.wavevector(a) / eps, g)) / g.L;
      return GridFunction::sample(g, [&](const Point& x) {
        return f.u(wrap(x - f.center, g.L)) * std::polar(1.0, 2.0 * M_PI * x.dot(kk));
      });
    }
    case FamilyKind::composite53: {
      const double nn = static_cast<double>(n);
      const double freq = static_cast<double>(snap(nn, g)) / g.L;
      if (f.role == Role::primal) {
        const double amp = std::pow(nn, 2.0 / f.p);
        return GridFunction::sample(g, [&](const Point& x) {
          return f.first(one(wrap(x(0), g.L))) * std::polar(1.0, 2.0 * M_PI * freq * x(0)) +
                 amp * f.second(one(wrap(x(1), g.L) * nn * nn));
        });
      }
      const double amp = std::pow(nn, 2.0 / conjugate_exponent(f.p));
      return GridFunction::sample(g, [&](const Point& x) {
        return amp * f.first(one(wrap(x(0), g.L) * nn * nn)) +
               f.second(one(wrap(x(1), g.L))) * std::polar(1.0, 2.0 * M_PI * freq * x(1));
      });
    }
    case FamilyKind::scaled: {
      const double a = f.scale(n);
      return GridFunction::sample(g, [&](const Point& x) { return a * f.u(wrap(x - f.center, g.L)); });
    }
  }
  return GridFunction(g);
}

}  // namespace

void check_resolved(const SequenceFamily& f, long long n, const Grid& g) {
  const std::string problem = resolution_problem(f, n, g);
  if (problem.empty()) return;
  long long limiting = 0;
  for (long long m = 1; m < (1LL << 20); ++m) {
    if (!resolution_problem(f, m, g).empty()) break;
    limiting = m;
  }
  throw UnderResolved("under-resolved at n = " + std::to_string(n) + ": " + problem +
                          " (largest resolved n = " + std::to_string(limiting) + ")",
                      n, limiting);
}

GridFunction duality_map(const GridFunction& w, double p) {
  require_p(p);
  GridFunction out(w.grid());
  for (std::int64_t i = 0; i < w.grid().size(); ++i) {
    const double a = std::abs(w[i]);
    out[i] = a == 0.0 ? Complex(0.0) : (p == 2.0 ? w[i] : std::pow(a, p - 2.0) * w[i]);
  }
  return out;
}

GridFunction term(const SequenceFamily& f, long long n, const Grid& g) {
  GridFunction w = underlying_term(f, n, g);
  return f.canonical_dual ? duality_map(w, f.p) : w;
}

GridFunction dual_term(const SequenceFamily& f, long long n, const Grid& g) {
  return term(dual_family(f), n, g);
}

TermInfo term_info(const SequenceFamily& f, long long n, const Grid& g) {
  TermInfo info;
  double radius = std::numeric_limits<double>::infinity();
  switch (f.kind) {
    case FamilyKind::concentration: radius = f.scale(n) * f.u.support_radius(); break;
    case FamilyKind::oscillation: {
      const double eps = f.scale(n);
      for (Eigen::Index a = 0; a < f.wavevector.size(); ++a) {
        const double target = f.wavevector(a) / eps;
        info.snap_error = std::max(info.snap_error, std::abs(target - snap(target, g) / g.L));
      }
      radius = f.u.support_radius();
      break;
    }
    case FamilyKind::composite53: {
      const double nn = static_cast<double>(n);
      info.snap_error = std::abs(nn - snap(nn, g) / g.L);
      radius = std::max(f.first.support_radius(), f.second.support_radius());
      break;
    }
    case FamilyKind::scaled: radius = f.u.support_radius(); break;
  }
  info.wrap_margin = std::isinf(radius) ? std::numeric_limits<double>::infinity() : g.L / (2.0 * radius);
  // Constants are periodic already; everything else must fit.
  info.wrap_ok = std::isinf(radius) || info.wrap_margin >= 1.0;
  return info;
}

GridFunction weak_limit(const SequenceFamily& f, const Grid& g) {
  if (f.kind != FamilyKind::scaled) return GridFunction(g);
  const auto a = f.scale.limit();
  if (!a) throw DomainError("weak_limit: amplitude schedule has no limit");
  GridFunction w = GridFunction::sample(g, [&](const Point& x) { return *a * f.u(wrap(x - f.center, g.L)); });
  return f.canonical_dual ? duality_map(w, f.p) : w;
}

std::vector<double> weak_null_check(const SequenceFamily& f, const Grid& g,
                                    const std::vector<GridFunction>& tests,
                                    const std::vector<long long>& n_schedule) {
  std::vector<double> profile;
  for (long long n : n_schedule) {
    const GridFunction t = term(f, n, g);
    double m = 0.0;
    for (const auto& phi : tests) m = std::max(m, std::abs(integral_product(t, phi)));
    profile.push_back(m);
  }
  return profile;
}

}  // namespace oslab

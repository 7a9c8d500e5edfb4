#include "oslab/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace oslab {

namespace {

template <class T>
using Pt = std::array<T, kMaxDim>;

void check_dim(int d) {
  if (d < 1 || d > kMaxDim)
    throw DomainError("symbols are supported for 1 <= d <= " + std::to_string(kMaxDim) +
                      ", got d = " + std::to_string(d));
}

std::string describe(const Freq& xi) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Eigen::Index i = 0; i < xi.size(); ++i) os << (i ? ", " : "") << xi(i);
  os << ')';
  return os.str();
}

Pt<double> to_pt(const Freq& xi) {
  Pt<double> p{};
  for (Eigen::Index i = 0; i < xi.size(); ++i) p[i] = xi(i);
  return p;
}

template <class T>
T squared_radius(const Pt<T>& x, int d) {
  T s = x[0] * x[0];
  for (int i = 1; i < d; ++i) s += x[i] * x[i];
  return s;
}

template <class T>
T radius(const Pt<T>& x, int d) {
  using std::sqrt;
  return sqrt(squared_radius(x, d));
}

template <class T>
T gaussian_eval(const Pt<T>& x, int d, double width) {
  using std::exp;
  return exp(squared_radius(x, d) * (-M_PI / (width * width)));
}

template <class T>
T rational_eval(const Pt<T>& x, int d, const MultiIndex& alpha, int l, int m) {
  T num(1.0);
  for (int i = 0; i < d; ++i) num = num * ipow(x[i], alpha[i]);
  const T r = radius(x, d);
  return num / (ipow(r, l) + ipow(r, m));
}

template <class T>
T sobolev_eval(const Pt<T>& x, int d, double m, bool reciprocal) {
  using std::pow;
  const T r2 = squared_radius(x, d);
  const T top = pow(radius(x, d), m) + 1.0;
  const T bottom = pow(r2 + 1.0, 0.5 * m);
  return reciprocal ? bottom / top : top / bottom;
}

// Real and imaginary parts of a sphere polynomial evaluated at x / |x|.
template <class T>
std::pair<T, T> sphere_poly_eval(const Pt<T>& x, int d, const SpherePolynomial& p) {
  const T r = radius(x, d);
  Pt<T> e{};
  for (int i = 0; i < d; ++i) e[i] = x[i] / r;
  T re(p.c0.real());
  T im(p.c0.imag());
  if (p.a.size() == d) {
    for (int i = 0; i < d; ++i) {
      re += e[i] * p.a(i).real();
      im += e[i] * p.a(i).imag();
    }
  }
  if (p.B.rows() == d && p.B.cols() == d) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const T ee = e[i] * e[j];
        re += ee * p.B(i, j).real();
        im += ee * p.B(i, j).imag();
      }
  }
  return {re, im};
}

ComplexJet combine(const RealJet& re, const RealJet& im) {
  ComplexJet out = to_complex(re);
  out += to_complex(im) * Complex(0.0, 1.0);
  return out;
}

ComplexJet conj_jet(const ComplexJet& a) {
  ComplexJet out;
  out.v = std::conj(a.v);
  out.g = a.g.conjugate();
  out.h = a.h.conjugate();
  return out;
}

Complex monomial(const Freq& e, const MultiIndex& alpha) {
  double v = 1.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) v *= ipow(e(i), alpha[i]);
  return v;
}

}  // namespace

std::string to_string(SymbolFamily f) {
  switch (f) {
    case SymbolFamily::homogeneous: return "homogeneous";
    case SymbolFamily::schwartz: return "schwartz";
    case SymbolFamily::rational: return "rational";
    case SymbolFamily::sobolev_weight: return "sobolev_weight";
    case SymbolFamily::user_sampled: return "user_sampled";
    case SymbolFamily::custom: return "custom";
    case SymbolFamily::product: return "product";
    case SymbolFamily::sum: return "sum";
  }
  return "unknown";
}

Complex SpherePolynomial::operator()(const Freq& e) const {
  auto [re, im] = sphere_poly_eval(to_pt(e), static_cast<int>(e.size()), *this);
  return {re, im};
}

Symbol Symbol::constant(int d, Complex c) {
  SpherePolynomial p;
  p.c0 = c;
  Symbol s = homogeneous(d, p);
  s.label_ = "constant";
  return s;
}

Symbol Symbol::homogeneous(int d, SpherePolynomial tilde) {
  check_dim(d);
  if ((tilde.a.size() != 0 && tilde.a.size() != d) ||
      (tilde.B.size() != 0 && (tilde.B.rows() != d || tilde.B.cols() != d)))
    throw DomainError("homogeneous symbol: polynomial coefficients do not match d");
  Symbol s;
  s.d_ = d;
  s.family_ = SymbolFamily::homogeneous;
  s.label_ = "homogeneous";
  s.base_ = [d, tilde](const Freq& xi) {
    auto [re, im] = sphere_poly_eval(to_pt(xi), d, tilde);
    return Complex(re, im);
  };
  s.jet_ = [d, tilde](const JetPoint& p) {
    auto [re, im] = sphere_poly_eval(p, d, tilde);
    return combine(re, im);
  };
  s.trace0_ = tilde;
  s.trace_inf_ = tilde;
  return s;
}

Symbol Symbol::homogeneous(int d, SphereFn tilde, std::string label) {
  check_dim(d);
  Symbol s;
  s.d_ = d;
  s.family_ = SymbolFamily::homogeneous;
  s.label_ = std::move(label);
  s.base_ = [tilde](const Freq& xi) { return tilde(xi / xi.norm()); };
  s.trace0_ = tilde;
  s.trace_inf_ = tilde;
  return s;
}

Symbol Symbol::gaussian(int d, double width) {
  check_dim(d);
  if (!(width > 0.0)) throw DomainError("gaussian symbol: width must be positive");
  Symbol s;
  s.d_ = d;
  s.family_ = SymbolFamily::schwartz;
  s.label_ = "gaussian";
  s.schwartz_ = true;
  s.base_ = [d, width](const Freq& xi) { return Complex(gaussian_eval(to_pt(xi), d, width)); };
  s.jet_ = [d, width](const JetPoint& p) { return to_complex(gaussian_eval(p, d, width)); };
  s.trace0_ = [](const Freq&) { return Complex(1.0); };
  s.trace_inf_ = [](const Freq&) { return Complex(0.0); };
  return s;
}

Symbol Symbol::rational(int d, MultiIndex alpha, int l, int m) {
  check_dim(d);
  int order = 0;
  for (int i = 0; i < kMaxDim; ++i) {
    if (alpha[i] < 0) throw DomainError("rational symbol: negative multi-index entry");
    if (i >= d && alpha[i] != 0) throw DomainError("rational symbol: multi-index longer than d");
    order += alpha[i];
  }
  if (l < 0 || !(l <= order && order <= m))
    throw DomainError("rational symbol: require 0 <= l <= |alpha| <= m (l=" + std::to_string(l) +
                      ", |alpha|=" + std::to_string(order) + ", m=" + std::to_string(m) + ")");
  Symbol s;
  s.d_ = d;
  s.family_ = SymbolFamily::rational;
  s.label_ = "rational";
  s.base_ = [=](const Freq& xi) { return Complex(rational_eval(to_pt(xi), d, alpha, l, m)); };
  s.jet_ = [=](const JetPoint& p) { return to_complex(rational_eval(p, d, alpha, l, m)); };
  // Near 0 the denominator is dominated by |xi|^l, near infinity by |xi|^m;
  // the limit along a ray is e^alpha when the dominant power matches |alpha|.
  const double w0 = (l == m) ? 0.5 : (order == l ? 1.0 : 0.0);
  const double winf = (l == m) ? 0.5 : (order == m ? 1.0 : 0.0);
  s.trace0_ = [alpha, w0](const Freq& e) { return w0 * monomial(e, alpha); };
  s.trace_inf_ = [alpha, winf](const Freq& e) { return winf * monomial(e, alpha); };
  return s;
}

Symbol Symbol::sobolev_weight(int d, double m, bool reciprocal) {
  check_dim(d);
  if (!(m > 0.0)) throw DomainError("sobolev weight: order m must be positive");
  Symbol s;
  s.d_ = d;
  s.family_ = SymbolFamily::sobolev_weight;
  s.label_ = reciprocal ? "sobolev_weight_reciprocal" : "sobolev_weight";
  s.base_ = [=](const Freq& xi) { return Complex(sobolev_eval(to_pt(xi), d, m, reciprocal)); };
  s.jet_ = [=](const JetPoint& p) { return to_complex(sobolev_eval(p, d, m, reciprocal)); };
  s.trace0_ = [](const Freq&) { return Complex(1.0); };
  s.trace_inf_ = [](const Freq&) { return Complex(1.0); };
  return s;
}

Symbol Symbol::sampled(SampledTable table) {
  check_dim(table.d);
  if (table.points.rows() == 0 || table.points.cols() != table.d ||
      table.values.size() != table.points.rows())
    throw DomainError("sampled symbol: table is empty or malformed");
  Symbol s;
  s.d_ = table.d;
  s.family_ = SymbolFamily::user_sampled;
  s.label_ = "user_sampled";
  if (table.d == 1) {
    std::vector<Eigen::Index> order(table.points.rows());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return table.points(a, 0) < table.points(b, 0); });
    std::vector<double> xs;
    std::vector<Complex> vs;
    for (auto i : order) {
      xs.push_back(table.points(i, 0));
      vs.push_back(table.values(i));
    }
    s.base_ = [xs, vs](const Freq& xi) {
      const double x = xi(0);
      if (x < xs.front() || x > xs.back())
        throw EvaluationError("sampled symbol: frequency " + describe(xi) + " outside table range");
      auto it = std::upper_bound(xs.begin(), xs.end(), x);
      if (it == xs.end()) return vs.back();
      const auto j = static_cast<std::size_t>(it - xs.begin());
      if (j == 0) return vs.front();
      const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
      return (1.0 - t) * vs[j - 1] + t * vs[j];
    };
  } else {
    const Eigen::RowVectorXd lo = table.points.colwise().minCoeff();
    const Eigen::RowVectorXd hi = table.points.colwise().maxCoeff();
    s.base_ = [table, lo, hi](const Freq& xi) {
      Eigen::Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < table.points.rows(); ++r) {
        double dist = 0.0;
        for (int k = 0; k < table.d; ++k) {
          if (xi(k) < lo(k) || xi(k) > hi(k))
            throw EvaluationError("sampled symbol: frequency " + describe(xi) +
                                  " outside table bounding box");
          const double diff = table.points(r, k) - xi(k);
          dist += diff * diff;
        }
        if (dist < best_d) {
          best_d = dist;
          best = r;
        }
      }
      return table.values(best);
    };
  }
  return s;
}

Symbol Symbol::custom(int d, ValueFn fn, std::string label, std::optional<SphereFn> trace0,
                      std::optional<SphereFn> trace_inf, bool schwartz) {
  check_dim(d);
  Symbol s;
  s.d_ = d;
  s.family_ = schwartz ? SymbolFamily::schwartz : SymbolFamily::custom;
  s.label_ = std::move(label);
  s.schwartz_ = schwartz;
  s.base_ = std::move(fn);
  if (trace0) s.trace0_ = std::move(*trace0);
  if (trace_inf) s.trace_inf_ = std::move(*trace_inf);
  if (schwartz) {
    // Continuous at the origin and decaying at infinity.
    if (!s.trace0_) {
      const Complex at0 = s.base_(Freq::Zero(d));
      s.trace0_ = [at0](const Freq&) { return at0; };
    }
    if (!s.trace_inf_) s.trace_inf_ = [](const Freq&) { return Complex(0.0); };
  }
  return s;
}

Complex Symbol::operator()(const Freq& xi) const {
  if (dilation_ == 1.0) return base(xi);
  return base(dilation_ * xi);
}

Complex Symbol::base(const Freq& eta) const {
  if (eta.size() != d_) throw DomainError("symbol evaluated with wrong dimension");
  if (eta.isZero(0.0)) throw EvaluationError("symbol '" + label_ + "' evaluated at xi = 0");
  try {
    return base_(eta);
  } catch (const EvaluationError&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationError("symbol '" + label_ + "' failed at " + describe(eta) + ": " + e.what());
  }
}

ComplexJet Symbol::base_jet(const Freq& eta) const {
  if (!jet_) throw UsageError("symbol '" + label_ + "' has no closed-form derivatives");
  JetPoint p{};
  for (int i = 0; i < d_; ++i) p[i] = RealJet::variable(eta(i), i);
  return jet_(p);
}

ComplexJet Symbol::jet_at(const JetPoint& p) const {
  if (!jet_) throw UsageError("symbol '" + label_ + "' has no closed-form derivatives");
  if (dilation_ == 1.0) return jet_(p);
  JetPoint q = p;
  for (int i = 0; i < d_; ++i) q[i] = p[i] * dilation_;
  return jet_(q);
}

Complex Symbol::trace0(const Freq& e) const {
  if (!trace0_) throw DomainError("symbol '" + label_ + "' has no trace at the origin");
  return trace0_(e);
}

Complex Symbol::trace_inf(const Freq& e) const {
  if (!trace_inf_) throw DomainError("symbol '" + label_ + "' has no trace at infinity");
  return trace_inf_(e);
}

Complex Symbol::zero_value() const {
  if (zero_override_) return *zero_override_;
  if (!trace0_) return 0.0;
  Complex acc = 0.0;
  for (int i = 0; i < d_; ++i) {
    Freq e = Freq::Zero(d_);
    e(i) = 1.0;
    acc += trace0_(e);
    e(i) = -1.0;
    acc += trace0_(e);
  }
  return acc / static_cast<double>(2 * d_);
}

Symbol Symbol::with_zero_value(Complex c) const {
  Symbol s = *this;
  s.zero_override_ = c;
  return s;
}

Symbol Symbol::with_label(std::string label) const {
  Symbol s = *this;
  s.label_ = std::move(label);
  return s;
}

Symbol Symbol::trace0_symbol() const {
  if (!trace0_) throw DomainError("symbol '" + label_ + "' has no trace at the origin");
  return homogeneous(d_, trace0_, label_ + "_trace0");
}

Symbol Symbol::trace_inf_symbol() const {
  if (!trace_inf_) throw DomainError("symbol '" + label_ + "' has no trace at infinity");
  return homogeneous(d_, trace_inf_, label_ + "_traceinf");
}

Symbol Symbol::conj() const {
  Symbol s = *this;
  s.label_ = "conj(" + label_ + ")";
  auto base = base_;
  s.base_ = [base](const Freq& xi) { return std::conj(base(xi)); };
  if (jet_) {
    auto jet = jet_;
    s.jet_ = [jet](const JetPoint& p) { return conj_jet(jet(p)); };
  }
  if (trace0_) {
    auto t = trace0_;
    s.trace0_ = [t](const Freq& e) { return std::conj(t(e)); };
  }
  if (trace_inf_) {
    auto t = trace_inf_;
    s.trace_inf_ = [t](const Freq& e) { return std::conj(t(e)); };
  }
  if (zero_override_) s.zero_override_ = std::conj(*zero_override_);
  return s;
}

Symbol Symbol::scaled(Complex c) const { return constant(d_, c) * (*this); }

namespace {

// Composite symbols multiply (or add) their zero-frequency values so that
// the grid multiplier map stays an algebra homomorphism.
template <class Op>
Symbol compose(const Symbol& a, const Symbol& b, SymbolFamily fam, const char* sep, Op op) {
  if (a.dim() != b.dim()) throw DomainError("cannot combine symbols of different dimension");
  std::optional<Symbol::SphereFn> t0;
  std::optional<Symbol::SphereFn> tinf;
  if (a.has_trace0() && b.has_trace0())
    t0 = [a, b, op](const Freq& e) { return op(a.trace0(e), b.trace0(e)); };
  if (a.has_trace_inf() && b.has_trace_inf())
    tinf = [a, b, op](const Freq& e) { return op(a.trace_inf(e), b.trace_inf(e)); };
  Symbol s = Symbol::custom(
      a.dim(), [a, b, op](const Freq& xi) { return op(a(xi), b(xi)); },
      "(" + a.label() + sep + b.label() + ")", t0, tinf,
      fam == SymbolFamily::product ? (a.schwartz() || b.schwartz()) : (a.schwartz() && b.schwartz()));
  return s.with_zero_value(op(a.zero_value(), b.zero_value()));
}

}  // namespace

Symbol operator*(const Symbol& a, const Symbol& b) {
  auto mul = [](Complex x, Complex y) { return x * y; };
  Symbol s = compose(a, b, SymbolFamily::product, "*", mul);
  s.family_ = SymbolFamily::product;
  if (a.has_jets() && b.has_jets())
    s.jet_ = [a, b](const JetPoint& p) { return a.jet_at(p) * b.jet_at(p); };
  return s;
}

Symbol operator+(const Symbol& a, const Symbol& b) {
  auto add = [](Complex x, Complex y) { return x + y; };
  Symbol s = compose(a, b, SymbolFamily::sum, "+", add);
  s.family_ = SymbolFamily::sum;
  s.schwartz_ = a.schwartz() && b.schwartz();
  if (a.has_jets() && b.has_jets())
    s.jet_ = [a, b](const JetPoint& p) { return a.jet_at(p) + b.jet_at(p); };
  return s;
}

Symbol dilate(const Symbol& s, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("dilate: factor must be positive and finite");
  Symbol out = s;
  out.dilation_ = s.dilation_ * a;
  return out;
}

Symbol translate(const Symbol& s, const Freq& shift) {
  if (shift.size() != s.dim()) throw DomainError("translate: shift dimension differs from the symbol's");
  if (!s.schwartz()) throw DomainError("translate: only Schwartz symbols keep their traces under translation");
  if (shift.isZero(0.0)) return s;
  std::ostringstream os;
  os << s.label() << " shifted by (";
  for (Eigen::Index i = 0; i < shift.size(); ++i) os << (i ? ", " : "") << shift(i);
  os << ')';
  return Symbol::custom(
      s.dim(),
      [s, shift](const Freq& xi) {
        const Freq eta = xi - shift;
        return eta.isZero(0.0) ? s.zero_value() : s(eta);
      },
      os.str(), std::nullopt, std::nullopt, true);
}

Complex chart0(const Symbol& psi, double s, const Freq& eta) {
  if (!(s > 0.0)) throw DomainError("chart0: s must be positive");
  return psi(s * eta);
}

Complex chart_inf(const Symbol& psi, double s, const Freq& eta) {
  if (!(s > 0.0)) throw DomainError("chart_inf: s must be positive");
  return psi(eta / s);
}

std::vector<Freq> sphere_directions(int d, int count) {
  check_dim(d);
  std::vector<Freq> dirs;
  if (d == 1) {
    dirs.push_back(Freq::Constant(1, 1.0));
    dirs.push_back(Freq::Constant(1, -1.0));
    return dirs;
  }
  if (count < 1) throw UsageError("sphere_directions: count must be positive");
  for (int k = 0; k < count; ++k) {
    Freq e(d);
    if (d == 2) {
      const double th = 2.0 * M_PI * k / count;
      e << std::cos(th), std::sin(th);
    } else {
      const double golden = M_PI * (3.0 - std::sqrt(5.0));
      const double z = 1.0 - (2.0 * k + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      e << r * std::cos(golden * k), r * std::sin(golden * k), z;
    }
    dirs.push_back(e);
  }
  return dirs;
}

namespace {

// A radial limit is accepted when the shell-to-shell residuals have halved
// over the last three shells without growing at the final step, and the
// final residual is small against the size of the values; residuals at
// roundoff level count as converged outright.
bool residuals_settle(const std::vector<double>& res, double scale) {
  const std::size_t k = res.size();
  if (k == 0) return true;
  if (k >= 2 && res[k - 1] <= 1e-14 && res[k - 2] <= 1e-14) return true;
  if (k < 3) return false;
  return res[k - 1] <= 0.5 * res[k - 3] && res[k - 1] <= res[k - 2] &&
         res[k - 1] <= 1e-3 * std::max(1.0, scale);
}

}  // namespace

TraceReport boundary_traces(const Symbol& s, int n_dirs, int max_exponent) {
  if (max_exponent < 1) throw UsageError("boundary_traces: need at least two shells");
  TraceReport rep;
  rep.directions = sphere_directions(s.dim(), n_dirs);
  for (int k = 0; k <= max_exponent; ++k) {
    rep.radii_small.push_back(std::ldexp(1.0, -k));
    rep.radii_large.push_back(std::ldexp(1.0, k));
  }
  auto sweep = [&](const std::vector<double>& radii, std::vector<Complex>& last,
                   std::vector<double>& residuals) {
    std::vector<Complex> prev;
    double scale = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      std::vector<Complex> cur;
      cur.reserve(rep.directions.size());
      for (const auto& e : rep.directions) cur.push_back(s(radii[k] * e));
      if (k > 0) {
        double r = 0.0;
        for (std::size_t i = 0; i < cur.size(); ++i) r = std::max(r, std::abs(cur[i] - prev[i]));
        residuals.push_back(r);
      }
      prev = std::move(cur);
    }
    for (const auto& v : prev) scale = std::max(scale, std::abs(v));
    last = prev;
    return residuals_settle(residuals, scale);
  };
  rep.has_trace0 = sweep(rep.radii_small, rep.trace0, rep.residuals0);
  rep.has_trace_inf = sweep(rep.radii_large, rep.trace_inf, rep.residuals_inf);
  return rep;
}

namespace {

struct Derivatives {
  Complex value;
  Eigen::Matrix<Complex, kMaxDim, 1> grad;
  Eigen::Matrix<Complex, kMaxDim, kMaxDim> hess;
};

Derivatives exact_derivatives(const Symbol& s, const Freq& eta) {
  const ComplexJet j = s.base_jet(eta);
  return {j.v, j.g, j.h};
}

// Central differences with step 1e-3 |eta| per axis, nested for mixed
// partials.
Derivatives fd_derivatives(const Symbol& s, const Freq& eta, int order) {
  const int d = static_cast<int>(eta.size());
  const double h = 1e-3 * eta.norm();
  Derivatives out;
  out.value = s.base(eta);
  out.grad.setZero();
  out.hess.setZero();
  if (order < 1) return out;
  auto shifted = [&](int i, double si, int j, double sj) {
    Freq p = eta;
    if (i >= 0) p(i) += si;
    if (j >= 0) p(j) += sj;
    return s.base(p);
  };
  for (int i = 0; i < d; ++i) out.grad(i) = (shifted(i, h, -1, 0) - shifted(i, -h, -1, 0)) / (2.0 * h);
  if (order < 2) return out;
  for (int i = 0; i < d; ++i) {
    out.hess(i, i) = (shifted(i, h, -1, 0) - 2.0 * out.value + shifted(i, -h, -1, 0)) / (h * h);
    for (int j = i + 1; j < d; ++j) {
      const Complex v = (shifted(i, h, j, h) - shifted(i, h, j, -h) - shifted(i, -h, j, h) +
                         shifted(i, -h, j, -h)) /
                        (4.0 * h * h);
      out.hess(i, j) = v;
      out.hess(j, i) = v;
    }
  }
  return out;
}

}  // namespace

MihlinReport mihlin_estimate(const Symbol& s, int order, const MihlinLattice& lattice) {
  const int d = s.dim();
  if (order < 0 || order > d / 2 + 1)
    throw UsageError("mihlin_estimate: order must lie in [0, floor(d/2)+1] = [0, " +
                     std::to_string(d / 2 + 1) + "]");
  if (lattice.j_min > lattice.j_max || lattice.sub_radii < 1 || !(lattice.scale > 0.0))
    throw UsageError("mihlin_estimate: invalid lattice");

  MihlinReport rep;
  rep.order = order;
  rep.exact_derivatives = s.has_jets();
  const auto dirs = sphere_directions(d, lattice.dirs);
  {
    std::ostringstream os;
    os << "shells 2^" << lattice.j_min << "..2^" << lattice.j_max << " x " << lattice.sub_radii
       << " radii, " << dirs.size() << " directions, scale " << lattice.scale;
    rep.grid_spec = os.str();
  }

  // Sample index: direction * n_alpha + alpha.
  const int n_alpha = 1 + (order >= 1 ? d : 0) + (order >= 2 ? d * (d + 1) / 2 : 0);
  std::vector<double> lo(dirs.size() * n_alpha, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dirs.size() * n_alpha, 0.0);

  // The estimator works in the coordinates eta = dilation * xi, where
  // |xi|^k |d^alpha_xi psi(dilation xi)| = |eta|^k |(d^alpha base)(eta)|.
  const double factor = s.dilation() * lattice.scale;
  for (int j = lattice.j_min; j <= lattice.j_max; ++j) {
    double shell_max = 0.0;
    for (int q = 0; q < lattice.sub_radii; ++q) {
      const double r = std::exp2(j + static_cast<double>(q) / lattice.sub_radii);
      for (std::size_t di = 0; di < dirs.size(); ++di) {
        const Freq eta = dirs[di] * (factor * r);
        Derivatives der;
        try {
          der = s.has_jets() ? exact_derivatives(s, eta) : fd_derivatives(s, eta, order);
        } catch (const std::exception& e) {
          throw EvaluationError(std::string("mihlin_estimate: ") + e.what() + " at xi = " +
                                describe(eta / s.dilation()));
        }
        const double rad = eta.norm();
        int a = 0;
        auto record = [&](double v) {
          const std::size_t idx = di * n_alpha + a++;
          lo[idx] = std::min(lo[idx], v);
          hi[idx] = std::max(hi[idx], v);
          shell_max = std::max(shell_max, v);
        };
        record(std::abs(der.value));
        if (order >= 1)
          for (int i = 0; i < d; ++i) record(rad * std::abs(der.grad(i)));
        if (order >= 2)
          for (int i = 0; i < d; ++i)
            for (int k = i; k < d; ++k) record(rad * rad * std::abs(der.hess(i, k)));
      }
    }
    rep.per_shell.push_back({lattice.scale * std::exp2(j), shell_max});
    rep.constant = std::max(rep.constant, shell_max);
  }
  for (std::size_t i = 0; i < lo.size(); ++i) rep.ray_spread = std::max(rep.ray_spread, hi[i] - lo[i]);
  return rep;
}

SampledTable load_sampled_table(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open sampled symbol file '" + path + "'");
  SampledTable t;
  t.d = d;
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty() && lineno == 1) continue;
      throw UsageError(path + ":" + std::to_string(lineno) + ": non-numeric entry");
    }
    if (static_cast<int>(row.size()) != d + 2)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(d + 2) +
                       " columns");
    rows.push_back(std::move(row));
  }
  t.points.resize(static_cast<Eigen::Index>(rows.size()), d);
  t.values.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int k = 0; k < d; ++k) t.points(r, k) = rows[r][k];
    t.values(r) = Complex(rows[r][d], rows[r][d + 1]);
  }
  return t;
}

}  // namespace oslab

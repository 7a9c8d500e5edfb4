#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>

namespace oslab {

inline constexpr int kMaxDim = 3;

// Truncated second-order Taylor jet in up to kMaxDim variables: value,
// gradient and Hessian carried through arithmetic by the chain rule. Enough
// to evaluate every partial derivative of order <= 2 exactly, which covers
// the Mihlin order floor(d/2)+1 for d <= 3.
template <class Scalar>
struct Jet {
  using Grad = Eigen::Matrix<Scalar, kMaxDim, 1>;
  using Hess = Eigen::Matrix<Scalar, kMaxDim, kMaxDim>;

  Scalar v{};
  Grad g = Grad::Zero();
  Hess h = Hess::Zero();

  Jet() = default;
  Jet(Scalar value) : v(value) {}  // NOLINT: implicit constants are convenient

  static Jet variable(Scalar value, int axis) {
    Jet j(value);
    j.g(axis) = Scalar(1);
    return j;
  }

  template <class Other>
  Jet<Other> cast() const {
    Jet<Other> out;
    out.v = Other(v);
    out.g = g.template cast<Other>();
    out.h = h.template cast<Other>();
    return out;
  }

  // Apply a scalar function f with f(v), f'(v), f''(v) given.
  Jet chain(Scalar f0, Scalar f1, Scalar f2) const {
    Jet out;
    out.v = f0;
    out.g = f1 * g;
    out.h = f1 * h + f2 * (g * g.transpose());
    return out;
  }

  Jet operator-() const {
    Jet out;
    out.v = -v;
    out.g = -g;
    out.h = -h;
    return out;
  }
  Jet& operator+=(const Jet& o) {
    v += o.v;
    g += o.g;
    h += o.h;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    g -= o.g;
    h -= o.h;
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    Hess cross = g * o.g.transpose();
    h = v * o.h + o.v * h + cross + cross.transpose();
    g = v * o.g + o.v * g;
    v *= o.v;
    return *this;
  }
  Jet& operator/=(const Jet& o) { return *this *= o.reciprocal(); }
  Jet reciprocal() const {
    Scalar r = Scalar(1) / v;
    return chain(r, -r * r, Scalar(2) * r * r * r);
  }
};

template <class S> Jet<S> operator+(Jet<S> a, const Jet<S>& b) { return a += b; }
template <class S> Jet<S> operator-(Jet<S> a, const Jet<S>& b) { return a -= b; }
template <class S> Jet<S> operator*(Jet<S> a, const Jet<S>& b) { return a *= b; }
template <class S> Jet<S> operator/(Jet<S> a, const Jet<S>& b) { return a /= b; }
template <class S> Jet<S> operator+(Jet<S> a, S b) { a.v += b; return a; }
template <class S> Jet<S> operator+(S b, Jet<S> a) { a.v += b; return a; }
template <class S> Jet<S> operator-(Jet<S> a, S b) { a.v -= b; return a; }
template <class S> Jet<S> operator-(S b, const Jet<S>& a) { return (-a) + b; }
template <class S> Jet<S> operator*(Jet<S> a, S b) {
  a.v *= b;
  a.g *= b;
  a.h *= b;
  return a;
}
template <class S> Jet<S> operator*(S b, Jet<S> a) { return a * b; }
template <class S> Jet<S> operator/(Jet<S> a, S b) { return a * (S(1) / b); }
template <class S> Jet<S> operator/(S b, const Jet<S>& a) { return a.reciprocal() * b; }

template <class S> Jet<S> sqrt(const Jet<S>& a) {
  using std::sqrt;
  S s = sqrt(a.v);
  return a.chain(s, S(0.5) / s, S(-0.25) / (s * a.v));
}
template <class S> Jet<S> exp(const Jet<S>& a) {
  using std::exp;
  S e = exp(a.v);
  return a.chain(e, e, e);
}
template <class S> Jet<S> log(const Jet<S>& a) {
  using std::log;
  return a.chain(log(a.v), S(1) / a.v, S(-1) / (a.v * a.v));
}
template <class S> Jet<S> sin(const Jet<S>& a) {
  using std::cos;
  using std::sin;
  S s = sin(a.v);
  return a.chain(s, cos(a.v), -s);
}
template <class S> Jet<S> cos(const Jet<S>& a) {
  using std::cos;
  using std::sin;
  S c = cos(a.v);
  return a.chain(c, -sin(a.v), -c);
}
// Real power with real exponent; the base must be positive unless q is a
// nonnegative integer.
template <class S> Jet<S> pow(const Jet<S>& a, double q) {
  using std::pow;
  if (q == 0.0) return Jet<S>(S(1));
  if (q == 1.0) return a;
  if (q == 2.0) return a * a;
  S p2 = S(pow(a.v, q - 2.0));
  S p1 = p2 * a.v;
  return a.chain(p1 * a.v, S(q) * p1, S(q * (q - 1.0)) * p2);
}

// Integer power, valid for any base (including zero).
template <class S> Jet<S> ipow(const Jet<S>& a, int q) {
  Jet<S> out(S(1));
  for (int i = 0; i < q; ++i) out *= a;
  return out;
}
inline double ipow(double a, int q) {
  double out = 1.0;
  for (int i = 0; i < q; ++i) out *= a;
  return out;
}
inline std::complex<double> ipow(std::complex<double> a, int q) {
  std::complex<double> out = 1.0;
  for (int i = 0; i < q; ++i) out *= a;
  return out;
}

using RealJet = Jet<double>;
using ComplexJet = Jet<std::complex<double>>;

inline ComplexJet to_complex(const RealJet& a) { return a.cast<std::complex<double>>(); }

}  // namespace oslab

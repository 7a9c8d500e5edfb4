#pragma once

// Geometry of the compactified dual space K_{0,inf}(R^d): R^d minus the
// origin, closed off by one sphere of directions at the origin (points 0^e)
// and one at infinity (points inf^e). The embedding J maps it onto the
// spherical shell {(zeta0, zeta) on S^d : 0 <= zeta0 <= r1}.

#include "oslab/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace oslab {

template <class Scalar = double>
struct BasicCompactParams {
  int d = 1;
  Scalar rho0 = Scalar(1);

  BasicCompactParams() = default;
  BasicCompactParams(int dim, Scalar rho) : d(dim), rho0(rho) { validate(); }

  Scalar r1() const {
    using std::sqrt;
    return Scalar(1) / sqrt(Scalar(1) + rho0 * rho0);
  }
  void validate() const {
    if (d < 1) throw DomainError("compactification: dimension must be >= 1");
    if (!(rho0 > Scalar(0))) throw DomainError("compactification: rho0 must be positive");
  }
};

enum class PointKind { interior, sigma_zero, sigma_infinity };

template <class Scalar = double>
class BasicCompactPoint {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  static BasicCompactPoint interior(const Vector& xi) {
    if (xi.size() == 0 || xi.norm() == Scalar(0))
      throw DomainError("interior point must be a nonzero vector");
    return BasicCompactPoint(PointKind::interior, xi);
  }
  static BasicCompactPoint sigma_zero(const Vector& e) {
    return BasicCompactPoint(PointKind::sigma_zero, unit(e));
  }
  static BasicCompactPoint sigma_infinity(const Vector& e) {
    return BasicCompactPoint(PointKind::sigma_infinity, unit(e));
  }

  PointKind kind() const { return kind_; }
  bool is_interior() const { return kind_ == PointKind::interior; }
  // The frequency for interior points, the direction e for boundary points.
  const Vector& vector() const { return v_; }
  int dim() const { return static_cast<int>(v_.size()); }

 private:
  BasicCompactPoint(PointKind k, Vector v) : kind_(k), v_(std::move(v)) {}

  static Vector unit(const Vector& e) {
    using std::abs;
    if (e.size() == 0) throw DomainError("boundary direction must be nonempty");
    Scalar n = e.norm();
    if (abs(n - Scalar(1)) > Scalar(1e-6))
      throw DomainError("boundary direction must be a unit vector (|e| = " +
                        std::to_string(static_cast<double>(n)) + ")");
    return e / n;
  }

  PointKind kind_;
  Vector v_;
};

template <class Scalar = double>
struct BasicSpherePoint {
  Scalar zeta0{};
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> zeta;

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> embedded() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(zeta.size() + 1);
    out << zeta0, zeta;
    return out;
  }
};

using CompactParams = BasicCompactParams<double>;
using CompactPoint = BasicCompactPoint<double>;
using SpherePoint = BasicSpherePoint<double>;

inline constexpr double kBoundarySnap = 1e-10;

template <class Scalar>
BasicSpherePoint<Scalar> compactify(const BasicCompactPoint<Scalar>& p,
                                    const BasicCompactParams<Scalar>& params) {
  using std::sqrt;
  if (p.dim() != params.d) throw DomainError("compactify: point dimension differs from params.d");
  BasicSpherePoint<Scalar> s;
  switch (p.kind()) {
    case PointKind::sigma_zero:
      s.zeta0 = params.r1();
      s.zeta = params.rho0 * params.r1() * p.vector();
      break;
    case PointKind::sigma_infinity:
      s.zeta0 = Scalar(0);
      s.zeta = p.vector();
      break;
    case PointKind::interior: {
      const Scalar r = p.vector().norm();
      const Scalar shifted = r + params.rho0;
      const Scalar root = sqrt(Scalar(1) + shifted * shifted);
      s.zeta0 = Scalar(1) / root;
      s.zeta = (shifted / (root * r)) * p.vector();
      break;
    }
  }
  return s;
}

template <class Scalar>
BasicCompactPoint<Scalar> decompactify(const BasicSpherePoint<Scalar>& s,
                                       const BasicCompactParams<Scalar>& params) {
  using std::abs;
  const Scalar r1 = params.r1();
  const Scalar zn = s.zeta.norm();
  if (s.zeta.size() != params.d) throw DomainError("decompactify: dimension mismatch");
  if (abs(s.zeta0 * s.zeta0 + zn * zn - Scalar(1)) > Scalar(1e-12))
    throw DomainError("decompactify: point is not on the unit sphere");
  if (s.zeta0 < -Scalar(kBoundarySnap) || s.zeta0 > r1 + Scalar(kBoundarySnap))
    throw DomainError("decompactify: first coordinate outside [0, r1]");

  if (abs(s.zeta0) < Scalar(kBoundarySnap)) return BasicCompactPoint<Scalar>::sigma_infinity(s.zeta / zn);
  if (abs(s.zeta0 - r1) < Scalar(kBoundarySnap)) return BasicCompactPoint<Scalar>::sigma_zero(s.zeta / zn);
  // |zeta|/zeta0 = |xi| + rho0, so xi = zeta/zeta0 - rho0 zeta/|zeta|.
  return BasicCompactPoint<Scalar>::interior(s.zeta / s.zeta0 - params.rho0 * s.zeta / zn);
}

template <class Scalar>
Scalar metric(const BasicCompactPoint<Scalar>& p, const BasicCompactPoint<Scalar>& q,
              const BasicCompactParams<Scalar>& params) {
  return (compactify(p, params).embedded() - compactify(q, params).embedded()).norm();
}

namespace detail {

// One Aitken delta-squared step on x0, x1, x2; returns x2 when the second
// difference vanishes (no geometric structure to exploit).
template <class Scalar>
Scalar aitken(Scalar x0, Scalar x1, Scalar x2) {
  using std::abs;
  const Scalar d1 = x1 - x0;
  const Scalar d2 = x2 - x1;
  const Scalar den = d2 - d1;
  if (abs(den) <= Scalar(1e-14) * (abs(d1) + abs(d2)) || den == Scalar(0)) return x2;
  return x2 - d2 * d2 / den;
}

}  // namespace detail

// Limit of a sequence of nonzero frequencies in the compactified space, or
// nullopt when the tail is not Cauchy in the pulled-back metric.
//
// Cauchy test: over the last max(8, ceil(len/4)) terms the successive metric
// gaps must stay below 1e-6 and be non-increasing. The limit itself is
// located by Aitken extrapolation along the geometric subsequence
// len/4, len/2, len, which removes the leading power-law error. The radial
// coordinate is extrapolated through theta = atan(|xi| + rho0), which lives
// on the bounded interval [atan rho0, pi/2]; a limit within the tail's own
// movement of either end is placed on the corresponding boundary sphere.
template <class Scalar>
std::optional<BasicCompactPoint<Scalar>> classify_limit(
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& xis,
    const BasicCompactParams<Scalar>& params) {
  using std::abs;
  using std::atan;
  using std::tan;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Point = BasicCompactPoint<Scalar>;

  if (xis.empty()) throw UsageError("classify_limit: empty sequence");
  const std::size_t len = xis.size();
  std::vector<Vector> emb;
  emb.reserve(len);
  for (const auto& x : xis) emb.push_back(compactify(Point::interior(x), params).embedded());

  const std::size_t tail = std::min(len, std::max<std::size_t>(8, (len + 3) / 4));
  Scalar prev_gap = Scalar(-1);
  for (std::size_t i = len - tail; i + 1 < len; ++i) {
    const Scalar gap = (emb[i + 1] - emb[i]).norm();
    if (gap >= Scalar(1e-6)) return std::nullopt;
    if (prev_gap >= Scalar(0) && gap > prev_gap * (Scalar(1) + Scalar(1e-9)) + Scalar(1e-15))
      return std::nullopt;
    prev_gap = gap;
  }

  const std::size_t i2 = len - 1;
  const std::size_t i1 = (len - 1) / 2;
  const std::size_t i0 = (len - 1) / 4;
  auto theta = [&](std::size_t i) { return atan(xis[i].norm() + params.rho0); };
  auto direction = [&](std::size_t i) -> Vector { return xis[i] / xis[i].norm(); };

  const Scalar th_lo = atan(params.rho0);
  const Scalar th_hi = Scalar(M_PI) / Scalar(2);
  Scalar th = theta(i2);
  Scalar movement = Scalar(0);
  Vector dir = direction(i2);
  Vector xi_lim = xis[i2];
  if (i0 < i1 && i1 < i2) {
    th = detail::aitken(theta(i0), theta(i1), theta(i2));
    movement = abs(theta(i2) - theta(i1));
    Vector ext(dir.size());
    for (Eigen::Index k = 0; k < ext.size(); ++k) {
      ext(k) = detail::aitken(direction(i0)(k), direction(i1)(k), direction(i2)(k));
      xi_lim(k) = detail::aitken(xis[i0](k), xis[i1](k), xis[i2](k));
    }
    if (ext.allFinite() && ext.norm() > Scalar(0.5)) dir = ext / ext.norm();
    if (!xi_lim.allFinite()) xi_lim = xis[i2];
  }
  const Scalar band = movement + Scalar(kBoundarySnap);
  if (th - th_lo <= band) return Point::sigma_zero(dir);
  if (th_hi - th <= band) return Point::sigma_infinity(dir);
  if (xi_lim.norm() == Scalar(0)) return Point::sigma_zero(dir);
  return Point::interior(xi_lim);
}

}  // namespace oslab

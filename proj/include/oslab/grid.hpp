#pragma once

// Periodic torus grids and complex samples on them. Axis 0 is the slowest
// index of the row-major layout; x_j = -L/2 + j L/N on every axis.

#include "oslab/errors.hpp"
#include "oslab/jet.hpp"

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace oslab {

using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

struct Grid {
  int d = 1;
  double L = 1.0;
  int N = 64;

  Grid() = default;
  Grid(int dim, double period, int points);

  std::int64_t size() const;
  double spacing() const { return L / N; }
  double cell_volume() const { return std::pow(spacing(), d); }
  // Multi-index of a flat position (axis 0 first).
  std::array<int, kMaxDim> unflatten(std::int64_t flat) const;
  std::int64_t flatten(const std::array<int, kMaxDim>& idx) const;
  Point coordinate(std::int64_t flat) const;
  // Signed integer wave numbers k in [-N/2, N/2) of a flat spectral index.
  std::array<int, kMaxDim> wavenumber(std::int64_t flat) const;
  // Physical frequency k / L.
  Point frequency(std::int64_t flat) const;
  double nyquist() const { return 0.5 * N / L; }

  bool operator==(const Grid& o) const { return d == o.d && L == o.L && N == o.N; }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

// Periodic representative of a coordinate in [-L/2, L/2].
inline double wrap(double x, double L) { return x - L * std::nearbyint(x / L); }
inline Point wrap(const Point& x, double L) {
  Point w = x;
  for (Eigen::Index a = 0; a < w.size(); ++a) w(a) = wrap(w(a), L);
  return w;
}

template <class Scalar = double>
class BasicGridFunction {
 public:
  using Value = std::complex<Scalar>;
  using Vector = Eigen::Matrix<Value, Eigen::Dynamic, 1>;

  BasicGridFunction() = default;
  explicit BasicGridFunction(const Grid& g) : grid_(g), values_(Vector::Zero(g.size())) {}
  BasicGridFunction(const Grid& g, Vector values) : grid_(g), values_(std::move(values)) {
    if (values_.size() != g.size()) throw GridMismatch("grid function size does not match its grid");
  }

  template <class F>
  static BasicGridFunction sample(const Grid& g, F&& f) {
    BasicGridFunction out(g);
    for (std::int64_t i = 0; i < g.size(); ++i) out.values_(i) = Value(f(g.coordinate(i)));
    return out;
  }
  static BasicGridFunction constant(const Grid& g, Value c) {
    return BasicGridFunction(g, Vector::Constant(g.size(), c));
  }

  const Grid& grid() const { return grid_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  Value operator[](std::int64_t i) const { return values_(i); }
  Value& operator[](std::int64_t i) { return values_(i); }

  BasicGridFunction conj() const { return BasicGridFunction(grid_, values_.conjugate()); }

  BasicGridFunction& operator+=(const BasicGridFunction& o) {
    require_same(o);
    values_ += o.values_;
    return *this;
  }
  BasicGridFunction& operator-=(const BasicGridFunction& o) {
    require_same(o);
    values_ -= o.values_;
    return *this;
  }
  BasicGridFunction& operator*=(Value c) {
    values_ *= c;
    return *this;
  }
  friend BasicGridFunction operator+(BasicGridFunction a, const BasicGridFunction& b) { return a += b; }
  friend BasicGridFunction operator-(BasicGridFunction a, const BasicGridFunction& b) { return a -= b; }
  friend BasicGridFunction operator*(Value c, BasicGridFunction a) { return a *= c; }
  friend BasicGridFunction operator*(BasicGridFunction a, Value c) { return a *= c; }

  void require_same(const BasicGridFunction& o) const {
    if (grid_ != o.grid_) throw GridMismatch("grid functions live on different grids");
  }

 private:
  Grid grid_;
  Vector values_;
};

using GridFunction = BasicGridFunction<double>;
using Complex = std::complex<double>;

// Pairwise (cascade) summation: deterministic and accurate for long sums.
template <class T>
T pairwise_sum(const T* data, std::int64_t n) {
  if (n <= 16) {
    T acc = T(0);
    for (std::int64_t i = 0; i < n; ++i) acc += data[i];
    return acc;
  }
  const std::int64_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

template <class Derived>
typename Derived::Scalar pairwise_sum(const Eigen::DenseBase<Derived>& v) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> tmp = v;
  return pairwise_sum(tmp.data(), tmp.size());
}

// Pointwise product: the multiplication operator B_phi.
template <class Scalar>
BasicGridFunction<Scalar> multiply_pointwise(const BasicGridFunction<Scalar>& phi,
                                             const BasicGridFunction<Scalar>& u) {
  phi.require_same(u);
  return BasicGridFunction<Scalar>(u.grid(), phi.values().cwiseProduct(u.values()));
}

// int f conj(g) by the rectangle rule on the torus.
template <class Scalar>
std::complex<Scalar> integral_product(const BasicGridFunction<Scalar>& f, const BasicGridFunction<Scalar>& g) {
  f.require_same(g);
  const auto prod = (f.values().array() * g.values().array().conjugate()).matrix().eval();
  return pairwise_sum(prod.data(), prod.size()) * static_cast<Scalar>(f.grid().cell_volume());
}

// int f by the rectangle rule.
template <class Scalar>
std::complex<Scalar> integral(const BasicGridFunction<Scalar>& f) {
  return pairwise_sum(f.values().data(), f.values().size()) * static_cast<Scalar>(f.grid().cell_volume());
}

// Riemann-sum L^p norm, 1 < p < inf.
template <class Scalar>
Scalar lp_norm(const BasicGridFunction<Scalar>& u, double p) {
  using std::pow;
  if (!(p > 1.0) || !std::isfinite(p)) throw UsageError("lp_norm: exponent must lie in (1, inf)");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a = u.values().cwiseAbs();
  if (p == 2.0) {
    a = a.cwiseAbs2();
  } else {
    a = a.array().pow(static_cast<Scalar>(p));
  }
  const Scalar s = pairwise_sum(a.data(), a.size()) * static_cast<Scalar>(u.grid().cell_volume());
  return pow(s, static_cast<Scalar>(1.0 / p));
}

template <class Scalar>
Scalar sup_norm(const BasicGridFunction<Scalar>& u) {
  return u.values().size() ? u.values().cwiseAbs().maxCoeff() : Scalar(0);
}

// In-place multi-dimensional DFT, applied axis by axis. Forward is
// unnormalized; the inverse carries 1/N^d.
template <class Scalar>
void fft_inplace(const Grid& g, Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>& data, bool inverse) {
  Eigen::FFT<Scalar> fft;
  const int N = g.N;
  std::vector<std::complex<Scalar>> line(N), out(N);
  std::int64_t stride = 1;
  for (int axis = g.d - 1; axis >= 0; --axis) {
    const std::int64_t block = stride * N;
    const std::int64_t total = g.size();
    for (std::int64_t outer = 0; outer < total; outer += block) {
      for (std::int64_t inner = 0; inner < stride; ++inner) {
        const std::int64_t base = outer + inner;
        for (int k = 0; k < N; ++k) line[k] = data(base + k * stride);
        if (inverse)
          fft.inv(out, line);
        else
          fft.fwd(out, line);
        for (int k = 0; k < N; ++k) data(base + k * stride) = out[k];
      }
    }
    stride *= N;
  }
}

template <class Scalar>
Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> fft_forward(const BasicGridFunction<Scalar>& u) {
  auto data = u.values();
  fft_inplace(u.grid(), data, false);
  return data;
}

template <class Scalar>
BasicGridFunction<Scalar> fft_inverse(const Grid& g, Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> spectrum) {
  fft_inplace(g, spectrum, true);
  return BasicGridFunction<Scalar>(g, std::move(spectrum));
}

// Band-limited (trigonometric) interpolant of a grid function, evaluable at
// arbitrary points. The Nyquist mode is taken in its real-symmetric (cosine)
// form so that real data interpolates to real values.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const GridFunction& u);
  Complex operator()(const Point& x) const;

 private:
  Grid grid_;
  Eigen::VectorXcd spectrum_;
};

Complex spectral_evaluate(const GridFunction& u, const Point& x);
// Exact translate u(x + shift) of the trigonometric interpolant.
GridFunction spectral_shift(const GridFunction& u, const Point& shift);
// Multiply the spectrum by prod_j (2 pi i xi_j)^{alpha_j}.
GridFunction spectral_derivative(const GridFunction& u, const std::array<int, kMaxDim>& alpha);

// Serialization. CSV rows: i_1,...,i_d,Re,Im. Binary (little-endian):
// uint32 d, float64 L, uint32 N, then N^d pairs of float64 (Re, Im).
void write_csv(const GridFunction& u, const std::string& path);
GridFunction read_csv(const Grid& g, const std::string& path);
void write_binary(const GridFunction& u, const std::string& path);
GridFunction read_binary(const std::string& path);

}  // namespace oslab

#pragma once

// Symbols on the compactified dual space: bounded functions psi on R^d \ {0}
// together with their boundary traces psi_0 (limit along rays at the origin)
// and psi_inf (limit along rays at infinity).

#include "oslab/errors.hpp"
#include "oslab/jet.hpp"

#include <Eigen/Core>

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace oslab {

using Complex = std::complex<double>;
// Frequency vector with inline storage (no heap traffic in hot loops).
using Freq = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using JetPoint = std::array<RealJet, kMaxDim>;
using MultiIndex = std::array<int, kMaxDim>;

enum class SymbolFamily {
  homogeneous,
  schwartz,
  rational,
  sobolev_weight,
  user_sampled,
  custom,
  product,
  sum,
};

std::string to_string(SymbolFamily f);

// Quadratic polynomial restricted to the unit sphere:
// c0 + a.e + e^T B e. Covers constants, coordinate functions and the
// second-order spherical harmonics used by the built-in suites.
struct SpherePolynomial {
  Complex c0 = 0.0;
  Eigen::VectorXcd a;  // empty or size d
  Eigen::MatrixXcd B;  // empty or d x d

  Complex operator()(const Freq& e) const;
};

// Tabulated symbol values loaded from user data.
struct SampledTable {
  int d = 1;
  Eigen::MatrixXd points;  // rows are frequencies
  Eigen::VectorXcd values;
};

class Symbol {
 public:
  using ValueFn = std::function<Complex(const Freq&)>;
  using JetFn = std::function<ComplexJet(const JetPoint&)>;
  using SphereFn = std::function<Complex(const Freq&)>;

  // Built-in families.
  static Symbol constant(int d, Complex c);
  static Symbol homogeneous(int d, SpherePolynomial tilde);
  static Symbol homogeneous(int d, SphereFn tilde, std::string label);
  static Symbol gaussian(int d, double width = 1.0);
  static Symbol rational(int d, MultiIndex alpha, int l, int m);
  static Symbol sobolev_weight(int d, double m, bool reciprocal = false);
  static Symbol sampled(SampledTable table);
  // Arbitrary evaluator; traces are attached only if supplied.
  static Symbol custom(int d, ValueFn fn, std::string label,
                       std::optional<SphereFn> trace0 = std::nullopt,
                       std::optional<SphereFn> trace_inf = std::nullopt,
                       bool schwartz = false);

  int dim() const { return d_; }
  SymbolFamily family() const { return family_; }
  const std::string& label() const { return label_; }
  double dilation() const { return dilation_; }
  bool schwartz() const { return schwartz_; }

  // psi(xi) for xi != 0, including the dilation.
  Complex operator()(const Freq& xi) const;
  // Undilated evaluator: psi(xi) = base(dilation * xi).
  Complex base(const Freq& eta) const;

  bool has_jets() const { return static_cast<bool>(jet_); }
  // Exact derivatives up to order 2 of the undilated evaluator at eta.
  ComplexJet base_jet(const Freq& eta) const;
  // Jet composed with arbitrary (possibly already differentiated) inputs,
  // dilation included. Used to chain composites.
  ComplexJet jet_at(const JetPoint& p) const;

  bool has_trace0() const { return static_cast<bool>(trace0_); }
  bool has_trace_inf() const { return static_cast<bool>(trace_inf_); }
  Complex trace0(const Freq& e) const;
  Complex trace_inf(const Freq& e) const;

  // Value used at the zero frequency of a grid.
  Complex zero_value() const;
  Symbol with_zero_value(Complex c) const;
  Symbol with_label(std::string label) const;

  // psi_0 o pi and psi_inf o pi as homogeneous symbols.
  Symbol trace0_symbol() const;
  Symbol trace_inf_symbol() const;

  Symbol conj() const;
  Symbol scaled(Complex c) const;

  friend Symbol operator*(const Symbol& a, const Symbol& b);
  friend Symbol operator+(const Symbol& a, const Symbol& b);

 private:
  Symbol() = default;
  friend Symbol dilate(const Symbol& s, double a);

  int d_ = 1;
  SymbolFamily family_ = SymbolFamily::custom;
  std::string label_;
  double dilation_ = 1.0;
  bool schwartz_ = false;
  ValueFn base_;
  JetFn jet_;
  SphereFn trace0_;
  SphereFn trace_inf_;
  std::optional<Complex> zero_override_;
};

// psi_a(xi) = psi(a xi).
Symbol dilate(const Symbol& s, double a);

// xi -> psi(xi - shift) for Schwartz psi; the result is again Schwartz,
// with trace0 the constant psi(-shift).
Symbol translate(const Symbol& s, const Freq& shift);

// Chart representatives near the two boundary spheres:
// chart0(s, eta) = psi(s eta), chart_inf(s, eta) = psi(eta / s), s > 0.
Complex chart0(const Symbol& psi, double s, const Freq& eta);
Complex chart_inf(const Symbol& psi, double s, const Freq& eta);

// Unit directions used for sampling S^{d-1}: +-1 in d = 1, equiangular in
// d = 2, a Fibonacci lattice in d = 3.
std::vector<Freq> sphere_directions(int d, int count);

struct TraceReport {
  std::vector<Freq> directions;
  std::vector<double> radii_small;  // decreasing
  std::vector<double> radii_large;  // increasing
  std::vector<Complex> trace0;      // per direction, value on the smallest shell
  std::vector<Complex> trace_inf;   // per direction, value on the largest shell
  std::vector<double> residuals0;   // per shell step, max over directions
  std::vector<double> residuals_inf;
  bool has_trace0 = false;
  bool has_trace_inf = false;
  double residual0() const { return residuals0.empty() ? 0.0 : residuals0.back(); }
  double residual_inf() const { return residuals_inf.empty() ? 0.0 : residuals_inf.back(); }
};

// Shells t = 2^{-k} and t = 2^{k}, k = 0..max_exponent.
TraceReport boundary_traces(const Symbol& s, int n_dirs, int max_exponent = 12);

struct MihlinShell {
  double radius;  // 2^j times the lattice scale
  double value;   // max of |xi|^{|alpha|} |d^alpha psi(xi)| sampled in the shell
};

struct MihlinReport {
  int order = 0;
  double constant = 0.0;
  std::vector<MihlinShell> per_shell;
  // Largest spread (max - min) of a single (direction, alpha) sample along
  // its ray, across all shells. Zero for degree-0 homogeneous symbols.
  double ray_spread = 0.0;
  bool exact_derivatives = false;
  std::string grid_spec;
};

struct MihlinLattice {
  int j_min = -8;
  int j_max = 8;
  int dirs = 64;  // ignored in d = 1
  int sub_radii = 8;  // log-uniform radii per dyadic shell
  double scale = 1.0;  // lattice radii are scale * 2^{j + q/sub_radii}
};

MihlinReport mihlin_estimate(const Symbol& s, int order, const MihlinLattice& lattice = {});

// Load a sampled symbol from CSV rows "xi_1,...,xi_d,Re,Im" (an optional
// non-numeric header line is skipped).
SampledTable load_sampled_table(const std::string& path, int d);

}  // namespace oslab

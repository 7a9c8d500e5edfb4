#pragma once

// Semiclassical pseudodifferential operators in t-quantisation,
//   Op_t(a) u(x) = int int e^{2 pi i (x - y).xi} a(t x + (1 - t) y, omega xi) u(y) dy dxi,
// and the Wigner transform
//   W_t(u, v)(x, xi) = int e^{-2 pi i y.xi} u(x + omega t y) conj(v(x - omega (1 - t) y)) dy
// on the periodic grid.
//
// Discretization. Displacements r_m = m L/N run over the signed grid range
// [-L/2, L/2) and frequencies over omega k / L. Both sides use the kernel
//   a~(z, r_m) = L^{-d} sum_k e^{-2 pi i r_m.k/L} a(z, omega k/L),
// so that
//   Op_t(a) u(x_i) = h^d sum_m a~(x_i + (1 - t) r_m, r_m) u(x_i + r_m),
//   W(x_j, omega k/L) = (h/omega)^d sum_m e^{-2 pi i r_m.k/L} u(x_j + t r_m) conj(v(x_j - (1 - t) r_m)),
// and <W, a> = sum_{j,k} h^d (omega/L)^d W a. Off-grid translates of u and
// v are exact spectral shifts. The two pairings then differ only by the
// trapezoidal error of a shifted x-sum, which is spectrally small for
// resolved data.

#include "oslab/grid.hpp"
#include "oslab/oschd.hpp"
#include "oslab/seqgen.hpp"
#include "oslab/symbol.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace oslab {

struct QuantParams {
  double t = 0.5;  // 1/2 Weyl, 1 Kohn-Nirenberg
  double omega = 1.0;

  void validate() const;
};

class PhaseSymbol {
 public:
  enum class Structure { separable, x_only, xi_only, general };
  using SpaceFn = std::function<Complex(const Point&)>;
  using PhaseFn = std::function<Complex(const Point&, const Freq&)>;

  // phi(x) psi(xi). The x-part is evaluated periodically on the torus.
  static PhaseSymbol separable(SpaceFn phi, Symbol psi, std::string label = "separable");
  static PhaseSymbol x_only(int d, SpaceFn phi, std::string label = "x-only");
  static PhaseSymbol xi_only(Symbol psi);
  static PhaseSymbol general(int d, PhaseFn a, bool schwartz, std::string label = "general");

  // Evaluation; at xi = 0 the xi-part of separable and xi-only symbols
  // takes the symbol's zero value, matching the multiplier engine.
  Complex operator()(const Point& x, const Freq& xi) const;

  Structure structure() const { return structure_; }
  int dim() const { return d_; }
  bool schwartz() const { return schwartz_; }
  const std::string& label() const { return label_; }
  // Frequency scale on which the symbol varies; enters the resolution guard.
  double bandwidth() const { return bandwidth_; }
  PhaseSymbol with_bandwidth(double b) const;

  const SpaceFn& x_part() const { return phi_; }
  const Symbol& xi_part() const { return psi_; }

  PhaseSymbol scaled(Complex c) const;
  friend PhaseSymbol operator+(const PhaseSymbol& a, const PhaseSymbol& b);

 private:
  PhaseSymbol() = default;
  Structure structure_ = Structure::general;
  int d_ = 1;
  bool schwartz_ = false;
  std::string label_;
  double bandwidth_ = 1.0;
  SpaceFn phi_;
  Symbol psi_ = Symbol::constant(1, 1.0);
  PhaseFn general_;
};

// Largest N^{2d} accepted by the paths that touch every (x, r) pair.
inline constexpr std::int64_t kPhaseSpaceLimit = std::int64_t(1) << 22;

// Op_t^{(omega)}(a) u. xi-only symbols reduce to apply_multiplier and
// x-only symbols to pointwise multiplication; separable symbols use
// phi A u (t = 1), A(phi u) (t = 0) or the direct displacement sum; general
// symbols build the full discretized kernel.
GridFunction op_t_apply(const PhaseSymbol& a, const QuantParams& q, const GridFunction& u);

struct WignerTransform {
  Grid grid;
  QuantParams q;
  // Rows: flat x index. Columns: FFT-ordered spectral index k, at the
  // frequency omega * grid.frequency(k).
  Eigen::MatrixXcd values;

  Freq xi(std::int64_t col) const { return q.omega * grid.frequency(col); }
  double phase_cell() const;  // h^d (omega/L)^d
  // sum_k W(x, xi_k) (omega/L)^d; equals u conj(v) on the grid.
  GridFunction xi_marginal() const;
  // Bilinear quadrature <W, a>.
  Complex pair(const PhaseSymbol& a) const;
};

WignerTransform wigner(const GridFunction& u, const GridFunction& v, const QuantParams& q);

struct PairingIdentity {
  Complex wigner_side = 0.0;  // <W_t(u, v), a>
  Complex operator_side = 0.0;  // <Op_t(a) u, conj(v)>
  double gap = 0.0;
  double scale = 0.0;  // ||u||_2 ||v||_2 max |a| over the sampled phase space
  double relative() const { return scale > 0.0 ? gap / scale : gap; }
};

PairingIdentity pairing_identity(const GridFunction& u, const GridFunction& v, const QuantParams& q,
                                 const PhaseSymbol& a);
double wigner_pairing_gap(const GridFunction& u, const GridFunction& v, const QuantParams& q, const PhaseSymbol& a);

struct NormProfile {
  std::vector<double> omegas;
  std::vector<double> norms;
  double slope = 0.0;  // least-squares slope of log norm against log omega; NaN if undefined
  bool identically_zero = false;
};

// ||Op_t(a) u - Op_s(a) u||_p over omega.
NormProfile quantisation_gap(const PhaseSymbol& a, double t, double s, const std::vector<double>& omegas,
                             const GridFunction& u, double p = 2.0);

// ||[Op_t(a), Op_t(b)] u||_p over omega.
NormProfile commutator_profile(const PhaseSymbol& a, const PhaseSymbol& b, double t,
                               const std::vector<double>& omegas, const GridFunction& u, double p = 2.0);

struct SeminormSample {
  int x_order;   // power of the phase-space coordinate
  int xi_order;  // derivative order
  double value;  // max over samples and coordinate axes
};

// Sampled stand-ins for the Schwartz seminorms sup |z^alpha d^beta a| with
// |alpha|, |beta| <= 2, along the 2d phase-space coordinate axes, over the
// torus grid times a frequency box [-xi_radius, xi_radius]^d. Central
// differences with step 1e-3; metadata only.
std::vector<SeminormSample> sampled_seminorms(const PhaseSymbol& a, const Grid& g, double xi_radius = 8.0,
                                              int xi_points = 33);

struct SemiclassicalTrace {
  PairingTrace trace;
  // psi(0) int phi1 u conj(phi2 v) for the weak limits u, v, reported when
  // the inputs are not weakly null.
  std::optional<Complex> corrector;
};

// The one-scale pairing restricted to Schwartz psi (DomainError otherwise).
SemiclassicalTrace semiclassical_pairing(const SequenceFamily& u_fam, const SequenceFamily& v_fam,
                                         const Schedule& omega, const GridFunction& phi1,
                                         const GridFunction& phi2, const Symbol& psi,
                                         const std::vector<long long>& n_schedule, const Grid& g,
                                         const PairingOptions& opt = {});

// CSV rows x_1..x_d, k_1..k_d (signed wave numbers), re, im.
void write_wigner_csv(const WignerTransform& w, const std::string& path);

}  // namespace oslab

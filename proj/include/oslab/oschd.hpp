#pragma once

// One-scale pairings I_n = <A_{psi(omega_n .)}(phi1 u_n), conj(phi2 v_n)>,
// their limits, and the closed-form limits of the canonical families.

#include "oslab/fourmult.hpp"
#include "oslab/seqgen.hpp"
#include "oslab/symbol.hpp"

#include <optional>
#include <string>
#include <vector>

namespace oslab {

enum class RatioKind { zero, finite, infinity, non_pure };

struct RatioClass {
  RatioKind kind = RatioKind::finite;
  double c = 1.0;                     // value for finite
  std::vector<double> accumulation;   // cluster centres for non_pure
  std::vector<double> ratios;         // omega_n / eps_n over the schedule

  static RatioClass zero() { return {RatioKind::zero, 0.0, {}, {}}; }
  static RatioClass finite(double c) { return {RatioKind::finite, c, {}, {}}; }
  static RatioClass infinity() { return {RatioKind::infinity, 0.0, {}, {}}; }
  std::string str() const;
};

// Classify lim omega_n / eps_n over the tail of the schedule.
//
// The tail is the last max(4, len/2) entries. If the ratios are monotone
// there, the least-squares slope of log ratio against log n decides: >= 0.05
// diverges, <= -0.05 tends to zero, anything flatter is a finite limit (the
// last ratio). Non-monotone tails are finite when they vary by at most 10%,
// otherwise non-pure with the 10%-separated clusters as accumulation points.
RatioClass purity_scan(const Schedule& omega, const Schedule& eps, const std::vector<long long>& n_schedule);

struct PairingOptions {
  double tolerance = 1e-3;     // convergence: error estimate < tolerance * max(1, |I|)
  int extrapolation_points = 4;  // trailing terms used by the polynomial extrapolation
};

struct PairingTrace {
  std::vector<long long> n;
  std::vector<double> omega;
  std::vector<double> epsilon;
  std::vector<Complex> I;
  std::vector<double> h;             // extrapolation variable per n (tends to 0)
  std::vector<double> cauchy_gaps;   // |I_j - I_{j-1}|, NaN for the first entry
  std::vector<double> adjoint_gaps;  // per n, absolute
  std::vector<double> norm_products; // ||phi1 u_n||_2 ||phi2 v_n||_2 per n
  Complex extrapolated = 0.0;        // accelerated limit, always reported
  double extrapolation_error = 0.0;  // change when the oldest extrapolation point is dropped
  std::string extrapolation_method;
  std::optional<Complex> limit_estimate;  // present only when converged
  std::optional<Complex> reference;
  RatioClass ratio;
  double scale = 0.0;  // pairing scale: max over n of the norm products times sup |psi|

  Complex value() const { return limit_estimate.value_or(extrapolated); }
  // |value - reference| / max(|reference|, tiny * scale); NaN without reference.
  double relative_error() const;
  double max_adjoint_gap_relative() const;
};

// Iterated Aitken extrapolation of a complex sequence. Returns the last term
// of the deepest transform available (the raw last term for < 3 values).
Complex aitken_limit(const std::vector<Complex>& seq, int depth, Complex* last_gap = nullptr);

struct Extrapolation {
  Complex value = 0.0;
  double error = 0.0;
  std::string method;
};

// Limit of seq as h -> 0. With a strictly decreasing positive h the trailing
// `points` terms are fitted by a polynomial in h (Neville) and evaluated at
// 0; the error estimate is the change when one point fewer is used. Without
// a usable h, iterated Aitken (two passes) is applied instead.
Extrapolation extrapolate_limit(const std::vector<double>& h, const std::vector<Complex>& seq, int points = 4);

// Natural extrapolation variable of a pairing: omega/eps when the ratio
// tends to 0, eps/omega when it diverges, eps for a finite ratio.
std::vector<double> extrapolation_variable(const RatioClass& rc, const std::vector<double>& omega,
                                           const std::vector<double>& eps);

// Decide convergence and attach limit_estimate: the last three Cauchy gaps
// must not increase and the extrapolation error must be below
// tolerance * max(1, |limit|). Non-pure traces never converge.
void finalize_trace(PairingTrace& t, const PairingOptions& opt = {});

PairingTrace pairing(const SequenceFamily& u_fam, const SequenceFamily& v_fam, const Schedule& omega,
                     const GridFunction& phi1, const GridFunction& phi2, const Symbol& s,
                     const std::vector<long long>& n_schedule, const Grid& g, const PairingOptions& opt = {});

// Closed-form limits. Concentration: phi1(z) conj(phi2(z)) <A_{psi_c} u, conj v>
// with psi_c = psi_0 o pi, psi(c .) or psi_inf o pi. Oscillation (matched
// modulations): int u conj(v) phi1 conj(phi2) times psi_0(k/|k|), psi(c k) or
// psi_inf(k/|k|). The canonical dual partner gives |u|^p for u conj(v).
Complex closed_form_reference(const SequenceFamily& u_fam, const SequenceFamily& v_fam, const RatioClass& c,
                              const Symbol& s, const GridFunction& phi1, const GridFunction& phi2, const Grid& g);

struct PushforwardCheck {
  PairingTrace one_scale;  // homogeneous symbol with the given omega schedule
  PairingTrace h_reference;  // same symbol with omega = 1
  double gap = 0.0;  // max over n of |I_n - I_n^ref|
};

PushforwardCheck pi_pushforward_check(const SequenceFamily& u_fam, const SequenceFamily& v_fam,
                                      const Schedule& omega, const GridFunction& phi1, const GridFunction& phi2,
                                      const Symbol& homogeneous_symbol, const std::vector<long long>& n_schedule,
                                      const Grid& g);

// int A_{psi_0 o pi}(phi1 u) conj(phi2 v).
Complex corrector_term(const GridFunction& u_limit, const GridFunction& v_limit, const GridFunction& phi1,
                       const GridFunction& phi2, const Symbol& s);

struct TestBank {
  std::vector<GridFunction> phis;
  std::vector<Symbol> symbols;
};

struct CompactnessVerdict {
  std::vector<PairingTrace> traces;             // phi-major, symbol-minor
  std::vector<std::vector<double>> norms;       // per phi, ||phi u_n||_p over n
  std::vector<double> norm_limits;              // extrapolated per phi
  double max_pairing_limit = 0.0;
  double max_pairing_value = 0.0;
  double max_norm = 0.0;
  double max_norm_limit = 0.0;
  bool pairing_zero = false;
  bool norm_zero = false;
  bool agree() const { return pairing_zero == norm_zero; }
};

// Pair u_n with its canonical dual over a bank of (phi, psi) and compare
// with the direct norm profile ||phi u_n||_p. Each verdict says "zero" when
// its extrapolated limit is below 1e-2 of the largest value seen.
CompactnessVerdict strong_compactness_probe(const SequenceFamily& u_fam, const Grid& g, const Schedule& omega,
                                            const TestBank& bank, const std::vector<long long>& n_schedule);

// CSV with columns n, omega_n, epsilon_n, re_I, im_I, cauchy_gap, adjoint_gap.
void write_trace_csv(const PairingTrace& t, const std::string& path);

}  // namespace oslab

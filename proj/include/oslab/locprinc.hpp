#pragma once

// Localisation principle for scaled divergence-form systems
//   sum_{|alpha| <= m} eps_n^{|alpha|} d_alpha (A^alpha u_n) = f_n
// with fixed q x r coefficient fields: right-hand-side compactness tests,
// the localisation symbols p_c, and residual checks of p_c nu = 0.

#include "oslab/grid.hpp"
#include "oslab/oschd.hpp"
#include "oslab/seqgen.hpp"
#include "oslab/symbol.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace oslab {

using Coefficient = std::function<Complex(const Point&)>;

struct SystemTerm {
  MultiIndex alpha{};
  std::vector<Coefficient> entries;  // row-major q x r; empty entries are zero
};

struct PdeSystem {
  int d = 1;
  int m = 1;
  int q = 1;
  int r = 1;
  std::vector<SystemTerm> terms;
  Schedule epsilon = Schedule::power(1.0, -1.0);
  double p = 2.0;

  // Scalar equation u + eps a d_axis u (the model first-order problem).
  static PdeSystem first_order_scalar(int d, int axis, Complex a, Schedule eps, double p);

  void validate() const;
  const SystemTerm* find(const MultiIndex& alpha) const;
  // A^alpha(x) as a q x r matrix (zero when the term is absent).
  Eigen::MatrixXcd coefficient(const MultiIndex& alpha, const Point& x) const;
};

int order(const MultiIndex& alpha, int d);
std::string to_string(const MultiIndex& alpha, int d);

// f_n = sum_alpha eps_n^{|alpha|} d_alpha (A^alpha u_n) with spectral derivatives.
std::vector<GridFunction> compute_rhs(const PdeSystem& sys, const std::vector<GridFunction>& u, long long n);

struct CompactnessProfile {
  std::vector<long long> n;
  std::vector<double> norms;
  bool decreasing = false;
  bool compact = false;  // decreasing and final < 1e-2 initial
  double ratio() const { return norms.empty() || norms.front() == 0.0 ? 0.0 : norms.back() / norms.front(); }
};

CompactnessProfile classify_profile(std::vector<long long> n, std::vector<double> norms);

// ||A_{1/(1+|eps_n xi|^m)} (phi f_n)||_p per n (phi = 1 when null). Vector
// terms combine their components in l^p.
CompactnessProfile eps_compactness_norms(const std::vector<GridFunction>& f_terms, const std::vector<long long>& n,
                                         const Schedule& eps, int m, double p, const GridFunction* phi = nullptr);
CompactnessProfile eps_compactness_norms(const std::vector<std::vector<GridFunction>>& f_terms,
                                         const std::vector<long long>& n, const Schedule& eps, int m, double p,
                                         const GridFunction* phi = nullptr);

// ||A_{(1+|xi|^2)^{-m/2}} f||_p, the smooth-weight W^{-m,p} norm.
double smooth_negative_sobolev_norm(const GridFunction& f, int m, double p);

struct RescaleReport {
  CompactnessProfile primary;                // eps_n^k f_n tested at eps_n
  std::optional<CompactnessProfile> second;  // eps_n^k f_n tested at omega_n
  bool agree() const { return !second || second->compact == primary.compact; }
};

// Tests (eps_n^k f_n) for (eps_n)-compactness and, when omega is given,
// repeats the test at the second schedule.
RescaleReport rescale_check(const std::vector<GridFunction>& f_terms, const std::vector<long long>& n,
                            const Schedule& eps, int k, int m, double p,
                            const std::optional<Schedule>& omega = std::nullopt);

struct LocSymbol {
  RatioClass c;
  const PdeSystem* system = nullptr;  // not owned; must outlive the symbol
  // Scalar weights kappa_alpha of the xi-factor xi^alpha / (1 + |xi|^m).
  std::vector<std::pair<MultiIndex, Complex>> weights;

  Eigen::MatrixXcd operator()(const Point& x, const Freq& xi) const;
  std::string case_tag() const;
};

// p_0 = sum_{|alpha| = m} (2 pi i)^m xi^alpha/(1+|xi|^m) A^alpha,
// p_c = sum_{|alpha| <= m} (2 pi i / c)^{|alpha|} xi^alpha/(1+|xi|^m) A^alpha,
// p_inf = A^0 / (1 + |xi|^m). Non-pure classes are rejected.
LocSymbol build_pc(const PdeSystem& sys, const RatioClass& c);

struct ResidualRow {
  std::string case_tag;
  std::string alpha;  // multi-index or "sum"
  int phi_id = 0;
  int psi_id = 0;
  int k = 0;
  int l = 0;
  long long n = 0;  // -1 marks the extrapolated limit
  Complex value = 0.0;
};

struct ResidualCell {
  int phi_id = 0;
  int psi_id = 0;
  int k = 0;
  int l = 0;
  std::vector<Complex> per_n;  // sum over alpha
  Complex limit = 0.0;         // sum of the per-alpha limits
  double scale = 0.0;          // sum of the per-alpha pairing scales
  bool converged = true;
};

struct ResidualTable {
  RatioClass ratio;
  std::string case_tag;
  std::vector<long long> n;
  bool applicable = true;
  std::string inapplicable_reason;
  std::vector<CompactnessProfile> rhs_profiles;  // per phi
  std::vector<ResidualCell> cells;
  std::vector<ResidualRow> rows;
  std::vector<ResidualTable> per_class;  // non-pure schedules: one table per accumulation class

  double max_relative() const;  // max over cells of |limit| / scale
};

// Residuals of p_c nu = 0 along the pairing chain
//   sum_alpha kappa_alpha lim_n <A_{psi psi^{m,alpha}(omega_n .)}(phi A^alpha u_n), conj(phi v_n)>
// for every (phi, psi) of the bank and every entry (k, l). The right-hand
// side's local compactness is checked first; on failure the table is still
// filled but flagged "localisation inapplicable".
ResidualTable localisation_residual(const std::vector<SequenceFamily>& u_fam,
                                    const std::vector<SequenceFamily>& v_fam, const PdeSystem& sys,
                                    const Schedule& omega, const TestBank& bank,
                                    const std::vector<long long>& n_schedule, const Grid& g);

void write_residual_csv(const ResidualTable& t, const std::string& path);

// Smallest value over sampled (x, xi) of max(|p|, |q|) (Frobenius norms),
// refined by a local pattern search in xi. xi runs over log-spaced radii
// up to 1e6 and sphere directions. A positive margin means no common zero.
struct CommonZero {
  double margin = 0.0;
  Point x;
  Freq xi;
};
CommonZero common_zero_search(const LocSymbol& a, const LocSymbol& b, const Grid& g);

struct WorkedExampleVerdict {
  std::vector<long long> n;
  std::string status;  // "pass", "fail" or "inconclusive"
  // (a) right-hand sides
  std::vector<CompactnessProfile> f_profiles;  // per phi
  std::vector<CompactnessProfile> g_profiles;
  bool rhs_compact = false;
  // (b) max over phi of |<u_n conj(v_n), phi>|
  std::vector<double> product_pairings;
  bool products_vanish = false;
  // (c) localisation residuals for both equations
  ResidualTable residual_u;
  ResidualTable residual_v;
  bool residuals_small = false;
  CommonZero common_zero;
  bool mu_zero_implied = false;  // the two symbols share no zero
  std::vector<std::string> notes;
};

struct WorkedExampleOptions {
  Complex a1 = Complex(0.0, 0.5 / M_PI);  // i / (2 pi): cancels the oscillating part of u_n
  Complex a2 = Complex(0.0, 0.5 / M_PI);
  double product_ratio = 0.05;  // (b): last / first pairing maximum
  double residual_ratio = 1e-2;  // (c): |residual| / pairing scale
};

// The two-dimensional example: u_n = u1(x1) e^{2 pi i n x1} + n^{2/p} u2(n^2 x2),
// v_n = n^{2/p'} v1(n^2 x1) + v2(x2) e^{2 pi i n x2}, eps_n = omega_n = 1/n,
// equations u + eps a1 d_1 u = f and v + eps a2 d_2 v = g.
WorkedExampleVerdict worked_example_53(double p, const Profile& u1, const Profile& u2, const Profile& v1,
                                       const Profile& v2, const std::vector<long long>& n_schedule, const Grid& g,
                                       const TestBank& bank, const WorkedExampleOptions& opt = {});

// Default bank on a grid: two bump cutoffs and two symbols.
TestBank default_localisation_bank(const Grid& g);

}  // namespace oslab

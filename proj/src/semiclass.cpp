#include "oslab/semiclass.hpp"

#include "oslab/fourmult.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace oslab {

void QuantParams::validate() const {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("quantisation: t must lie in [0, 1]");
  if (!(omega > 0.0 && omega <= 1.0)) throw DomainError("quantisation: omega must lie in (0, 1]");
}

// ---------------------------------------------------------------- PhaseSymbol

PhaseSymbol PhaseSymbol::separable(SpaceFn phi, Symbol psi, std::string label) {
  if (!phi) throw UsageError("separable phase symbol needs an x-part");
  PhaseSymbol a;
  a.structure_ = Structure::separable;
  a.d_ = psi.dim();
  a.schwartz_ = psi.schwartz();
  a.label_ = std::move(label);
  a.phi_ = std::move(phi);
  a.psi_ = std::move(psi);
  return a;
}

PhaseSymbol PhaseSymbol::x_only(int d, SpaceFn phi, std::string label) {
  if (!phi) throw UsageError("x-only phase symbol needs an x-part");
  if (d < 1 || d > kMaxDim) throw DomainError("phase symbol: dimension must lie in 1..3");
  PhaseSymbol a;
  a.structure_ = Structure::x_only;
  a.d_ = d;
  a.label_ = std::move(label);
  a.phi_ = std::move(phi);
  a.psi_ = Symbol::constant(d, 1.0);
  return a;
}

PhaseSymbol PhaseSymbol::xi_only(Symbol psi) {
  PhaseSymbol a;
  a.structure_ = Structure::xi_only;
  a.d_ = psi.dim();
  a.schwartz_ = psi.schwartz();
  a.label_ = psi.label();
  a.psi_ = std::move(psi);
  return a;
}

PhaseSymbol PhaseSymbol::general(int d, PhaseFn fn, bool schwartz, std::string label) {
  if (!fn) throw UsageError("general phase symbol needs an evaluator");
  if (d < 1 || d > kMaxDim) throw DomainError("phase symbol: dimension must lie in 1..3");
  PhaseSymbol a;
  a.structure_ = Structure::general;
  a.d_ = d;
  a.schwartz_ = schwartz;
  a.label_ = std::move(label);
  a.general_ = std::move(fn);
  return a;
}

Complex PhaseSymbol::operator()(const Point& x, const Freq& xi) const {
  const auto xi_value = [&]() { return xi.squaredNorm() == 0.0 ? psi_.zero_value() : psi_(xi); };
  switch (structure_) {
    case Structure::separable: return phi_(x) * xi_value();
    case Structure::x_only: return phi_(x);
    case Structure::xi_only: return xi_value();
    case Structure::general: return general_(x, xi);
  }
  return 0.0;
}

PhaseSymbol PhaseSymbol::with_bandwidth(double b) const {
  if (!(b > 0.0)) throw DomainError("phase symbol: bandwidth must be positive");
  PhaseSymbol a = *this;
  a.bandwidth_ = b;
  return a;
}

PhaseSymbol PhaseSymbol::scaled(Complex c) const {
  PhaseSymbol a = *this;
  switch (structure_) {
    case Structure::separable:
    case Structure::xi_only: a.psi_ = psi_.scaled(c); break;
    case Structure::x_only: {
      SpaceFn f = phi_;
      a.phi_ = [f, c](const Point& x) { return c * f(x); };
      break;
    }
    case Structure::general: {
      PhaseFn f = general_;
      a.general_ = [f, c](const Point& x, const Freq& xi) { return c * f(x, xi); };
      break;
    }
  }
  return a;
}

PhaseSymbol operator+(const PhaseSymbol& a, const PhaseSymbol& b) {
  if (a.dim() != b.dim()) throw DomainError("phase symbol sum: dimensions differ");
  PhaseSymbol s = PhaseSymbol::general(
      a.dim(), [a, b](const Point& x, const Freq& xi) { return a(x, xi) + b(x, xi); },
      a.schwartz() && b.schwartz(), a.label() + " + " + b.label());
  s.bandwidth_ = std::max(a.bandwidth(), b.bandwidth());
  return s;
}

// ---------------------------------------------------------------- Op_t

namespace {

// Flat index of (i + p) mod N on every axis.
struct IndexAdder {
  explicit IndexAdder(const Grid& g) : g(g), idx(g.size()) {
    for (std::int64_t i = 0; i < g.size(); ++i) idx[i] = g.unflatten(i);
  }
  std::int64_t operator()(std::int64_t i, std::int64_t p) const {
    std::array<int, kMaxDim> s{};
    for (int a = 0; a < g.d; ++a) s[a] = (idx[i][a] + idx[p][a]) % g.N;
    return g.flatten(s);
  }
  const Grid& g;
  std::vector<std::array<int, kMaxDim>> idx;
};

// Signed displacement r_p = h * (signed wave number of position p).
Point displacement(const Grid& g, std::int64_t p) {
  const auto k = g.wavenumber(p);
  Point r(g.d);
  for (int a = 0; a < g.d; ++a) r(a) = g.spacing() * k[a];
  return r;
}

void require_resolved(const PhaseSymbol& a, const QuantParams& q, const Grid& g) {
  if (q.omega < 4.0 * g.spacing() * a.bandwidth()) {
    throw DomainError("op_t_apply: omega = " + std::to_string(q.omega) +
                      " is below 4 (L/N) * bandwidth; refine the grid");
  }
}

void require_phase_space(const Grid& g, std::int64_t limit, const char* what) {
  const std::int64_t n = g.size();
  if (n > limit / n) {
    throw CostGuard(std::string(what) + ": N^{2d} = " + std::to_string(static_cast<double>(n) * n) +
                    " exceeds the phase-space limit " + std::to_string(limit));
  }
}

GridFunction separable_direct(const PhaseSymbol& a, const QuantParams& q, const GridFunction& u) {
  const Grid& g = u.grid();
  require_phase_space(g, kPhaseSpaceLimit * 16, "op_t_apply (separable)");
  const Eigen::VectorXcd samples = multiplier_samples(a.xi_part(), q.omega, g);
  Eigen::VectorXcd w = samples;
  fft_inplace(g, w, false);
  w /= static_cast<double>(g.size());
  const IndexAdder add(g);
  GridFunction out(g);
  std::vector<Complex> terms(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const Point x = g.coordinate(i);
    for (std::int64_t p = 0; p < g.size(); ++p) {
      const Point z = wrap(Point(x + (1.0 - q.t) * displacement(g, p)), g.L);
      terms[p] = a.x_part()(z) * w(p) * u[add(i, p)];
    }
    out[i] = pairwise_sum(terms.data(), g.size());
  }
  return out;
}

GridFunction general_kernel(const PhaseSymbol& a, const QuantParams& q, const GridFunction& u) {
  const Grid& g = u.grid();
  require_phase_space(g, kPhaseSpaceLimit, "op_t_apply (general)");
  const std::int64_t n = g.size();
  // K(j, p) = h^d a~(x_j, r_p)
  Eigen::MatrixXcd K(n, n);
  Eigen::VectorXcd row(n);
  for (std::int64_t j = 0; j < n; ++j) {
    const Point x = g.coordinate(j);
    for (std::int64_t k = 0; k < n; ++k) row(k) = a(x, Freq(q.omega * g.frequency(k)));
    fft_inplace(g, row, false);
    K.row(j) = row.transpose() / static_cast<double>(n);
  }
  const IndexAdder add(g);
  GridFunction out(g);
  for (std::int64_t p = 0; p < n; ++p) {
    const GridFunction shifted =
        spectral_shift(GridFunction(g, K.col(p)), Point((1.0 - q.t) * displacement(g, p)));
    for (std::int64_t i = 0; i < n; ++i) out[i] += shifted[i] * u[add(i, p)];
  }
  return out;
}

}  // namespace

GridFunction op_t_apply(const PhaseSymbol& a, const QuantParams& q, const GridFunction& u) {
  q.validate();
  const Grid& g = u.grid();
  if (a.dim() != g.d) throw DomainError("op_t_apply: symbol and grid dimensions differ");
  switch (a.structure()) {
    case PhaseSymbol::Structure::xi_only: return apply_multiplier(a.xi_part(), q.omega, u);
    case PhaseSymbol::Structure::x_only: {
      const GridFunction phi = GridFunction::sample(g, [&](const Point& x) { return a.x_part()(x); });
      return multiply_pointwise(phi, u);
    }
    case PhaseSymbol::Structure::separable: {
      require_resolved(a, q, g);
      if (q.t == 1.0 || q.t == 0.0) {
        const GridFunction phi = GridFunction::sample(g, [&](const Point& x) { return a.x_part()(x); });
        if (q.t == 1.0) return multiply_pointwise(phi, apply_multiplier(a.xi_part(), q.omega, u));
        return apply_multiplier(a.xi_part(), q.omega, multiply_pointwise(phi, u));
      }
      return separable_direct(a, q, u);
    }
    case PhaseSymbol::Structure::general:
      require_resolved(a, q, g);
      return general_kernel(a, q, u);
  }
  return u;
}

// ---------------------------------------------------------------- Wigner

double WignerTransform::phase_cell() const {
  return std::pow(grid.spacing() * q.omega / grid.L, grid.d);
}

GridFunction WignerTransform::xi_marginal() const {
  GridFunction m(grid);
  const double cell = std::pow(q.omega / grid.L, grid.d);
  for (std::int64_t j = 0; j < grid.size(); ++j) {
    const Eigen::VectorXcd r = values.row(j).transpose();
    m[j] = pairwise_sum(r.data(), r.size()) * cell;
  }
  return m;
}

Complex WignerTransform::pair(const PhaseSymbol& a) const {
  const std::int64_t n = grid.size();
  std::vector<Complex> rows(n), terms(n);
  for (std::int64_t j = 0; j < n; ++j) {
    const Point x = grid.coordinate(j);
    for (std::int64_t k = 0; k < n; ++k) terms[k] = values(j, k) * a(x, xi(k));
    rows[j] = pairwise_sum(terms.data(), n);
  }
  return pairwise_sum(rows.data(), n) * phase_cell();
}

WignerTransform wigner(const GridFunction& u, const GridFunction& v, const QuantParams& q) {
  q.validate();
  u.require_same(v);
  const Grid& g = u.grid();
  require_phase_space(g, kPhaseSpaceLimit, "wigner");
  const std::int64_t n = g.size();
  WignerTransform w;
  w.grid = g;
  w.q = q;
  w.values.resize(n, n);
  for (std::int64_t p = 0; p < n; ++p) {
    const Point r = displacement(g, p);
    const GridFunction us = spectral_shift(u, Point(q.t * r));
    const GridFunction vs = spectral_shift(v, Point(-(1.0 - q.t) * r));
    w.values.col(p) = us.values().cwiseProduct(vs.values().conjugate());
  }
  const double norm = std::pow(g.spacing() / q.omega, g.d);
  Eigen::VectorXcd row(n);
  for (std::int64_t j = 0; j < n; ++j) {
    row = w.values.row(j).transpose();
    fft_inplace(g, row, false);
    w.values.row(j) = row.transpose() * norm;
  }
  return w;
}

PairingIdentity pairing_identity(const GridFunction& u, const GridFunction& v, const QuantParams& q,
                                 const PhaseSymbol& a) {
  PairingIdentity out;
  const WignerTransform w = wigner(u, v, q);
  out.wigner_side = w.pair(a);
  out.operator_side = integral_product(op_t_apply(a, q, u), v);
  out.gap = std::abs(out.wigner_side - out.operator_side);
  double amax = 0.0;
  for (std::int64_t j = 0; j < w.grid.size(); ++j) {
    const Point x = w.grid.coordinate(j);
    for (std::int64_t k = 0; k < w.grid.size(); ++k) amax = std::max(amax, std::abs(a(x, w.xi(k))));
  }
  out.scale = lp_norm(u, 2.0) * lp_norm(v, 2.0) * amax;
  return out;
}

double wigner_pairing_gap(const GridFunction& u, const GridFunction& v, const QuantParams& q, const PhaseSymbol& a) {
  return pairing_identity(u, v, q, a).gap;
}

// ---------------------------------------------------------------- profiles

namespace {

void fit_slope(NormProfile& prof) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < prof.norms.size(); ++i) {
    if (prof.norms[i] > 0.0) {
      lx.push_back(std::log(prof.omegas[i]));
      ly.push_back(std::log(prof.norms[i]));
    }
  }
  prof.identically_zero = lx.empty();
  if (lx.size() < 2) {
    prof.slope = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  prof.slope = sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

NormProfile quantisation_gap(const PhaseSymbol& a, double t, double s, const std::vector<double>& omegas,
                             const GridFunction& u, double p) {
  NormProfile prof;
  for (double w : omegas) {
    const GridFunction diff = op_t_apply(a, {t, w}, u) - op_t_apply(a, {s, w}, u);
    prof.omegas.push_back(w);
    prof.norms.push_back(lp_norm(diff, p));
  }
  fit_slope(prof);
  return prof;
}

NormProfile commutator_profile(const PhaseSymbol& a, const PhaseSymbol& b, double t,
                               const std::vector<double>& omegas, const GridFunction& u, double p) {
  NormProfile prof;
  for (double w : omegas) {
    const QuantParams q{t, w};
    const GridFunction ab = op_t_apply(a, q, op_t_apply(b, q, u));
    const GridFunction ba = op_t_apply(b, q, op_t_apply(a, q, u));
    prof.omegas.push_back(w);
    prof.norms.push_back(lp_norm(ab - ba, p));
  }
  fit_slope(prof);
  return prof;
}

std::vector<SeminormSample> sampled_seminorms(const PhaseSymbol& a, const Grid& g, double xi_radius,
                                              int xi_points) {
  if (xi_points < 2) throw UsageError("sampled_seminorms: need at least two frequency samples per axis");
  const int d = g.d;
  const int stride = std::max(1, g.N / 32);
  const int x_per_axis = (g.N + stride - 1) / stride;
  const double step = 1e-3;
  double table[3][3] = {};

  std::array<int, kMaxDim> xi_idx{}, x_idx{};
  std::int64_t x_total = 1, xi_total = 1;
  for (int k = 0; k < d; ++k) {
    x_total *= x_per_axis;
    xi_total *= xi_points;
  }
  for (std::int64_t xs = 0; xs < x_total; ++xs) {
    std::int64_t rem = xs;
    for (int k = d - 1; k >= 0; --k) {
      x_idx[k] = static_cast<int>(rem % x_per_axis) * stride;
      rem /= x_per_axis;
    }
    Point x(d);
    for (int k = 0; k < d; ++k) x(k) = -0.5 * g.L + x_idx[k] * g.spacing();
    for (std::int64_t fs = 0; fs < xi_total; ++fs) {
      std::int64_t r2 = fs;
      for (int k = d - 1; k >= 0; --k) {
        xi_idx[k] = static_cast<int>(r2 % xi_points);
        r2 /= xi_points;
      }
      Freq xi(d);
      for (int k = 0; k < d; ++k) xi(k) = -xi_radius + 2.0 * xi_radius * xi_idx[k] / (xi_points - 1);

      const double f0 = std::abs(a(x, xi));
      double deriv[3] = {f0, 0.0, 0.0};
      const Complex c0 = a(x, xi);
      double zmax = 0.0;
      for (int axis = 0; axis < 2 * d; ++axis) {
        Point xp = x, xm = x;
        Freq fp = xi, fm = xi;
        if (axis < d) {
          xp(axis) += step;
          xm(axis) -= step;
          zmax = std::max(zmax, std::abs(x(axis)));
        } else {
          fp(axis - d) += step;
          fm(axis - d) -= step;
          zmax = std::max(zmax, std::abs(xi(axis - d)));
        }
        const Complex cp = a(wrap(xp, g.L), fp);
        const Complex cm = a(wrap(xm, g.L), fm);
        deriv[1] = std::max(deriv[1], std::abs(cp - cm) / (2.0 * step));
        deriv[2] = std::max(deriv[2], std::abs(cp - 2.0 * c0 + cm) / (step * step));
      }
      for (int ax = 0; ax < 3; ++ax)
        for (int bx = 0; bx < 3; ++bx) table[ax][bx] = std::max(table[ax][bx], std::pow(zmax, ax) * deriv[bx]);
    }
  }
  std::vector<SeminormSample> out;
  for (int ax = 0; ax < 3; ++ax)
    for (int bx = 0; bx < 3; ++bx) out.push_back({ax, bx, table[ax][bx]});
  return out;
}

// ---------------------------------------------------------------- pairings

SemiclassicalTrace semiclassical_pairing(const SequenceFamily& u_fam, const SequenceFamily& v_fam,
                                         const Schedule& omega, const GridFunction& phi1,
                                         const GridFunction& phi2, const Symbol& psi,
                                         const std::vector<long long>& n_schedule, const Grid& g,
                                         const PairingOptions& opt) {
  if (!psi.schwartz()) {
    throw DomainError("semiclassical_pairing: symbol '" + psi.label() + "' is not Schwartz-class");
  }
  SemiclassicalTrace out;
  out.trace = pairing(u_fam, v_fam, omega, phi1, phi2, psi, n_schedule, g, opt);
  const GridFunction u_lim = weak_limit(u_fam, g);
  const GridFunction v_lim = weak_limit(v_fam, g);
  if (sup_norm(u_lim) > 0.0 || sup_norm(v_lim) > 0.0) {
    out.corrector = corrector_term(u_lim, v_lim, phi1, phi2, psi);
  }
  return out;
}

void write_wigner_csv(const WignerTransform& w, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  const Grid& g = w.grid;
  for (int a = 0; a < g.d; ++a) out << 'x' << a + 1 << ',';
  for (int a = 0; a < g.d; ++a) out << 'k' << a + 1 << ',';
  out << "re,im\n";
  out << std::setprecision(17);
  for (std::int64_t j = 0; j < g.size(); ++j) {
    const auto xi = g.unflatten(j);
    for (std::int64_t k = 0; k < g.size(); ++k) {
      const auto kk = g.wavenumber(k);
      for (int a = 0; a < g.d; ++a) out << xi[a] << ',';
      for (int a = 0; a < g.d; ++a) out << kk[a] << ',';
      out << w.values(j, k).real() << ',' << w.values(j, k).imag() << '\n';
    }
  }
}

}  // namespace oslab

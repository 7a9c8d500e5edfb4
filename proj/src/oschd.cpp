#include "oslab/oschd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace oslab {

std::string RatioClass::str() const {
  std::ostringstream os;
  switch (kind) {
    case RatioKind::zero: return "0";
    case RatioKind::infinity: return "inf";
    case RatioKind::finite: os << c; return os.str();
    case RatioKind::non_pure:
      os << "non-pure{";
      for (std::size_t i = 0; i < accumulation.size(); ++i) os << (i ? "," : "") << accumulation[i];
      os << "}";
      return os.str();
  }
  return "?";
}

RatioClass purity_scan(const Schedule& omega, const Schedule& eps, const std::vector<long long>& n_schedule) {
  if (n_schedule.empty()) throw UsageError("purity_scan: empty n schedule");
  RatioClass rc;
  for (long long n : n_schedule) {
    const double w = omega(n);
    const double e = eps(n);
    if (!(w > 0.0) || !(e > 0.0)) throw DomainError("purity_scan: schedules must be positive");
    rc.ratios.push_back(w / e);
  }
  const std::size_t len = rc.ratios.size();
  const std::size_t tail = std::min(len, std::max<std::size_t>(4, len / 2));
  const std::size_t start = len - tail;
  std::vector<double> lr, ln;
  for (std::size_t i = start; i < len; ++i) {
    lr.push_back(std::log(rc.ratios[i]));
    ln.push_back(std::log(static_cast<double>(n_schedule[i])));
  }
  bool up = true, down = true;
  for (std::size_t i = 1; i < lr.size(); ++i) {
    if (lr[i] < lr[i - 1]) up = false;
    if (lr[i] > lr[i - 1]) down = false;
  }
  if (up || down) {
    double slope = 0.0;
    if (lr.size() >= 2) {
      const double mx = std::accumulate(ln.begin(), ln.end(), 0.0) / ln.size();
      const double my = std::accumulate(lr.begin(), lr.end(), 0.0) / lr.size();
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < lr.size(); ++i) {
        sxy += (ln[i] - mx) * (lr[i] - my);
        sxx += (ln[i] - mx) * (ln[i] - mx);
      }
      slope = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    if (slope >= 0.05) {
      rc.kind = RatioKind::infinity;
      rc.c = 0.0;
    } else if (slope <= -0.05) {
      rc.kind = RatioKind::zero;
      rc.c = 0.0;
    } else {
      rc.kind = RatioKind::finite;
      rc.c = rc.ratios.back();
    }
    return rc;
  }
  const auto [mn, mx] = std::minmax_element(lr.begin(), lr.end());
  if (*mx - *mn <= std::log(1.1)) {
    rc.kind = RatioKind::finite;
    rc.c = rc.ratios.back();
    return rc;
  }
  rc.kind = RatioKind::non_pure;
  std::vector<double> sorted = lr;
  std::sort(sorted.begin(), sorted.end());
  double sum = sorted.front();
  int count = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i == sorted.size() || sorted[i] - sorted[i - 1] > std::log(1.1)) {
      rc.accumulation.push_back(std::exp(sum / count));
      if (i == sorted.size()) break;
      sum = sorted[i];
      count = 1;
    } else {
      sum += sorted[i];
      ++count;
    }
  }
  return rc;
}

namespace {

Complex aitken_step(Complex x0, Complex x1, Complex x2) {
  const Complex d1 = x1 - x0;
  const Complex d2 = x2 - x1;
  const double tiny = 1e-13 * std::max(std::abs(x2), 1e-300);
  if (std::abs(d1) <= tiny && std::abs(d2) <= tiny) return x2;
  if (std::abs(d1) == 0.0) return x2;
  // Only extrapolate geometric-looking tails; ratios near 1 carry no
  // information about the limit.
  const Complex r = d2 / d1;
  if (std::abs(r) >= 0.95) return x2;
  return x2 + d2 * r / (1.0 - r);
}

}  // namespace

Complex aitken_limit(const std::vector<Complex>& seq, int depth, Complex* last_gap) {
  if (seq.empty()) throw UsageError("aitken_limit: empty sequence");
  std::vector<Complex> cur = seq;
  for (int pass = 0; pass < depth && cur.size() >= 3; ++pass) {
    std::vector<Complex> next;
    for (std::size_t j = 2; j < cur.size(); ++j) next.push_back(aitken_step(cur[j - 2], cur[j - 1], cur[j]));
    cur = std::move(next);
  }
  if (last_gap) *last_gap = cur.size() >= 2 ? cur.back() - cur[cur.size() - 2] : Complex(0.0);
  return cur.back();
}

namespace {

Complex neville_at_zero(const std::vector<double>& h, const std::vector<Complex>& y) {
  std::vector<Complex> P = y;
  const std::size_t n = P.size();
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t i = 0; i + k < n; ++i)
      P[i] = (-h[i + k] * P[i] + h[i] * P[i + 1]) / (h[i] - h[i + k]);
  return P[0];
}

}  // namespace

Extrapolation extrapolate_limit(const std::vector<double>& h, const std::vector<Complex>& seq, int points) {
  if (seq.empty()) throw UsageError("extrapolate_limit: empty sequence");
  Extrapolation ex;
  bool usable = h.size() == seq.size() && seq.size() >= 2 && points >= 2;
  for (std::size_t j = 0; usable && j < h.size(); ++j) {
    if (!(h[j] > 0.0) || !std::isfinite(h[j])) usable = false;
    if (j > 0 && !(h[j] < h[j - 1] * (1.0 - 1e-12))) usable = false;
  }
  if (usable) {
    const std::size_t k = std::min<std::size_t>(points, seq.size());
    const std::size_t s0 = seq.size() - k;
    std::vector<double> hh(h.begin() + s0, h.end());
    std::vector<Complex> yy(seq.begin() + s0, seq.end());
    ex.value = neville_at_zero(hh, yy);
    const Complex fewer = neville_at_zero(std::vector<double>(hh.begin() + 1, hh.end()),
                                          std::vector<Complex>(yy.begin() + 1, yy.end()));
    ex.error = std::abs(ex.value - fewer);
    ex.method = "polynomial";
    return ex;
  }
  Complex gap = 0.0;
  ex.value = aitken_limit(seq, 2, &gap);
  ex.error = std::abs(gap);
  ex.method = "aitken";
  return ex;
}

std::vector<double> extrapolation_variable(const RatioClass& rc, const std::vector<double>& omega,
                                           const std::vector<double>& eps) {
  std::vector<double> h(omega.size());
  for (std::size_t j = 0; j < h.size(); ++j) {
    switch (rc.kind) {
      case RatioKind::zero: h[j] = omega[j] / eps[j]; break;
      case RatioKind::infinity: h[j] = eps[j] / omega[j]; break;
      default: h[j] = eps[j]; break;
    }
  }
  return h;
}

void finalize_trace(PairingTrace& t, const PairingOptions& opt) {
  const std::size_t len = t.I.size();
  t.cauchy_gaps.assign(len, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t j = 1; j < len; ++j) t.cauchy_gaps[j] = std::abs(t.I[j] - t.I[j - 1]);
  t.limit_estimate.reset();
  if (len == 0) return;
  if (t.h.size() != len) t.h = extrapolation_variable(t.ratio, t.omega, t.epsilon);
  const Extrapolation ex = extrapolate_limit(t.h, t.I, opt.extrapolation_points);
  t.extrapolated = ex.value;
  t.extrapolation_error = ex.error;
  t.extrapolation_method = ex.method;
  if (len < 4 || t.ratio.kind == RatioKind::non_pure) return;
  const double slack = 1e-12 * std::max(1.0, t.scale);
  bool decreasing = true;
  for (std::size_t j = len - 2; j < len; ++j)
    if (t.cauchy_gaps[j] > t.cauchy_gaps[j - 1] * (1.0 + 1e-9) + slack) decreasing = false;
  const double tol = opt.tolerance * std::max(1.0, std::abs(t.extrapolated));
  if (decreasing && ex.error < tol) t.limit_estimate = t.extrapolated;
}

double PairingTrace::relative_error() const {
  if (!reference) return std::numeric_limits<double>::quiet_NaN();
  const double ref = std::abs(*reference);
  const double den = (ref > 1e-10 * scale && ref > 0.0) ? ref : scale;
  return std::abs(value() - *reference) / (den > 0.0 ? den : 1.0);
}

double PairingTrace::max_adjoint_gap_relative() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < adjoint_gaps.size(); ++j) {
    const double den = norm_products[j] > 0.0 ? norm_products[j] : 1.0;
    worst = std::max(worst, adjoint_gaps[j] / den);
  }
  return worst;
}

PairingTrace pairing(const SequenceFamily& u_fam, const SequenceFamily& v_fam, const Schedule& omega,
                     const GridFunction& phi1, const GridFunction& phi2, const Symbol& s,
                     const std::vector<long long>& n_schedule, const Grid& g, const PairingOptions& opt) {
  if (n_schedule.empty()) throw UsageError("pairing: empty n schedule");
  if (phi1.grid() != g || phi2.grid() != g) throw GridMismatch("pairing: test functions live on another grid");
  PairingTrace t;
  const Schedule eps = u_fam.characteristic_length();
  double sup_psi = 0.0;
  double max_norms = 0.0;
  for (long long n : n_schedule) {
    const double w = omega(n);
    const GridFunction phi1u = multiply_pointwise(phi1, term(u_fam, n, g));
    const GridFunction phi2v = multiply_pointwise(phi2, term(v_fam, n, g));
    const Eigen::VectorXcd m = multiplier_samples(s, w, g);
    const Complex left = integral_product(apply_samples(m, phi1u), phi2v);
    const Complex right = integral_product(phi1u, apply_samples(m.conjugate(), phi2v));
    t.n.push_back(n);
    t.omega.push_back(w);
    t.epsilon.push_back(eps(n));
    t.I.push_back(left);
    t.adjoint_gaps.push_back(std::abs(left - right));
    const double np = lp_norm(phi1u, 2.0) * lp_norm(phi2v, 2.0);
    t.norm_products.push_back(np);
    sup_psi = std::max(sup_psi, m.cwiseAbs().maxCoeff());
    max_norms = std::max(max_norms, np);
  }
  t.scale = max_norms * sup_psi;
  t.ratio = purity_scan(omega, eps, n_schedule);
  finalize_trace(t, opt);
  return t;
}

namespace {

// Unscaled, uncentred profile of a concentration or oscillation family
// (with the duality map applied for canonical partners).
GridFunction base_profile(const SequenceFamily& f, const Grid& g) {
  GridFunction w = GridFunction::sample(g, [&](const Point& x) {
    return f.u(wrap(x, g.L));
  });
  return f.canonical_dual ? duality_map(w, f.p) : w;
}

Symbol limit_symbol(const Symbol& s, const RatioClass& c) {
  switch (c.kind) {
    case RatioKind::zero: return s.trace0_symbol();
    case RatioKind::infinity: return s.trace_inf_symbol();
    case RatioKind::finite: return dilate(s, c.c);
    case RatioKind::non_pure: break;
  }
  throw UsageError("closed form: the pair is not pure (" + c.str() + ")");
}

}  // namespace

Complex closed_form_reference(const SequenceFamily& u_fam, const SequenceFamily& v_fam, const RatioClass& c,
                              const Symbol& s, const GridFunction& phi1, const GridFunction& phi2, const Grid& g) {
  if (c.kind == RatioKind::non_pure) throw UsageError("closed form: the pair is not pure (" + c.str() + ")");
  if (u_fam.kind != v_fam.kind) throw UsageError("closed form: u and v must be of the same family kind");
  if (u_fam.kind == FamilyKind::concentration) {
    if ((u_fam.center - v_fam.center).norm() > 0.0)
      throw UsageError("closed form: concentration points of u and v differ");
    const GridFunction u0 = base_profile(u_fam, g);
    const GridFunction v0 = base_profile(v_fam, g);
    const Complex theta = integral_product(apply_multiplier(limit_symbol(s, c), 1.0, u0), v0);
    const Complex a = TrigInterpolant(phi1)(u_fam.center);
    const Complex b = TrigInterpolant(phi2)(u_fam.center);
    return a * std::conj(b) * theta;
  }
  if (u_fam.kind == FamilyKind::oscillation) {
    if ((u_fam.wavevector - v_fam.wavevector).norm() > 0.0)
      throw UsageError("closed form: oscillation wavevectors of u and v differ");
    const Point& k = u_fam.wavevector;
    const Freq e = k / k.norm();
    Complex factor;
    switch (c.kind) {
      case RatioKind::zero: factor = s.trace0(e); break;
      case RatioKind::infinity: factor = s.trace_inf(e); break;
      default: factor = s(c.c * Freq(k)); break;
    }
    auto centred = [&](const SequenceFamily& f) {
      GridFunction w = GridFunction::sample(g, [&](const Point& x) {
        return f.u(wrap(Point(x - f.center), g.L));
      });
      return f.canonical_dual ? duality_map(w, f.p) : w;
    };
    const GridFunction uv = multiply_pointwise(centred(u_fam), centred(v_fam).conj());
    const GridFunction pp = multiply_pointwise(phi1, phi2.conj());
    return factor * integral(multiply_pointwise(uv, pp));
  }
  throw UsageError("closed form: only concentration and oscillation families have one");
}

PushforwardCheck pi_pushforward_check(const SequenceFamily& u_fam, const SequenceFamily& v_fam,
                                      const Schedule& omega, const GridFunction& phi1, const GridFunction& phi2,
                                      const Symbol& homogeneous_symbol, const std::vector<long long>& n_schedule,
                                      const Grid& g) {
  if (homogeneous_symbol.family() != SymbolFamily::homogeneous)
    throw UsageError("pi_pushforward_check: symbol must be homogeneous of degree 0");
  PushforwardCheck chk;
  chk.one_scale = pairing(u_fam, v_fam, omega, phi1, phi2, homogeneous_symbol, n_schedule, g);
  chk.h_reference = pairing(u_fam, v_fam, Schedule::constant(1.0), phi1, phi2, homogeneous_symbol, n_schedule, g);
  for (std::size_t j = 0; j < chk.one_scale.I.size(); ++j)
    chk.gap = std::max(chk.gap, std::abs(chk.one_scale.I[j] - chk.h_reference.I[j]));
  return chk;
}

Complex corrector_term(const GridFunction& u_limit, const GridFunction& v_limit, const GridFunction& phi1,
                       const GridFunction& phi2, const Symbol& s) {
  const Symbol t0 = s.trace0_symbol();
  return integral_product(apply_multiplier(t0, 1.0, multiply_pointwise(phi1, u_limit)),
                          multiply_pointwise(phi2, v_limit));
}

CompactnessVerdict strong_compactness_probe(const SequenceFamily& u_fam, const Grid& g, const Schedule& omega,
                                            const TestBank& bank, const std::vector<long long>& n_schedule) {
  CompactnessVerdict v;
  const SequenceFamily dual = dual_family(u_fam);
  for (const auto& phi : bank.phis) {
    for (const auto& s : bank.symbols) {
      PairingTrace t = pairing(u_fam, dual, omega, phi, phi, s, n_schedule, g);
      v.max_pairing_limit = std::max(v.max_pairing_limit, std::abs(t.value()));
      for (const auto& x : t.I) v.max_pairing_value = std::max(v.max_pairing_value, std::abs(x));
      v.traces.push_back(std::move(t));
    }
    std::vector<double> prof;
    std::vector<Complex> seq;
    for (long long n : n_schedule) {
      const double nv = lp_norm(multiply_pointwise(phi, term(u_fam, n, g)), u_fam.p);
      prof.push_back(nv);
      seq.emplace_back(nv);
      v.max_norm = std::max(v.max_norm, nv);
    }
    const double lim = std::abs(aitken_limit(seq, 1));
    v.norm_limits.push_back(lim);
    v.max_norm_limit = std::max(v.max_norm_limit, lim);
    v.norms.push_back(std::move(prof));
  }
  v.pairing_zero = v.max_pairing_limit <= 1e-2 * v.max_pairing_value;
  v.norm_zero = v.max_norm_limit <= 1e-2 * v.max_norm;
  return v;
}

void write_trace_csv(const PairingTrace& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << "n,omega_n,epsilon_n,re_I,im_I,cauchy_gap,adjoint_gap\n" << std::setprecision(17);
  for (std::size_t j = 0; j < t.n.size(); ++j) {
    out << t.n[j] << ',' << t.omega[j] << ',' << t.epsilon[j] << ',' << t.I[j].real() << ',' << t.I[j].imag()
        << ',';
    if (std::isnan(t.cauchy_gaps[j]))
      out << "nan";
    else
      out << t.cauchy_gaps[j];
    out << ',' << t.adjoint_gaps[j] << '\n';
  }
}

}  // namespace oslab

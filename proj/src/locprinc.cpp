#include "oslab/locprinc.hpp"

#include "oslab/fourmult.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace oslab {

int order(const MultiIndex& alpha, int d) {
  int o = 0;
  for (int i = 0; i < d; ++i) o += alpha[i];
  return o;
}

std::string to_string(const MultiIndex& alpha, int d) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < d; ++i) os << (i ? "," : "") << alpha[i];
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------- systems

PdeSystem PdeSystem::first_order_scalar(int d, int axis, Complex a, Schedule eps, double p) {
  if (axis < 0 || axis >= d) throw DomainError("first_order_scalar: axis outside 0..d-1");
  PdeSystem s;
  s.d = d;
  s.m = 1;
  s.epsilon = std::move(eps);
  s.p = p;
  s.terms.push_back({MultiIndex{}, {[](const Point&) { return Complex(1.0); }}});
  MultiIndex e{};
  e[axis] = 1;
  s.terms.push_back({e, {[a](const Point&) { return a; }}});
  return s;
}

void PdeSystem::validate() const {
  if (d < 1 || d > kMaxDim) throw DomainError("system: dimension must lie in 1..3");
  if (m < 1) throw DomainError("system: order m must be at least 1");
  if (q < 1 || r < 1) throw DomainError("system: matrix dimensions must be positive");
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("system: p must lie in (1, inf)");
  bool any = false;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    for (int a = 0; a < kMaxDim; ++a) {
      if (t.alpha[a] < 0 || (a >= d && t.alpha[a] != 0))
        throw DomainError("system: invalid multi-index " + to_string(t.alpha, kMaxDim));
    }
    if (order(t.alpha, d) > m) throw DomainError("system: term " + to_string(t.alpha, d) + " exceeds order m");
    if (t.entries.size() != static_cast<std::size_t>(q * r))
      throw DomainError("system: term " + to_string(t.alpha, d) + " has " + std::to_string(t.entries.size()) +
                        " entries, expected q*r = " + std::to_string(q * r));
    for (const auto& e : t.entries) any = any || static_cast<bool>(e);
    for (std::size_t j = 0; j < i; ++j)
      if (terms[j].alpha == t.alpha) throw DomainError("system: duplicate term " + to_string(t.alpha, d));
  }
  if (!any) throw DomainError("system: all coefficients are zero");
}

const SystemTerm* PdeSystem::find(const MultiIndex& alpha) const {
  for (const auto& t : terms)
    if (t.alpha == alpha) return &t;
  return nullptr;
}

Eigen::MatrixXcd PdeSystem::coefficient(const MultiIndex& alpha, const Point& x) const {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(q, r);
  const SystemTerm* t = find(alpha);
  if (!t) return A;
  for (int k = 0; k < q; ++k)
    for (int s = 0; s < r; ++s)
      if (t->entries[k * r + s]) A(k, s) = t->entries[k * r + s](x);
  return A;
}

std::vector<GridFunction> compute_rhs(const PdeSystem& sys, const std::vector<GridFunction>& u, long long n) {
  sys.validate();
  if (u.size() != static_cast<std::size_t>(sys.r)) throw DomainError("compute_rhs: expected r components");
  const Grid& g = u.front().grid();
  for (const auto& c : u) c.require_same(u.front());
  if (g.d != sys.d) throw DomainError("compute_rhs: grid and system dimensions differ");
  const double eps = sys.epsilon(n);
  std::vector<GridFunction> f(sys.q, GridFunction(g));
  for (const auto& t : sys.terms) {
    const double w = std::pow(eps, order(t.alpha, sys.d));
    for (int k = 0; k < sys.q; ++k) {
      GridFunction acc(g);
      bool any = false;
      for (int s = 0; s < sys.r; ++s) {
        const auto& c = t.entries[k * sys.r + s];
        if (!c) continue;
        acc += multiply_pointwise(GridFunction::sample(g, c), u[s]);
        any = true;
      }
      if (!any) continue;
      f[k] += w * spectral_derivative(acc, t.alpha);
    }
  }
  return f;
}

// ---------------------------------------------------------------- compactness

CompactnessProfile classify_profile(std::vector<long long> n, std::vector<double> norms) {
  CompactnessProfile prof;
  prof.n = std::move(n);
  prof.norms = std::move(norms);
  prof.decreasing = prof.norms.size() >= 2;
  for (std::size_t i = 1; i < prof.norms.size(); ++i)
    if (prof.norms[i] > prof.norms[i - 1] * (1.0 + 1e-9) + 1e-300) prof.decreasing = false;
  prof.compact = prof.decreasing && prof.norms.back() < 1e-2 * prof.norms.front();
  return prof;
}

CompactnessProfile eps_compactness_norms(const std::vector<std::vector<GridFunction>>& f_terms,
                                         const std::vector<long long>& n, const Schedule& eps, int m, double p,
                                         const GridFunction* phi) {
  if (f_terms.size() != n.size()) throw UsageError("eps_compactness_norms: one term per n expected");
  if (m < 1) throw DomainError("eps_compactness_norms: m must be at least 1");
  std::vector<double> norms;
  for (std::size_t j = 0; j < n.size(); ++j) {
    double acc = 0.0;
    for (const auto& f : f_terms[j]) {
      const Symbol weight = Symbol::rational(f.grid().d, MultiIndex{}, 0, m);
      const GridFunction local = phi ? multiply_pointwise(*phi, f) : f;
      acc += std::pow(lp_norm(apply_multiplier(weight, eps(n[j]), local), p), p);
    }
    norms.push_back(std::pow(acc, 1.0 / p));
  }
  return classify_profile(n, std::move(norms));
}

CompactnessProfile eps_compactness_norms(const std::vector<GridFunction>& f_terms, const std::vector<long long>& n,
                                         const Schedule& eps, int m, double p, const GridFunction* phi) {
  std::vector<std::vector<GridFunction>> wrapped;
  for (const auto& f : f_terms) wrapped.push_back({f});
  return eps_compactness_norms(wrapped, n, eps, m, p, phi);
}

double smooth_negative_sobolev_norm(const GridFunction& f, int m, double p) {
  const int d = f.grid().d;
  const Symbol weight = Symbol::rational(d, MultiIndex{}, 0, m) * Symbol::sobolev_weight(d, m, false);
  return lp_norm(apply_multiplier(weight, 1.0, f), p);
}

RescaleReport rescale_check(const std::vector<GridFunction>& f_terms, const std::vector<long long>& n,
                            const Schedule& eps, int k, int m, double p, const std::optional<Schedule>& omega) {
  if (k < 0 || k > m) throw DomainError("rescale_check: k must lie in 0..m");
  if (f_terms.size() != n.size()) throw UsageError("rescale_check: one term per n expected");
  std::vector<GridFunction> scaled;
  for (std::size_t j = 0; j < n.size(); ++j) scaled.push_back(std::pow(eps(n[j]), k) * f_terms[j]);
  RescaleReport rep;
  rep.primary = eps_compactness_norms(scaled, n, eps, m, p);
  if (omega) rep.second = eps_compactness_norms(scaled, n, *omega, m, p);
  return rep;
}

// ---------------------------------------------------------------- p_c

LocSymbol build_pc(const PdeSystem& sys, const RatioClass& c) {
  sys.validate();
  LocSymbol pc;
  pc.c = c;
  pc.system = &sys;
  const Complex two_pi_i(0.0, 2.0 * M_PI);
  for (const auto& t : sys.terms) {
    const int o = order(t.alpha, sys.d);
    switch (c.kind) {
      case RatioKind::zero:
        if (o == sys.m) pc.weights.emplace_back(t.alpha, std::pow(two_pi_i, sys.m));
        break;
      case RatioKind::finite:
        if (!(c.c > 0.0)) throw DomainError("build_pc: finite c must be positive");
        pc.weights.emplace_back(t.alpha, std::pow(two_pi_i / c.c, o));
        break;
      case RatioKind::infinity:
        if (o == 0) pc.weights.emplace_back(t.alpha, 1.0);
        break;
      case RatioKind::non_pure:
        throw UsageError("build_pc: the ratio omega/eps has several accumulation points (" + c.str() + ")");
    }
  }
  return pc;
}

Eigen::MatrixXcd LocSymbol::operator()(const Point& x, const Freq& xi) const {
  const PdeSystem& sys = *system;
  const double denom = 1.0 + std::pow(xi.norm(), sys.m);
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(sys.q, sys.r);
  for (const auto& [alpha, kappa] : weights) {
    double mono = 1.0;
    for (int i = 0; i < sys.d; ++i) mono *= std::pow(xi(i), alpha[i]);
    P += kappa * (mono / denom) * sys.coefficient(alpha, x);
  }
  return P;
}

std::string LocSymbol::case_tag() const { return c.str(); }

// ---------------------------------------------------------------- residuals

double ResidualTable::max_relative() const {
  double worst = 0.0;
  for (const auto& c : cells) worst = std::max(worst, c.scale > 0.0 ? std::abs(c.limit) / c.scale : std::abs(c.limit));
  for (const auto& t : per_class) worst = std::max(worst, t.max_relative());
  return worst;
}

namespace {

ResidualTable residual_for_class(const std::vector<SequenceFamily>& u_fam, const std::vector<SequenceFamily>& v_fam,
                                 const PdeSystem& sys, const Schedule& omega, const TestBank& bank,
                                 const std::vector<long long>& ns, const Grid& g, const RatioClass& rc) {
  ResidualTable table;
  table.ratio = rc;
  table.case_tag = rc.str();
  table.n = ns;

  // Right-hand side first: (eps_n)-local compactness for every cutoff.
  std::vector<std::vector<GridFunction>> f_terms;
  for (long long n : ns) {
    std::vector<GridFunction> u;
    for (const auto& f : u_fam) u.push_back(term(f, n, g));
    f_terms.push_back(compute_rhs(sys, u, n));
  }
  for (std::size_t i = 0; i < bank.phis.size(); ++i) {
    table.rhs_profiles.push_back(eps_compactness_norms(f_terms, ns, sys.epsilon, sys.m, sys.p, &bank.phis[i]));
    const auto& prof = table.rhs_profiles.back();
    if (!prof.compact && table.applicable) {
      table.applicable = false;
      std::ostringstream os;
      os << "localisation inapplicable: the right-hand side fails the (eps_n)-local compactness test for phi #"
         << i << " (final/initial = " << prof.ratio() << (prof.decreasing ? "" : ", not decreasing") << ")";
      table.inapplicable_reason = os.str();
    }
  }

  const LocSymbol pc = build_pc(sys, rc);
  const int lv = static_cast<int>(v_fam.size());
  const bool matrix = sys.q * lv > 1;
  for (int phi_id = 0; phi_id < static_cast<int>(bank.phis.size()); ++phi_id) {
    const GridFunction& phi = bank.phis[phi_id];
    for (int psi_id = 0; psi_id < static_cast<int>(bank.symbols.size()); ++psi_id) {
      const Symbol& psi = bank.symbols[psi_id];
      for (int k = 0; k < sys.q; ++k) {
        for (int l = 0; l < lv; ++l) {
          ResidualCell cell;
          cell.phi_id = phi_id;
          cell.psi_id = psi_id;
          cell.k = k;
          cell.l = l;
          cell.per_n.assign(ns.size(), 0.0);
          std::string tag = table.case_tag;
          if (matrix) tag += "[" + std::to_string(k) + "," + std::to_string(l) + "]";
          for (const auto& [alpha, kappa] : pc.weights) {
            const SystemTerm* t = sys.find(alpha);
            const Symbol s = (psi * Symbol::rational(sys.d, alpha, 0, sys.m)).scaled(kappa);
            std::vector<Complex> per_n(ns.size(), 0.0);
            Complex limit = 0.0;
            bool touched = false;
            for (int sidx = 0; sidx < sys.r; ++sidx) {
              const auto& c = t->entries[k * sys.r + sidx];
              if (!c) continue;
              const GridFunction phi1 = multiply_pointwise(phi, GridFunction::sample(g, c));
              const PairingTrace tr = pairing(u_fam[sidx], v_fam[l], omega, phi1, phi, s, ns, g);
              for (std::size_t j = 0; j < ns.size(); ++j) per_n[j] += tr.I[j];
              limit += tr.value();
              cell.scale += tr.scale;
              cell.converged = cell.converged && tr.limit_estimate.has_value();
              touched = true;
            }
            if (!touched) continue;
            const std::string a = to_string(alpha, sys.d);
            for (std::size_t j = 0; j < ns.size(); ++j) {
              table.rows.push_back({tag, a, phi_id, psi_id, k, l, ns[j], per_n[j]});
              cell.per_n[j] += per_n[j];
            }
            table.rows.push_back({tag, a, phi_id, psi_id, k, l, -1, limit});
            cell.limit += limit;
          }
          for (std::size_t j = 0; j < ns.size(); ++j)
            table.rows.push_back({tag, "sum", phi_id, psi_id, k, l, ns[j], cell.per_n[j]});
          table.rows.push_back({tag, "sum", phi_id, psi_id, k, l, -1, cell.limit});
          table.cells.push_back(std::move(cell));
        }
      }
    }
  }
  return table;
}

}  // namespace

ResidualTable localisation_residual(const std::vector<SequenceFamily>& u_fam,
                                    const std::vector<SequenceFamily>& v_fam, const PdeSystem& sys,
                                    const Schedule& omega, const TestBank& bank,
                                    const std::vector<long long>& n_schedule, const Grid& g) {
  sys.validate();
  if (u_fam.size() != static_cast<std::size_t>(sys.r))
    throw DomainError("localisation_residual: expected r = " + std::to_string(sys.r) + " solution components");
  if (v_fam.empty()) throw DomainError("localisation_residual: no partner sequence");
  if (bank.phis.empty() || bank.symbols.empty()) throw UsageError("localisation_residual: empty test bank");
  if (g.d != sys.d) throw DomainError("localisation_residual: grid and system dimensions differ");

  const RatioClass rc = purity_scan(omega, sys.epsilon, n_schedule);
  if (rc.kind != RatioKind::non_pure) return residual_for_class(u_fam, v_fam, sys, omega, bank, n_schedule, g, rc);

  // One table per accumulation class, each on the n whose ratio is closest.
  ResidualTable table;
  table.ratio = rc;
  table.case_tag = rc.str();
  table.n = n_schedule;
  std::vector<std::vector<long long>> groups(rc.accumulation.size());
  for (std::size_t j = 0; j < n_schedule.size(); ++j) {
    const double lr = std::log(rc.ratios[j]);
    std::size_t best = 0;
    for (std::size_t a = 1; a < rc.accumulation.size(); ++a)
      if (std::abs(lr - std::log(rc.accumulation[a])) < std::abs(lr - std::log(rc.accumulation[best]))) best = a;
    groups[best].push_back(n_schedule[j]);
  }
  for (std::size_t a = 0; a < groups.size(); ++a) {
    if (groups[a].empty()) continue;
    ResidualTable sub =
        residual_for_class(u_fam, v_fam, sys, omega, bank, groups[a], g, RatioClass::finite(rc.accumulation[a]));
    if (!sub.applicable && table.applicable) {
      table.applicable = false;
      table.inapplicable_reason = sub.inapplicable_reason;
    }
    table.rows.insert(table.rows.end(), sub.rows.begin(), sub.rows.end());
    table.per_class.push_back(std::move(sub));
  }
  return table;
}

void write_residual_csv(const ResidualTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << "case,alpha,phi_id,psi_id,n,re,im,abs\n" << std::setprecision(17);
  for (const auto& r : t.rows) {
    out << '"' << r.case_tag << "\",\"" << r.alpha << "\"," << r.phi_id << ',' << r.psi_id << ',';
    if (r.n < 0)
      out << "limit";
    else
      out << r.n;
    out << ',' << r.value.real() << ',' << r.value.imag() << ',' << std::abs(r.value) << '\n';
  }
}

// ---------------------------------------------------------------- zero sets

CommonZero common_zero_search(const LocSymbol& a, const LocSymbol& b, const Grid& g) {
  const int d = g.d;
  auto level = [&](const Point& x, const Freq& xi) { return std::max(a(x, xi).norm(), b(x, xi).norm()); };
  const std::vector<Freq> dirs = sphere_directions(d, d == 1 ? 2 : 64);
  const int stride = std::max(1, g.N / 8);
  CommonZero best;
  best.margin = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unflatten(i);
    bool keep = true;
    for (int k = 0; k < d; ++k) keep = keep && idx[k] % stride == 0;
    if (!keep) continue;
    const Point x = g.coordinate(i);
    for (int j = 0; j <= 90; ++j) {
      const double r = std::pow(10.0, -3.0 + 9.0 * j / 90.0);
      for (const auto& e : dirs) {
        const Freq xi = r * e;
        const double v = level(x, xi);
        if (v < best.margin) best = {v, x, xi};
      }
    }
  }
  // Pattern search in xi around the best sample on the smooth objective
  // |p|^2 + |q|^2, with coordinate and pairwise diagonal moves.
  auto smooth = [&](const Freq& xi) { return a(best.x, xi).squaredNorm() + b(best.x, xi).squaredNorm(); };
  std::vector<Freq> moves;
  for (int k = 0; k < d; ++k) {
    Freq e = Freq::Zero(d);
    e(k) = 1.0;
    moves.push_back(e);
    moves.push_back(-e);
    for (int l = k + 1; l < d; ++l)
      for (double s1 : {1.0, -1.0})
        for (double s2 : {1.0, -1.0}) {
          Freq f = Freq::Zero(d);
          f(k) = s1 * M_SQRT1_2;
          f(l) = s2 * M_SQRT1_2;
          moves.push_back(f);
        }
  }
  Freq xi = best.xi;
  double obj = smooth(xi);
  double step = 0.25 * std::max(xi.norm(), 1e-3);
  while (step > 1e-12 * std::max(1.0, xi.norm())) {
    bool moved = false;
    for (const auto& e : moves) {
      const Freq trial = xi + step * e;
      const double v = smooth(trial);
      if (v < obj) {
        obj = v;
        xi = trial;
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }
  if (const double v = level(best.x, xi); v < best.margin) best = {v, best.x, xi};
  return best;
}

// ---------------------------------------------------------------- worked example

TestBank default_localisation_bank(const Grid& g) {
  TestBank bank;
  const Profile wide = Profile::bump(0.35 * g.L);
  const Profile narrow = Profile::bump(0.2 * g.L);
  Point shift = Point::Zero(g.d);
  shift(0) = 0.1 * g.L;
  bank.phis.push_back(GridFunction::sample(g, [&](const Point& x) { return wide(x); }));
  bank.phis.push_back(GridFunction::sample(g, [&](const Point& x) { return narrow(wrap(Point(x - shift), g.L)); }));
  bank.symbols.push_back(Symbol::rational(g.d, MultiIndex{}, 0, 1));
  bank.symbols.push_back(Symbol::gaussian(g.d, 1.0));
  return bank;
}

WorkedExampleVerdict worked_example_53(double p, const Profile& u1, const Profile& u2, const Profile& v1,
                                       const Profile& v2, const std::vector<long long>& n_schedule, const Grid& g,
                                       const TestBank& bank, const WorkedExampleOptions& opt) {
  if (g.d != 2) throw DomainError("worked_example_53: the example lives in two dimensions");
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("worked_example_53: p must lie in (1, inf)");
  WorkedExampleVerdict v;
  v.n = n_schedule;
  if (n_schedule.size() < 2) {
    v.status = "inconclusive";
    v.notes.push_back("schedule too short: decay cannot be judged from a single term");
    return v;
  }
  const double pd = p / (p - 1.0);
  const SequenceFamily uf = SequenceFamily::composite53(u1, u2, p, Role::primal);
  const SequenceFamily vf = SequenceFamily::composite53(v1, v2, p, Role::dual);
  for (long long n : n_schedule) {
    check_resolved(uf, n, g);
    check_resolved(vf, n, g);
  }
  const Schedule eps = Schedule::power(1.0, -1.0);
  const PdeSystem sys_u = PdeSystem::first_order_scalar(2, 0, opt.a1, eps, p);
  const PdeSystem sys_v = PdeSystem::first_order_scalar(2, 1, opt.a2, eps, pd);

  // (a) right-hand sides
  std::vector<GridFunction> f_terms, g_terms;
  for (long long n : n_schedule) {
    f_terms.push_back(compute_rhs(sys_u, {term(uf, n, g)}, n).front());
    g_terms.push_back(compute_rhs(sys_v, {term(vf, n, g)}, n).front());
  }
  v.rhs_compact = true;
  for (const auto& phi : bank.phis) {
    v.f_profiles.push_back(eps_compactness_norms(f_terms, n_schedule, eps, 1, p, &phi));
    v.g_profiles.push_back(eps_compactness_norms(g_terms, n_schedule, eps, 1, pd, &phi));
    v.rhs_compact = v.rhs_compact && v.f_profiles.back().compact && v.g_profiles.back().compact;
  }

  // (b) products u_n conj(v_n) against the cutoffs
  for (long long n : n_schedule) {
    const GridFunction un = term(uf, n, g);
    const GridFunction vn = term(vf, n, g);
    double worst = 0.0;
    for (const auto& phi : bank.phis) worst = std::max(worst, std::abs(integral_product(multiply_pointwise(phi, un), vn)));
    v.product_pairings.push_back(worst);
  }
  v.products_vanish = v.product_pairings.back() < opt.product_ratio * v.product_pairings.front();

  // (c) localisation residuals for both equations
  v.residual_u = localisation_residual({uf}, {vf}, sys_u, eps, bank, n_schedule, g);
  v.residual_v = localisation_residual({vf}, {uf}, sys_v, eps, bank, n_schedule, g);
  v.residuals_small = v.residual_u.max_relative() < opt.residual_ratio && v.residual_v.max_relative() < opt.residual_ratio;

  const RatioClass c1 = RatioClass::finite(1.0);
  v.common_zero = common_zero_search(build_pc(sys_u, c1), build_pc(sys_v, c1), g);
  v.mu_zero_implied = v.common_zero.margin > 1e-3;

  std::ostringstream os;
  os << "common zero search: min max(|p_u|, |p_v|) = " << v.common_zero.margin << " at xi = (" << v.common_zero.xi(0)
     << ", " << v.common_zero.xi(1) << ")";
  v.notes.push_back(os.str());
  if (!v.residual_u.applicable) v.notes.push_back("first equation: " + v.residual_u.inapplicable_reason);
  if (!v.residual_v.applicable) v.notes.push_back("second equation: " + v.residual_v.inapplicable_reason);
  v.status = (v.rhs_compact && v.products_vanish && v.residuals_small) ? "pass" : "fail";
  return v;
}

}  // namespace oslab

#include "commands.hpp"

#include "oslab/dualgeom.hpp"
#include "oslab/fourmult.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

namespace oslab::cli {

namespace fs = std::filesystem;

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

namespace {

json cjson(Complex z) { return json::array({z.real(), z.imag()}); }

// Non-finite doubles are not representable in JSON; they become null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct Checks {
  json list = json::array();
  bool ok = true;

  void add(const std::string& name, bool pass, json detail = json::object()) {
    detail["name"] = name;
    detail["pass"] = pass;
    list.push_back(std::move(detail));
    ok = ok && pass;
  }
};

// Runs f(i) for i < n on up to `jobs` threads. Results land in
// caller-owned slots, so output order never depends on scheduling. The
// first exception in index order is rethrown.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Numerical guard failures (resolution, cost, evaluation) become a failed
// check with the diagnostic; anything else propagates.
template <class F>
bool guard_case(Checks& checks, const std::string& name, std::ostream& log, F&& f) {
  try {
    f();
    return true;
  } catch (const UnderResolved& e) {
    json d;
    d["diagnostic"] = e.what();
    d["limiting_n"] = e.limiting_n();
    checks.add(name + ": guard", false, d);
    log << "  " << name << ": " << e.what() << "\n";
  } catch (const CostGuard& e) {
    checks.add(name + ": guard", false, json{{"diagnostic", e.what()}});
    log << "  " << name << ": " << e.what() << "\n";
  } catch (const EvaluationError& e) {
    checks.add(name + ": guard", false, json{{"diagnostic", e.what()}});
    log << "  " << name << ": " << e.what() << "\n";
  }
  return false;
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out.empty() ? "case" : out;
}

std::string case_name(const Node& n, const std::string& fallback) { return n.string_or("name", fallback); }

json trace_json(const PairingTrace& t) {
  json j;
  j["n"] = t.n;
  j["ratio_class"] = t.ratio.str();
  j["converged"] = t.limit_estimate.has_value();
  j["value"] = cjson(t.value());
  j["extrapolated"] = cjson(t.extrapolated);
  j["extrapolation_error"] = num(t.extrapolation_error);
  j["extrapolation_method"] = t.extrapolation_method;
  j["scale"] = num(t.scale);
  j["max_adjoint_gap_relative"] = num(t.max_adjoint_gap_relative());
  if (t.reference) {
    j["reference"] = cjson(*t.reference);
    j["relative_error"] = num(t.relative_error());
  }
  return j;
}

// ---------------------------------------------------------------- geometry

json geometry(const Config& cfg, const RunOptions& opt, Checks& checks, const fs::path& traces, std::ostream& log) {
  const json empty = json::object();
  const Node g = cfg.has_section("geometry") ? cfg.section("geometry") : Node(&empty, "geometry");
  g.only({"rho0", "samples", "dims", "sequences"});
  const std::vector<double> rhos = g.has("rho0") ? g.at("rho0").numbers() : std::vector<double>{0.5, 1.0, 2.0};
  const long long samples = g.integer_or("samples", 10000);
  if (samples < 1) g.at("samples").fail("must be positive");
  std::vector<long long> dims = g.has("dims") ? g.at("dims").integers() : std::vector<long long>{1, 2, 3};
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (dims[i] < 1 || dims[i] > 8) g.at("dims")[i].fail("dimension must lie in 1..8");
  for (std::size_t i = 0; i < rhos.size(); ++i)
    if (!(rhos[i] > 0.0)) g.at("rho0")[i].fail("rho0 must be positive");

  const double tol = 1e-10 * opt.tolerance_scale;
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> logr(-3.0, 3.0);
  json out;
  std::ofstream csv(traces / "geometry_roundtrip.csv");
  csv << "d,rho0,max_relative_error,metric_violations,monotone\n" << std::setprecision(17);
  double worst_all = 0.0;
  long long violations_all = 0;
  bool monotone_all = true;
  for (long long d : dims) {
    for (double rho : rhos) {
      const CompactParams params(static_cast<int>(d), rho);
      auto random_vec = [&] {
        Eigen::VectorXd v(d);
        for (auto& c : v) c = normal(rng);
        return v;
      };
      auto random_point = [&](int which) -> CompactPoint {
        Eigen::VectorXd v = random_vec();
        if (which == 1) return CompactPoint::sigma_zero(v / v.norm());
        if (which == 2) return CompactPoint::sigma_infinity(v / v.norm());
        return CompactPoint::interior(v / v.norm() * std::pow(10.0, logr(rng)));
      };
      double worst = 0.0;
      for (long long i = 0; i < samples; ++i) {
        const int which = i % 10 == 8 ? 1 : (i % 10 == 9 ? 2 : 0);
        const CompactPoint p = random_point(which);
        const CompactPoint q = decompactify(compactify(p, params), params);
        double err = q.kind() == p.kind() ? (q.vector() - p.vector()).norm() / p.vector().norm() : 1.0;
        worst = std::max(worst, err);
      }
      long long violations = 0;
      for (long long i = 0; i < std::min<long long>(samples, 1000); ++i) {
        const CompactPoint a = random_point(static_cast<int>(i % 3));
        const CompactPoint b = random_point(static_cast<int>((i / 3) % 3));
        const CompactPoint c = random_point(static_cast<int>((i / 9) % 3));
        const double ab = metric(a, b, params), ba = metric(b, a, params), ac = metric(a, c, params),
                     bc = metric(b, c, params), aa = metric(a, a, params);
        if (ab != ba || aa != 0.0 || ac > ab + bc + 1e-12) ++violations;
      }
      bool monotone = true;
      const Eigen::VectorXd e = random_vec().normalized();
      double prev = 2.0;
      for (int k = -60; k <= 60; ++k) {
        const double z0 = compactify(CompactPoint::interior(e * std::pow(2.0, 0.25 * k)), params).zeta0;
        monotone = monotone && z0 < prev;
        prev = z0;
      }
      csv << d << ',' << rho << ',' << worst << ',' << violations << ',' << (monotone ? 1 : 0) << '\n';
      worst_all = std::max(worst_all, worst);
      violations_all += violations;
      monotone_all = monotone_all && monotone;
    }
  }
  checks.add("roundtrip", worst_all < tol, {{"max_relative_error", worst_all}, {"threshold", tol}});
  checks.add("metric axioms", violations_all == 0, {{"violations", violations_all}});
  checks.add("first coordinate decreasing along rays", monotone_all);
  out["roundtrip_max_relative_error"] = worst_all;

  // classify_limit on built-in and configured sequences, for every rho0.
  struct Seq {
    std::string name;
    std::vector<Eigen::VectorXd> xis;
    std::string expect;
  };
  std::vector<Seq> seqs;
  auto gen = [](int count, auto f) {
    std::vector<Eigen::VectorXd> v;
    for (int n = 1; n <= count; ++n) v.push_back(f(static_cast<double>(n)));
    return v;
  };
  seqs.push_back({"(1/n, 0)", gen(4096, [](double n) { return Eigen::Vector2d(1.0 / n, 0.0).eval(); }), "sigma_zero"});
  seqs.push_back({"(n, n)", gen(4096, [](double n) { return Eigen::Vector2d(n, n).eval(); }), "sigma_infinity"});
  seqs.push_back({"alternating (n,0),(1/n,0)",
                  gen(64, [](double n) {
                    return (static_cast<long long>(n) % 2 ? Eigen::Vector2d(n, 0.0) : Eigen::Vector2d(1.0 / n, 0.0)).eval();
                  }),
                  "divergent"});
  seqs.push_back({"(1 + 2^-n, 2)", gen(64, [](double n) { return Eigen::Vector2d(1.0 + std::exp2(-n), 2.0).eval(); }),
                  "interior"});
  if (g.has("sequences")) {
    for (const Node& s : g.at("sequences").elements()) {
      s.only({"name", "xis", "expect"});
      Seq q;
      q.name = s.at("name").string();
      for (const Node& x : s.at("xis").elements()) {
        const auto v = x.numbers();
        if (v.empty()) x.fail("empty vector");
        q.xis.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
        if (q.xis.back().size() != q.xis.front().size()) x.fail("dimension differs from the first entry");
      }
      if (q.xis.empty()) s.at("xis").fail("sequence must not be empty");
      q.expect = s.string_or("expect", "");
      if (!q.expect.empty() && q.expect != "sigma_zero" && q.expect != "sigma_infinity" && q.expect != "interior" &&
          q.expect != "divergent")
        s.at("expect").fail("expected sigma_zero, sigma_infinity, interior or divergent");
      seqs.push_back(std::move(q));
    }
  }
  std::ofstream ccsv(traces / "geometry_classify.csv");
  ccsv << "sequence,rho0,result,e_or_xi\n" << std::setprecision(17);
  json cls = json::array();
  for (const auto& s : seqs) {
    std::string first;
    bool consistent = true;
    for (double rho : rhos) {
      const CompactParams params(static_cast<int>(s.xis.front().size()), rho);
      const auto lim = classify_limit(s.xis, params);
      std::string res = "divergent";
      std::string vec;
      if (lim) {
        res = lim->kind() == PointKind::interior ? "interior"
              : lim->kind() == PointKind::sigma_zero ? "sigma_zero"
                                                     : "sigma_infinity";
        std::ostringstream os;
        os << std::setprecision(12);
        for (Eigen::Index i = 0; i < lim->vector().size(); ++i) os << (i ? " " : "") << lim->vector()(i);
        vec = os.str();
      }
      ccsv << '"' << s.name << "\"," << rho << ',' << res << ',' << vec << '\n';
      if (first.empty()) first = res;
      consistent = consistent && res == first;
    }
    cls.push_back({{"sequence", s.name}, {"result", first}, {"rho0_consistent", consistent}});
    checks.add("classify " + s.name + " consistent over rho0", consistent);
    if (!s.expect.empty()) checks.add("classify " + s.name, first == s.expect, {{"expected", s.expect}, {"got", first}});
  }
  out["classify"] = cls;
  log << "  roundtrip max relative error " << worst_all << "\n";
  return out;
}

// ---------------------------------------------------------------- symbol

json symbol_cmd(const Config& cfg, const RunOptions& opt, Checks& checks, const fs::path& traces, std::ostream& log) {
  const Node sec = cfg.section("symbol");
  sec.only({"symbols", "order", "lattice", "trace_dirs", "trace_max_exponent", "dilations"});
  MihlinLattice lat;
  if (sec.has("lattice")) {
    const Node l = sec.at("lattice");
    l.only({"j_min", "j_max", "dirs", "sub_radii"});
    lat.j_min = static_cast<int>(l.integer_or("j_min", lat.j_min));
    lat.j_max = static_cast<int>(l.integer_or("j_max", lat.j_max));
    lat.dirs = static_cast<int>(l.integer_or("dirs", lat.dirs));
    lat.sub_radii = static_cast<int>(l.integer_or("sub_radii", lat.sub_radii));
    if (lat.j_min > lat.j_max) l.fail("j_min must not exceed j_max");
    if (lat.sub_radii < 1 || lat.dirs < 1) l.fail("dirs and sub_radii must be positive");
  }
  const int tdirs = static_cast<int>(sec.integer_or("trace_dirs", 16));
  const int texp = static_cast<int>(sec.integer_or("trace_max_exponent", 12));
  if (tdirs < 1) sec.at("trace_dirs").fail("must be positive");
  if (texp < 1) sec.at("trace_max_exponent").fail("must be at least 1");
  const std::vector<double> dil = sec.has("dilations") ? sec.at("dilations").numbers() : std::vector<double>{0.1, 10.0};
  for (std::size_t i = 0; i < dil.size(); ++i)
    if (!(dil[i] > 0.0)) sec.at("dilations")[i].fail("dilation must be positive");

  const auto nodes = sec.at("symbols").elements();
  std::vector<Symbol> syms;
  std::vector<std::string> names;
  std::vector<int> orders;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    syms.push_back(cfg.symbol(nodes[i]));
    names.push_back(nodes[i].is_string() ? nodes[i].string() : syms.back().label() + "_" + std::to_string(i));
    const int d = syms.back().dim();
    const int order = static_cast<int>(sec.integer_or("order", d / 2 + 1));
    if (order < 0 || order > d / 2 + 1) sec.at("order").fail("order must lie in [0, floor(d/2)+1]");
    orders.push_back(order);
  }
  std::vector<json> results(syms.size());
  std::vector<Checks> local(syms.size());
  const double ttol = 1e-6 * opt.tolerance_scale;
  const double ftol = 0.05 * opt.tolerance_scale;
  parallel_for(syms.size(), opt.jobs, [&](std::size_t i) {
    const Symbol& s = syms[i];
    const std::string& name = names[i];
    Checks& ck = local[i];
    json r;
    r["name"] = name;
    r["family"] = to_string(s.family());
    r["label"] = s.label();
    const TraceReport tr = boundary_traces(s, tdirs, texp);
    r["trace0_exists"] = tr.has_trace0;
    r["trace_inf_exists"] = tr.has_trace_inf;
    r["trace0_residual"] = num(tr.residual0());
    r["trace_inf_residual"] = num(tr.residual_inf());
    {
      std::ofstream csv(traces / ("symbol_" + safe_name(name) + "_traces.csv"));
      csv << "direction,e1,e2,e3,trace0_re,trace0_im,trace_inf_re,trace_inf_im\n" << std::setprecision(17);
      for (std::size_t k = 0; k < tr.directions.size(); ++k) {
        csv << k;
        for (int a = 0; a < 3; ++a) csv << ',' << (a < tr.directions[k].size() ? tr.directions[k](a) : 0.0);
        csv << ',' << tr.trace0[k].real() << ',' << tr.trace0[k].imag() << ',' << tr.trace_inf[k].real() << ','
            << tr.trace_inf[k].imag() << '\n';
      }
    }
    auto compare = [&](bool attached, bool found, const std::vector<Complex>& sampled, double residual,
                       auto attached_fn, const char* which) {
      if (!attached) return;
      double dev = 0.0;
      for (std::size_t k = 0; k < tr.directions.size(); ++k)
        dev = std::max(dev, std::abs(sampled[k] - attached_fn(tr.directions[k])));
      const double bound = 2.0 * residual + ttol;
      ck.add(name + ": " + which + " matches attached trace", found && dev <= bound,
             {{"deviation", dev}, {"bound", bound}, {"sampled_trace_found", found}});
    };
    compare(s.has_trace0(), tr.has_trace0, tr.trace0, tr.residual0(), [&](const Freq& e) { return s.trace0(e); },
            "trace0");
    compare(s.has_trace_inf(), tr.has_trace_inf, tr.trace_inf, tr.residual_inf(),
            [&](const Freq& e) { return s.trace_inf(e); }, "trace_inf");

    const MihlinReport mr = mihlin_estimate(s, orders[i], lat);
    r["mihlin"] = {{"order", mr.order},
                   {"constant", num(mr.constant)},
                   {"ray_spread", num(mr.ray_spread)},
                   {"exact_derivatives", mr.exact_derivatives},
                   {"lattice", mr.grid_spec}};
    {
      std::ofstream csv(traces / ("symbol_" + safe_name(name) + "_mihlin.csv"));
      csv << "radius,value\n" << std::setprecision(17);
      for (const auto& sh : mr.per_shell) csv << sh.radius << ',' << sh.value << '\n';
    }
    json dj = json::array();
    for (double a : dil) {
      MihlinLattice scaled = lat;
      scaled.scale = lat.scale / a;
      const MihlinReport rescaled = mihlin_estimate(dilate(s, a), orders[i], scaled);
      const MihlinReport fixed = mihlin_estimate(dilate(s, a), orders[i], lat);
      const bool identical = rescaled.constant == mr.constant;
      const double rel = mr.constant > 0.0 ? std::abs(fixed.constant - mr.constant) / mr.constant : 0.0;
      dj.push_back({{"a", a}, {"rescaled_identical", identical}, {"fixed_relative_change", num(rel)}});
      ck.add(name + ": Mihlin constant invariant under dilation " + std::to_string(a), identical);
      ck.add(name + ": fixed-lattice constant stable under dilation " + std::to_string(a), rel < ftol,
             {{"relative_change", num(rel)}, {"threshold", ftol}});
    }
    r["dilations"] = dj;
    results[i] = std::move(r);
  });
  json out = json::array();
  for (std::size_t i = 0; i < syms.size(); ++i) {
    for (auto& c : local[i].list) checks.add(c["name"], c["pass"], c);
    log << "  " << names[i] << ": Mihlin constant " << results[i]["mihlin"]["constant"] << "\n";
    out.push_back(std::move(results[i]));
  }
  return out;
}

// ---------------------------------------------------------------- pair

json pair_cmd(const Config& cfg, const RunOptions& opt, Checks& checks, const fs::path& traces, std::ostream& log) {
  const Node sec = cfg.section("pair");
  sec.only({"cases", "compactness", "pushforward"});
  const Grid g = cfg.grid();
  json out;

  struct PairCase {
    std::string name;
    SequenceFamily u, v;
    Schedule omega = Schedule::constant(1.0);
    GridFunction phi1, phi2;
    Symbol s = Symbol::constant(1, 1.0);
    std::vector<long long> n;
    bool reference = false;
    double tolerance = 0.01;
    PairingOptions popt;
  };
  auto family_or_dual = [&](const Node& n, const SequenceFamily& u) {
    if (n.is_string() && n.string() == "dual") return dual_family(u);
    return cfg.family(n);
  };
  std::vector<PairCase> cases;
  if (sec.has("cases")) {
    for (const Node& c : sec.at("cases").elements()) {
      c.only({"name", "u", "v", "omega", "phi1", "phi2", "phi", "symbol", "n", "reference", "tolerance"});
      PairCase pc;
      pc.name = case_name(c, "case" + std::to_string(cases.size()));
      pc.u = cfg.family(c.at("u"));
      pc.v = c.has("v") ? family_or_dual(c.at("v"), pc.u) : pc.u;
      pc.omega = cfg.schedule(c.at("omega"));
      pc.phi1 = cfg.test_function(c.has("phi1") ? c.at("phi1") : c.at("phi"), g);
      pc.phi2 = cfg.test_function(c.has("phi2") ? c.at("phi2") : c.at("phi"), g);
      pc.s = cfg.symbol(c.at("symbol"));
      pc.n = c.has("n") ? cfg.n_schedule(c.at("n")) : dyadic_schedule(6);
      pc.reference = c.boolean_or("reference", true);
      pc.tolerance = c.number_or("tolerance", 0.01) * opt.tolerance_scale;
      pc.popt.tolerance *= opt.tolerance_scale;
      cases.push_back(std::move(pc));
    }
  }
  std::vector<json> results(cases.size());
  std::vector<Checks> local(cases.size());
  std::vector<std::ostringstream> logs(cases.size());
  parallel_for(cases.size(), opt.jobs, [&](std::size_t i) {
    const PairCase& c = cases[i];
    Checks& ck = local[i];
    guard_case(ck, c.name, logs[i], [&] {
      PairingTrace t = pairing(c.u, c.v, c.omega, c.phi1, c.phi2, c.s, c.n, g, c.popt);
      if (c.reference && t.ratio.kind != RatioKind::non_pure)
        t.reference = closed_form_reference(c.u, c.v, t.ratio, c.s, c.phi1, c.phi2, g);
      write_trace_csv(t, (traces / ("pair_" + safe_name(c.name) + ".csv")).string());
      json r = trace_json(t);
      r["name"] = c.name;
      r["symbol"] = c.s.label();
      r["u"] = c.u.describe();
      r["v"] = c.v.describe();
      results[i] = r;
      const double adj = t.max_adjoint_gap_relative();
      ck.add(c.name + ": adjoint identity", adj < 1e-10 * opt.tolerance_scale, {{"max_relative_gap", num(adj)}});
      if (t.reference) {
        const double rel = t.relative_error();
        ck.add(c.name + ": limit matches closed form", std::isfinite(rel) && rel < c.tolerance,
               {{"relative_error", num(rel)}, {"threshold", c.tolerance}, {"converged", t.limit_estimate.has_value()}});
      }
    });
  });
  json arr = json::array();
  for (std::size_t i = 0; i < cases.size(); ++i) {
    for (auto& c : local[i].list) checks.add(c["name"], c["pass"], c);
    log << logs[i].str();
    if (!results[i].is_null()) {
      log << "  " << cases[i].name << ": limit (" << results[i]["value"][0] << ", " << results[i]["value"][1] << ")";
      if (results[i].contains("relative_error")) log << ", relative error " << results[i]["relative_error"];
      log << "\n";
    }
    arr.push_back(results[i]);
  }
  out["cases"] = arr;

  if (sec.has("pushforward")) {
    json pf = json::array();
    for (const Node& c : sec.at("pushforward").elements()) {
      c.only({"name", "u", "v", "omegas", "phi1", "phi2", "phi", "symbol", "n", "tolerance"});
      const std::string name = case_name(c, "pushforward" + std::to_string(pf.size()));
      const SequenceFamily u = cfg.family(c.at("u"));
      const SequenceFamily v = c.has("v") ? family_or_dual(c.at("v"), u) : u;
      const GridFunction p1 = cfg.test_function(c.has("phi1") ? c.at("phi1") : c.at("phi"), g);
      const GridFunction p2 = cfg.test_function(c.has("phi2") ? c.at("phi2") : c.at("phi"), g);
      const Symbol s = cfg.symbol(c.at("symbol"));
      const auto ns = c.has("n") ? cfg.n_schedule(c.at("n")) : dyadic_schedule(6);
      const double tol = c.number_or("tolerance", 1e-8) * opt.tolerance_scale;
      json entry{{"name", name}};
      json vals = json::array();
      // Limits extrapolated under different ratio classes use different
      // step variables, so the comparison is made term by term against the
      // omega = 1 sequence instead.
      double spread = 0.0;
      bool ok = guard_case(checks, name, log, [&] {
        for (const Node& w : c.at("omegas").elements()) {
          const PushforwardCheck pc = pi_pushforward_check(u, v, cfg.schedule(w), p1, p2, s, ns, g);
          vals.push_back({{"value", cjson(pc.one_scale.value())}, {"gap_to_h_reference", num(pc.gap)}});
          spread = std::max(spread, pc.gap);
        }
      });
      entry["schedules"] = vals;
      entry["spread"] = num(spread);
      if (ok) checks.add(name + ": pushforward independent of omega", spread < tol, {{"spread", spread}, {"threshold", tol}});
      pf.push_back(entry);
    }
    out["pushforward"] = pf;
  }

  if (sec.has("compactness")) {
    json cp = json::array();
    for (const Node& c : sec.at("compactness").elements()) {
      c.only({"name", "u", "omega", "bank", "n", "expect_zero"});
      const std::string name = case_name(c, "compactness" + std::to_string(cp.size()));
      const SequenceFamily u = cfg.family(c.at("u"));
      const Schedule w = cfg.schedule(c.at("omega"));
      const TestBank bank = cfg.bank(c.at("bank"), g);
      const auto ns = c.has("n") ? cfg.n_schedule(c.at("n")) : dyadic_schedule(6);
      json entry{{"name", name}};
      guard_case(checks, name, log, [&] {
        const CompactnessVerdict v = strong_compactness_probe(u, g, w, bank, ns);
        entry["pairing_zero"] = v.pairing_zero;
        entry["norm_zero"] = v.norm_zero;
        entry["max_pairing_limit"] = num(v.max_pairing_limit);
        entry["max_norm_limit"] = num(v.max_norm_limit);
        checks.add(name + ": pairing and norm verdicts agree", v.agree(),
                   {{"pairing_zero", v.pairing_zero}, {"norm_zero", v.norm_zero}});
        if (c.has("expect_zero")) {
          const bool e = c.at("expect_zero").boolean();
          checks.add(name + ": verdict as expected", v.pairing_zero == e, {{"expected_zero", e}});
        }
        log << "  " << name << ": pairing " << (v.pairing_zero ? "zero" : "nonzero") << ", norm "
            << (v.norm_zero ? "zero" : "nonzero") << "\n";
      });
      cp.push_back(entry);
    }
    out["compactness"] = cp;
  }
  return out;
}

// ---------------------------------------------------------------- wigner

json wigner_cmd(const Config& cfg, const RunOptions& opt, Checks& checks, const fs::path& traces, std::ostream& log) {
  const Node sec = cfg.section("wigner");
  sec.only({"grid", "identity", "quantisation_gap", "commutator", "seminorms"});
  const Grid g = sec.has("grid") ? cfg.grid(sec.at("grid")) : cfg.grid();
  json out;
  auto case_grid = [&](const Node& c) { return c.has("grid") ? cfg.grid(c.at("grid")) : g; };
  auto qparams = [](const Node& c, double t_default) {
    QuantParams q;
    q.t = c.number_or("t", t_default);
    q.omega = c.number_or("omega", 1.0);
    try {
      q.validate();
    } catch (const std::exception& e) {
      c.fail(e.what());
    }
    return q;
  };

  if (sec.has("identity")) {
    json arr = json::array();
    const double tol = 1e-8 * opt.tolerance_scale;
    for (const Node& c : sec.at("identity").elements()) {
      c.only({"name", "grid", "symbol", "u", "v", "t", "omega", "write_wigner"});
      const std::string name = case_name(c, "identity" + std::to_string(arr.size()));
      const Grid cg = case_grid(c);
      const PhaseSymbol a = cfg.phase_symbol(c.at("symbol"), cg.d);
      const GridFunction u = cfg.input_function(c.at("u"), cg);
      const GridFunction v = c.has("v") ? cfg.input_function(c.at("v"), cg) : u;
      const QuantParams q = qparams(c, 0.5);
      json entry{{"name", name}, {"t", q.t}, {"omega", q.omega}};
      guard_case(checks, name, log, [&] {
        const PairingIdentity id = pairing_identity(u, v, q, a);
        entry["wigner_side"] = cjson(id.wigner_side);
        entry["operator_side"] = cjson(id.operator_side);
        entry["relative_gap"] = num(id.relative());
        checks.add(name + ": pairing identity", id.relative() < tol, {{"relative_gap", num(id.relative())}, {"threshold", tol}});
        if (c.boolean_or("write_wigner", false))
          write_wigner_csv(wigner(u, v, q), (traces / ("wigner_" + safe_name(name) + ".csv")).string());
        log << "  " << name << ": relative gap " << id.relative() << "\n";
      });
      arr.push_back(entry);
    }
    out["identity"] = arr;
  }

  auto write_profile = [&](const std::string& file, const NormProfile& p) {
    std::ofstream csv(traces / file);
    csv << "omega,norm\n" << std::setprecision(17);
    for (std::size_t i = 0; i < p.omegas.size(); ++i) csv << p.omegas[i] << ',' << p.norms[i] << '\n';
  };
  if (sec.has("quantisation_gap")) {
    json arr = json::array();
    for (const Node& c : sec.at("quantisation_gap").elements()) {
      c.only({"name", "grid", "symbol", "u", "t", "s", "omegas", "p", "slope_range"});
      const std::string name = case_name(c, "gap" + std::to_string(arr.size()));
      const Grid cg = case_grid(c);
      const PhaseSymbol a = cfg.phase_symbol(c.at("symbol"), cg.d);
      const GridFunction u = cfg.input_function(c.at("u"), cg);
      const double t = c.number_or("t", 1.0), s = c.number_or("s", 0.5);
      const auto omegas = c.at("omegas").numbers();
      std::vector<double> range{0.8, 1.2};
      if (c.has("slope_range")) {
        range = c.at("slope_range").numbers();
        if (range.size() != 2 || range[0] > range[1]) c.at("slope_range").fail("expected [low, high]");
      }
      json entry{{"name", name}};
      guard_case(checks, name, log, [&] {
        NormProfile p;
        try {
          p = quantisation_gap(a, t, s, omegas, u, c.number_or("p", 2.0));
        } catch (const DomainError& e) {
          c.fail(e.what());
        }
        write_profile("quantisation_gap_" + safe_name(name) + ".csv", p);
        entry["slope"] = num(p.slope);
        entry["identically_zero"] = p.identically_zero;
        entry["norms"] = p.norms;
        const bool ok = p.identically_zero || (p.slope >= range[0] && p.slope <= range[1]);
        checks.add(name + ": quantisation gap slope", ok, {{"slope", num(p.slope)}, {"range", range}});
        log << "  " << name << ": slope " << p.slope << "\n";
      });
      arr.push_back(entry);
    }
    out["quantisation_gap"] = arr;
  }

  if (sec.has("commutator")) {
    json arr = json::array();
    for (const Node& c : sec.at("commutator").elements()) {
      c.only({"name", "grid", "a", "b", "u", "t", "omegas", "p"});
      const std::string name = case_name(c, "commutator" + std::to_string(arr.size()));
      const Grid cg = case_grid(c);
      const PhaseSymbol a = cfg.phase_symbol(c.at("a"), cg.d);
      const PhaseSymbol b = cfg.phase_symbol(c.at("b"), cg.d);
      const GridFunction u = cfg.input_function(c.at("u"), cg);
      const auto omegas = c.at("omegas").numbers();
      json entry{{"name", name}};
      guard_case(checks, name, log, [&] {
        const NormProfile p = commutator_profile(a, b, c.number_or("t", 0.5), omegas, u, c.number_or("p", 2.0));
        write_profile("commutator_" + safe_name(name) + ".csv", p);
        bool monotone = true;
        for (std::size_t i = 1; i < p.norms.size(); ++i) monotone = monotone && p.norms[i] <= 1.1 * p.norms[i - 1];
        entry["norms"] = p.norms;
        entry["slope"] = num(p.slope);
        checks.add(name + ": commutator decreases with omega", monotone && p.norms.back() < p.norms.front());
        log << "  " << name << ": commutator slope " << p.slope << "\n";
      });
      arr.push_back(entry);
    }
    out["commutator"] = arr;
  }

  if (sec.has("seminorms")) {
    json arr = json::array();
    for (const Node& c : sec.at("seminorms").elements()) {
      c.only({"name", "symbol", "xi_radius", "xi_points"});
      const std::string name = case_name(c, "seminorms" + std::to_string(arr.size()));
      const PhaseSymbol a = cfg.phase_symbol(c.at("symbol"), g.d);
      json vals = json::array();
      for (const auto& s : sampled_seminorms(a, g, c.number_or("xi_radius", 8.0), static_cast<int>(c.integer_or("xi_points", 33))))
        vals.push_back({{"x_order", s.x_order}, {"xi_order", s.xi_order}, {"value", num(s.value)}});
      arr.push_back({{"name", name}, {"values", vals}});
    }
    out["seminorms"] = arr;
  }
  return out;
}

// ---------------------------------------------------------------- localize

json profile_json(const CompactnessProfile& p) {
  return {{"n", p.n}, {"norms", p.norms}, {"decreasing", p.decreasing}, {"compact", p.compact}, {"ratio", num(p.ratio())}};
}

// A missing bank or the string "default" selects default_localisation_bank.
TestBank bank_or_default(const Config& cfg, const Node& c, const Grid& g) {
  if (!c.has("bank")) return default_localisation_bank(g);
  const Node b = c.at("bank");
  if (b.is_string()) {
    if (b.string() != "default") b.fail("the only named bank is 'default'");
    return default_localisation_bank(g);
  }
  return cfg.bank(b, g);
}

json localize_cmd(const Config& cfg, const RunOptions& opt, Checks& checks, const fs::path& traces, std::ostream& log) {
  const Node sec = cfg.section("localize");
  sec.only({"compactness", "residuals", "worked_example"});
  json out;

  if (sec.has("compactness")) {
    json arr = json::array();
    const Grid g = cfg.grid();
    for (const Node& c : sec.at("compactness").elements()) {
      c.only({"name", "family", "epsilon", "m", "p", "n", "expect_compact", "phi", "plateau_reference", "plateau_tolerance"});
      const std::string name = case_name(c, "compactness" + std::to_string(arr.size()));
      const SequenceFamily f = cfg.family(c.at("family"));
      const Schedule eps = cfg.schedule(c.at("epsilon"));
      const auto ns = c.has("n") ? cfg.n_schedule(c.at("n")) : dyadic_schedule(6);
      const int m = static_cast<int>(c.integer_or("m", 1));
      if (m < 1) c.at("m").fail("must be at least 1");
      std::optional<GridFunction> phi;
      if (c.has("phi")) phi = cfg.test_function(c.at("phi"), g);
      json entry{{"name", name}};
      guard_case(checks, name, log, [&] {
        std::vector<GridFunction> terms;
        for (long long n : ns) terms.push_back(term(f, n, g));
        const CompactnessProfile p =
            eps_compactness_norms(terms, ns, eps, m, c.number_or("p", 2.0), phi ? &*phi : nullptr);
        entry["profile"] = profile_json(p);
        std::ofstream csv(traces / ("compactness_" + safe_name(name) + ".csv"));
        csv << "n,epsilon_n,norm\n" << std::setprecision(17);
        for (std::size_t i = 0; i < ns.size(); ++i) csv << ns[i] << ',' << eps(ns[i]) << ',' << p.norms[i] << '\n';
        if (c.has("expect_compact")) {
          const bool e = c.at("expect_compact").boolean();
          checks.add(name + ": compactness verdict", p.compact == e, {{"expected", e}, {"ratio", num(p.ratio())}});
        }
        if (c.has("plateau_reference")) {
          const double ref = c.at("plateau_reference").number();
          const double tol = c.number_or("plateau_tolerance", 0.05) * opt.tolerance_scale;
          double worst = 0.0;
          for (double v : p.norms) worst = std::max(worst, std::abs(v - ref) / std::abs(ref));
          checks.add(name + ": plateau matches reference", worst < tol,
                     {{"max_relative_deviation", num(worst)}, {"reference", ref}, {"threshold", tol}});
        }
        log << "  " << name << ": " << (p.compact ? "compact" : "not compact") << " (final/initial " << p.ratio()
            << ")\n";
      });
      arr.push_back(entry);
    }
    out["compactness"] = arr;
  }

  if (sec.has("residuals")) {
    json arr = json::array();
    for (const Node& c : sec.at("residuals").elements()) {
      c.only({"name", "grid", "system", "u", "v", "omega", "bank", "n", "expect", "threshold"});
      const std::string name = case_name(c, "residual" + std::to_string(arr.size()));
      const Grid g = c.has("grid") ? cfg.grid(c.at("grid")) : cfg.grid();
      const PdeSystem sys = cfg.system(c.at("system"));
      std::vector<SequenceFamily> u, v;
      for (const Node& f : c.at("u").elements()) u.push_back(cfg.family(f));
      for (const Node& f : c.at("v").elements()) v.push_back(cfg.family(f));
      const Schedule w = cfg.schedule(c.at("omega"));
      const TestBank bank = bank_or_default(cfg, c, g);
      const auto ns = c.has("n") ? cfg.n_schedule(c.at("n")) : dyadic_schedule(6);
      const std::string expect = c.string_or("expect", "any");
      if (expect != "small" && expect != "large" && expect != "any") c.at("expect").fail("expected small, large or any");
      const double thr = c.number_or("threshold", 1e-2) * opt.tolerance_scale;
      json entry{{"name", name}};
      guard_case(checks, name, log, [&] {
        const ResidualTable t = localisation_residual(u, v, sys, w, bank, ns, g);
        write_residual_csv(t, (traces / ("residual_" + safe_name(name) + ".csv")).string());
        const double rel = t.max_relative();
        entry["case"] = t.case_tag;
        entry["applicable"] = t.applicable;
        if (!t.applicable) entry["inapplicable_reason"] = t.inapplicable_reason;
        entry["max_relative_residual"] = num(rel);
        json profiles = json::array();
        for (const auto& p : t.rhs_profiles) profiles.push_back(profile_json(p));
        entry["rhs_profiles"] = profiles;
        if (expect == "small")
          checks.add(name + ": residuals small", t.applicable && rel < thr,
                     {{"max_relative", num(rel)}, {"threshold", thr}, {"applicable", t.applicable}});
        if (expect == "large")
          checks.add(name + ": residuals bounded away from zero", rel >= thr, {{"max_relative", num(rel)}, {"threshold", thr}});
        log << "  " << name << ": max relative residual " << rel << (t.applicable ? "" : " (localisation inapplicable)")
            << "\n";
      });
      arr.push_back(entry);
    }
    out["residuals"] = arr;
  }

  if (sec.has("worked_example")) {
    const Node c = sec.at("worked_example");
    c.only({"grid", "p", "u1", "u2", "v1", "v2", "n", "bank", "a1", "a2", "expect"});
    const Grid g = c.has("grid") ? cfg.grid(c.at("grid")) : cfg.grid();
    if (g.d != 2) (c.has("grid") ? c.at("grid") : cfg.section("grid")).fail("the worked example needs d = 2");
    WorkedExampleOptions wo;
    wo.a1 = c.complex_or("a1", wo.a1);
    wo.a2 = c.complex_or("a2", wo.a2);
    wo.residual_ratio *= opt.tolerance_scale;
    const TestBank bank = bank_or_default(cfg, c, g);
    const auto ns = c.has("n") ? cfg.n_schedule(c.at("n")) : std::vector<long long>{1, 2, 4, 8, 16, 32};
    const Profile u1 = cfg.profile(c.at("u1")), u2 = cfg.profile(c.at("u2")), v1 = cfg.profile(c.at("v1")),
                  v2 = cfg.profile(c.at("v2"));
    const double p = c.number_or("p", 2.0);
    json entry;
    guard_case(checks, "worked example", log, [&] {
      const WorkedExampleVerdict v = worked_example_53(p, u1, u2, v1, v2, ns, g, bank, wo);
      entry["status"] = v.status;
      entry["rhs_compact"] = v.rhs_compact;
      entry["products_vanish"] = v.products_vanish;
      entry["product_pairings"] = v.product_pairings;
      entry["residuals_small"] = v.residuals_small;
      entry["mu_zero_implied"] = v.mu_zero_implied;
      entry["common_zero"] = {{"margin", num(v.common_zero.margin)},
                              {"xi", std::vector<double>(v.common_zero.xi.data(), v.common_zero.xi.data() + v.common_zero.xi.size())}};
      entry["notes"] = v.notes;
      if (v.status != "inconclusive") {
        write_residual_csv(v.residual_u, (traces / "worked_example_residual_u.csv").string());
        write_residual_csv(v.residual_v, (traces / "worked_example_residual_v.csv").string());
      }
      const std::string expect = c.string_or("expect", "pass");
      checks.add("worked example status", v.status == expect, {{"expected", expect}, {"got", v.status}});
      log << "  worked example: " << v.status << "\n";
      for (const auto& n : v.notes) log << "    " << n << "\n";
    });
    out["worked_example"] = entry;
  }
  return out;
}

// ---------------------------------------------------------------- report

int report_cmd(const RunOptions& opt, std::ostream& log) {
  fs::path path = opt.config;
  if (fs::is_directory(path)) path /= "summary.json";
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open summary '" + path.string() + "'");
  json s;
  try {
    s = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid summary JSON: ") + e.what());
  }
  if (!s.is_object() || !s.contains("checks") || !s["checks"].is_array())
    throw ConfigError("checks", "summary has no check list");
  std::ostringstream os;
  os << "oslab " << s.value("subcommand", std::string("?")) << " run: " << s.value("status", std::string("?")) << "\n";
  std::size_t passed = 0;
  for (const auto& c : s["checks"]) {
    const bool ok = c.value("pass", false);
    passed += ok;
    os << "  [" << (ok ? "PASS" : "FAIL") << "] " << c.value("name", std::string("?"));
    for (auto it = c.begin(); it != c.end(); ++it) {
      if (it.key() == "name" || it.key() == "pass") continue;
      os << "  " << it.key() << "=" << it.value().dump();
    }
    os << "\n";
  }
  os << passed << "/" << s["checks"].size() << " checks passed\n";
  log << os.str();
  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    std::ofstream(opt.out / "report.txt") << os.str();
  }
  return kExitOk;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  out << j.dump(2) << '\n';
}

}  // namespace

int run(const RunOptions& opt, std::ostream& log) {
  if (opt.subcommand == "report") return report_cmd(opt, log);
  if (opt.jobs < 1) throw ConfigError("--jobs", "must be at least 1");
  if (!(opt.tolerance_scale > 0.0)) throw ConfigError("--tolerance-scale", "must be positive");

  const Config cfg = Config::load(opt.config);
  const fs::path traces = opt.out / "traces";
  fs::create_directories(traces);

  json manifest;
  manifest["tool"] = "oslab";
  manifest["version"] = kVersion;
  manifest["subcommand"] = opt.subcommand;
  manifest["config_file"] = opt.config.filename().string();
  manifest["config_hash"] = "fnv1a64:" + fnv1a_hex(cfg.text());
  manifest["seed"] = opt.seed;
  manifest["jobs"] = opt.jobs;
  manifest["tolerance_scale"] = opt.tolerance_scale;
  manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
  write_json(opt.out / "manifest.json", manifest);

  Checks checks;
  json results;
  log << "oslab " << opt.subcommand << " (" << opt.config.string() << ")\n";
  if (opt.subcommand == "geometry")
    results = geometry(cfg, opt, checks, traces, log);
  else if (opt.subcommand == "symbol")
    results = symbol_cmd(cfg, opt, checks, traces, log);
  else if (opt.subcommand == "pair")
    results = pair_cmd(cfg, opt, checks, traces, log);
  else if (opt.subcommand == "wigner")
    results = wigner_cmd(cfg, opt, checks, traces, log);
  else if (opt.subcommand == "localize")
    results = localize_cmd(cfg, opt, checks, traces, log);
  else
    throw ConfigError("", "unknown subcommand '" + opt.subcommand + "'");

  json summary;
  summary["subcommand"] = opt.subcommand;
  summary["status"] = checks.ok ? "pass" : "fail";
  summary["checks"] = checks.list;
  summary["results"] = results;
  write_json(opt.out / "summary.json", summary);
  std::size_t failed = 0;
  for (const auto& c : checks.list) failed += !c["pass"].get<bool>();
  log << (checks.ok ? "all " + std::to_string(checks.list.size()) + " checks passed"
                    : std::to_string(failed) + " of " + std::to_string(checks.list.size()) + " checks failed")
      << "\n";
  return checks.ok ? kExitOk : kExitCheckFailed;
}

}  // namespace oslab::cli

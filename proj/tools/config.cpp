#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace oslab::cli {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const char* type_name(const json& j) { return j.type_name(); }

// Library constructors signal bad parameters with DomainError or
// UsageError; inside the config layer these become schema errors.
template <class F>
auto guarded(const Node& n, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DomainError& e) {
    n.fail(e.what());
  } catch (const UsageError& e) {
    n.fail(e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------- Node

bool Node::has(const std::string& key) const { return v_->is_object() && v_->contains(key); }

Node Node::at(const std::string& key) const {
  if (!v_->is_object()) fail(std::string("expected an object, found ") + type_name(*v_));
  auto it = v_->find(key);
  if (it == v_->end()) throw ConfigError(join(path_, key), "required field is missing");
  return Node(&*it, join(path_, key));
}

Node Node::operator[](std::size_t i) const {
  if (!v_->is_array()) fail(std::string("expected an array, found ") + type_name(*v_));
  if (i >= v_->size()) fail("index " + std::to_string(i) + " out of range");
  return Node(&(*v_)[i], path_ + "[" + std::to_string(i) + "]");
}

std::size_t Node::size() const {
  if (!v_->is_array()) fail(std::string("expected an array, found ") + type_name(*v_));
  return v_->size();
}

std::vector<Node> Node::elements() const {
  std::vector<Node> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i]);
  return out;
}

double Node::number() const {
  if (!v_->is_number()) fail(std::string("expected a number, found ") + type_name(*v_));
  return v_->get<double>();
}

long long Node::integer() const {
  if (!v_->is_number_integer()) fail(std::string("expected an integer, found ") + type_name(*v_));
  return v_->get<long long>();
}

bool Node::boolean() const {
  if (!v_->is_boolean()) fail(std::string("expected a boolean, found ") + type_name(*v_));
  return v_->get<bool>();
}

std::string Node::string() const {
  if (!v_->is_string()) fail(std::string("expected a string, found ") + type_name(*v_));
  return v_->get<std::string>();
}

Complex Node::complex() const {
  if (v_->is_number()) return {v_->get<double>(), 0.0};
  if (v_->is_array() && v_->size() == 2 && (*v_)[0].is_number() && (*v_)[1].is_number())
    return {(*v_)[0].get<double>(), (*v_)[1].get<double>()};
  fail("expected a number or a pair [re, im]");
}

std::vector<double> Node::numbers() const {
  std::vector<double> out;
  for (const auto& e : elements()) out.push_back(e.number());
  return out;
}

std::vector<long long> Node::integers() const {
  std::vector<long long> out;
  for (const auto& e : elements()) out.push_back(e.integer());
  return out;
}

double Node::number_or(const std::string& key, double fallback) const {
  return has(key) ? at(key).number() : fallback;
}
long long Node::integer_or(const std::string& key, long long fallback) const {
  return has(key) ? at(key).integer() : fallback;
}
bool Node::boolean_or(const std::string& key, bool fallback) const { return has(key) ? at(key).boolean() : fallback; }
std::string Node::string_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? at(key).string() : fallback;
}
Complex Node::complex_or(const std::string& key, Complex fallback) const {
  return has(key) ? at(key).complex() : fallback;
}

void Node::only(std::initializer_list<const char*> allowed) const {
  if (!v_->is_object()) fail(std::string("expected an object, found ") + type_name(*v_));
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = v_->begin(); it != v_->end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(join(path_, it.key()), "unknown field");
}

// ---------------------------------------------------------------- Config

Config Config::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file '" + file.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), file.parent_path());
}

Config Config::parse(const std::string& text, std::filesystem::path base_dir) {
  Config c;
  c.text_ = text;
  c.base_dir_ = std::move(base_dir);
  try {
    c.doc_ = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!c.doc_.is_object()) throw ConfigError("", "top level must be an object");
  return c;
}

Node Config::section(const std::string& key) const { return root().at(key); }

Node Config::deref(const Node& n, const char* sec) const {
  if (!n.is_string()) return n;
  const std::string name = n.string();
  if (!doc_.contains(sec) || !doc_[sec].is_object() || !doc_[sec].contains(name))
    n.fail("unknown " + std::string(sec) + " entry '" + name + "'");
  return section(sec).at(name);
}

Grid Config::grid() const { return grid(section("grid")); }

Grid Config::grid(const Node& n) const {
  n.only({"d", "L", "N"});
  const Node nn = n.at("N");
  const long long N = nn.integer();
  if (N < 8 || (N & (N - 1)) != 0) nn.fail("N must be a power of two, at least 8");
  const Node dn = n.at("d");
  const long long d = dn.integer();
  if (d < 1 || d > kMaxDim) dn.fail("d must lie in 1..3");
  const Node ln = n.at("L");
  const double L = ln.number();
  if (!(L > 0.0)) ln.fail("L must be positive");
  return guarded(n, [&] { return Grid(static_cast<int>(d), L, static_cast<int>(N)); });
}

Point Config::point(const Node& n, int d) const {
  const auto v = n.numbers();
  if (static_cast<int>(v.size()) != d) n.fail("expected " + std::to_string(d) + " components");
  Point p(d);
  for (int i = 0; i < d; ++i) p(i) = v[i];
  return p;
}

Schedule Config::schedule(const Node& in) const {
  const Node n = deref(in, "schedules");
  const std::string kind = n.at("kind").string();
  return guarded(n, [&]() -> Schedule {
    if (kind == "power") {
      n.only({"kind", "scale", "exponent"});
      return Schedule::power(n.number_or("scale", 1.0), n.at("exponent").number());
    }
    if (kind == "log") {
      n.only({"kind", "scale"});
      return Schedule::log(n.number_or("scale", 1.0));
    }
    if (kind == "constant") {
      n.only({"kind", "value"});
      return Schedule::constant(n.at("value").number());
    }
    if (kind == "alternating") {
      n.only({"kind", "odd", "even"});
      return Schedule::alternating(schedule(n.at("odd")), schedule(n.at("even")));
    }
    if (kind == "table") {
      n.only({"kind", "n", "values"});
      return Schedule::table(n.at("n").integers(), n.at("values").numbers());
    }
    n.at("kind").fail("unknown schedule kind '" + kind + "'");
  });
}

Profile Config::profile(const Node& in) const {
  const Node n = deref(in, "profiles");
  const std::string kind = n.at("kind").string();
  Profile p = guarded(n, [&]() -> Profile {
    if (kind == "gaussian") {
      n.only({"kind", "width", "amplitude", "center"});
      return Profile::gaussian(n.number_or("width", 1.0));
    }
    if (kind == "bump") {
      n.only({"kind", "radius", "amplitude", "center"});
      return Profile::bump(n.number_or("radius", 1.0));
    }
    if (kind == "constant") {
      n.only({"kind", "value", "amplitude", "center"});
      return Profile::constant(n.complex_or("value", 1.0));
    }
    if (kind == "gaussian_derivative") {
      n.only({"kind", "width", "axis", "amplitude", "center"});
      return Profile::gaussian_derivative(n.number_or("width", 1.0), static_cast<int>(n.integer_or("axis", 0)));
    }
    if (kind == "sampled") {
      n.only({"kind", "file", "grid", "amplitude", "center"});
      const Grid g = n.has("grid") ? grid(n.at("grid")) : grid();
      const auto path = resolve_path(n.at("file").string());
      try {
        return Profile::sampled(read_csv(g, path.string()));
      } catch (const std::exception& e) {
        n.at("file").fail(e.what());
      }
    }
    n.at("kind").fail("unknown profile kind '" + kind + "'");
  });
  if (n.has("amplitude")) p = p.scaled(n.at("amplitude").complex());
  return p;
}

SequenceFamily Config::family(const Node& in) const {
  const Node n = deref(in, "families");
  const std::string kind = n.at("kind").string();
  const int d = grid().d;
  SequenceFamily f = guarded(n, [&]() -> SequenceFamily {
    if (kind == "concentration") {
      n.only({"kind", "profile", "center", "scale", "p", "canonical_dual", "resolution_cells"});
      const Point z = n.has("center") ? point(n.at("center"), d) : Point(Point::Zero(d));
      return SequenceFamily::concentration(profile(n.at("profile")), z, schedule(n.at("scale")), n.number_or("p", 2.0));
    }
    if (kind == "oscillation") {
      n.only({"kind", "profile", "wavevector", "center", "scale", "p", "canonical_dual", "resolution_cells"});
      SequenceFamily f = SequenceFamily::oscillation(profile(n.at("profile")), point(n.at("wavevector"), d),
                                                     schedule(n.at("scale")), n.number_or("p", 2.0));
      if (n.has("center")) f.center = point(n.at("center"), d);
      return f;
    }
    if (kind == "composite53") {
      n.only({"kind", "first", "second", "p", "role", "canonical_dual", "resolution_cells"});
      const std::string role = n.string_or("role", "primal");
      if (role != "primal" && role != "dual") n.at("role").fail("role must be 'primal' or 'dual'");
      return SequenceFamily::composite53(profile(n.at("first")), profile(n.at("second")), n.number_or("p", 2.0),
                                         role == "primal" ? Role::primal : Role::dual);
    }
    if (kind == "scaled") {
      n.only({"kind", "profile", "center", "amplitude", "p", "canonical_dual", "resolution_cells"});
      const Point z = n.has("center") ? point(n.at("center"), d) : Point(Point::Zero(d));
      return SequenceFamily::scaled(profile(n.at("profile")), z, schedule(n.at("amplitude")), n.number_or("p", 2.0));
    }
    n.at("kind").fail("unknown family kind '" + kind + "'");
  });
  if (n.boolean_or("canonical_dual", false)) f = dual_family(f);
  if (n.has("resolution_cells")) {
    const Node rc = n.at("resolution_cells");
    f.resolution_cells = rc.number();
    if (!(f.resolution_cells > 0.0)) rc.fail("must be positive");
  }
  return f;
}

Symbol Config::symbol(const Node& in) const {
  const Node n = deref(in, "symbols");
  const std::string fam = n.at("family").string();
  const int d = n.has("d") ? static_cast<int>(n.at("d").integer()) : grid().d;
  auto multi_index = [&](const Node& a) {
    const auto v = a.integers();
    if (static_cast<int>(v.size()) != d) a.fail("expected " + std::to_string(d) + " components");
    MultiIndex m{};
    for (int i = 0; i < d; ++i) m[i] = static_cast<int>(v[i]);
    return m;
  };
  Symbol s = guarded(n, [&]() -> Symbol {
    if (fam == "constant") {
      n.only({"family", "d", "value", "shift", "dilation", "scale", "zero_value", "label"});
      return Symbol::constant(d, n.complex_or("value", 1.0));
    }
    if (fam == "homogeneous") {
      n.only({"family", "d", "c0", "a", "B", "shift", "dilation", "scale", "zero_value", "label"});
      SpherePolynomial poly;
      poly.c0 = n.complex_or("c0", 0.0);
      if (n.has("a")) {
        const Node a = n.at("a");
        if (static_cast<int>(a.size()) != d) a.fail("expected " + std::to_string(d) + " components");
        poly.a.resize(d);
        for (int i = 0; i < d; ++i) poly.a(i) = a[i].complex();
      }
      if (n.has("B")) {
        const Node b = n.at("B");
        if (static_cast<int>(b.size()) != d) b.fail("expected " + std::to_string(d) + " rows");
        poly.B.resize(d, d);
        for (int i = 0; i < d; ++i) {
          const Node row = b[i];
          if (static_cast<int>(row.size()) != d) row.fail("expected " + std::to_string(d) + " columns");
          for (int j = 0; j < d; ++j) poly.B(i, j) = row[j].complex();
        }
      }
      return Symbol::homogeneous(d, poly);
    }
    if (fam == "gaussian" || fam == "schwartz") {
      n.only({"family", "d", "width", "shift", "dilation", "scale", "zero_value", "label"});
      return Symbol::gaussian(d, n.number_or("width", 1.0));
    }
    if (fam == "rational") {
      n.only({"family", "d", "alpha", "l", "m", "shift", "dilation", "scale", "zero_value", "label"});
      const MultiIndex alpha = n.has("alpha") ? multi_index(n.at("alpha")) : MultiIndex{};
      return Symbol::rational(d, alpha, static_cast<int>(n.integer_or("l", 0)), static_cast<int>(n.at("m").integer()));
    }
    if (fam == "sobolev_weight") {
      n.only({"family", "d", "m", "reciprocal", "shift", "dilation", "scale", "zero_value", "label"});
      return Symbol::sobolev_weight(d, n.at("m").number(), n.boolean_or("reciprocal", false));
    }
    if (fam == "sampled") {
      n.only({"family", "d", "file", "shift", "dilation", "scale", "zero_value", "label"});
      try {
        return Symbol::sampled(load_sampled_table(resolve_path(n.at("file").string()).string(), d));
      } catch (const DomainError&) {
        throw;
      } catch (const std::exception& e) {
        n.at("file").fail(e.what());
      }
    }
    if (fam == "product" || fam == "sum") {
      n.only({"family", "d", "factors", "terms", "shift", "dilation", "scale", "zero_value", "label"});
      const Node parts = n.at(fam == "product" ? "factors" : "terms");
      if (parts.size() == 0) parts.fail("needs at least one entry");
      Symbol acc = symbol(parts[0]);
      for (std::size_t i = 1; i < parts.size(); ++i) {
        Symbol next = symbol(parts[i]);
        acc = fam == "product" ? acc * next : acc + next;
      }
      return acc;
    }
    n.at("family").fail("unknown symbol family '" + fam + "'");
  });
  if (n.has("shift")) {
    const Node sh = n.at("shift");
    const auto v = sh.numbers();
    if (static_cast<int>(v.size()) != d) sh.fail("expected " + std::to_string(d) + " components");
    Freq f(d);
    for (int i = 0; i < d; ++i) f(i) = v[i];
    s = guarded(sh, [&] { return translate(s, f); });
  }
  if (n.has("dilation")) {
    const Node a = n.at("dilation");
    s = guarded(a, [&] { return dilate(s, a.number()); });
  }
  if (n.has("scale")) s = s.scaled(n.at("scale").complex());
  if (n.has("zero_value")) s = s.with_zero_value(n.at("zero_value").complex());
  if (n.has("label")) s = s.with_label(n.at("label").string());
  else if (in.is_string()) s = s.with_label(in.string());
  return s;
}

GridFunction Config::test_function(const Node& in, const Grid& g) const {
  const Node n = deref(in, "tests");
  const Node pn = n.has("profile") ? n.at("profile") : n;
  if (n.has("profile")) n.only({"profile", "center", "frequency"});
  const Profile p = profile(pn);
  Point c = Point::Zero(g.d);
  if (n.has("center")) c = point(n.at("center"), g.d);
  else if (pn.is_object() && pn.has("center")) c = point(pn.at("center"), g.d);
  return GridFunction::sample(g, [&](const Point& x) { return p(wrap(Point(x - c), g.L)); });
}

GridFunction Config::input_function(const Node& n, const Grid& g) const {
  GridFunction u = test_function(n, g);
  const Node base = deref(n, "tests");
  if (base.has("frequency")) {
    const Point k = point(base.at("frequency"), g.d);
    u = multiply_pointwise(GridFunction::sample(g, [&](const Point& x) { return std::polar(1.0, 2.0 * M_PI * x.dot(k)); }), u);
  }
  return u;
}

PhaseSymbol Config::phase_symbol(const Node& n, int d) const {
  const std::string st = n.at("structure").string();
  auto xpart = [&](const Node& x) {
    const Node pn = x.has("profile") ? x.at("profile") : x;
    const Profile p = profile(pn);
    Point c = Point::Zero(d);
    if (x.has("center")) c = point(x.at("center"), d);
    return std::function<Complex(const Point&)>([p, c](const Point& y) { return p(Point(y - c)); });
  };
  return guarded(n, [&]() -> PhaseSymbol {
    PhaseSymbol a = [&]() -> PhaseSymbol {
      if (st == "separable") {
        n.only({"structure", "x", "xi", "bandwidth", "label"});
        return PhaseSymbol::separable(xpart(n.at("x")), symbol(n.at("xi")), n.string_or("label", "separable"));
      }
      if (st == "x_only") {
        n.only({"structure", "x", "bandwidth", "label"});
        return PhaseSymbol::x_only(d, xpart(n.at("x")), n.string_or("label", "x-only"));
      }
      if (st == "xi_only") {
        n.only({"structure", "xi", "bandwidth", "label"});
        return PhaseSymbol::xi_only(symbol(n.at("xi")));
      }
      if (st == "sum") {
        n.only({"structure", "terms", "bandwidth", "label"});
        const Node t = n.at("terms");
        if (t.size() == 0) t.fail("needs at least one term");
        PhaseSymbol acc = phase_symbol(t[0], d);
        for (std::size_t i = 1; i < t.size(); ++i) acc = acc + phase_symbol(t[i], d);
        return acc;
      }
      n.at("structure").fail("unknown phase-symbol structure '" + st + "'");
    }();
    if (n.has("bandwidth")) a = a.with_bandwidth(n.at("bandwidth").number());
    return a;
  });
}

PdeSystem Config::system(const Node& in) const {
  const Node n = deref(in, "systems");
  n.only({"d", "m", "q", "r", "p", "epsilon", "terms"});
  PdeSystem s;
  s.d = static_cast<int>(n.integer_or("d", grid().d));
  s.m = static_cast<int>(n.at("m").integer());
  s.q = static_cast<int>(n.integer_or("q", 1));
  s.r = static_cast<int>(n.integer_or("r", 1));
  s.p = n.number_or("p", 2.0);
  s.epsilon = n.has("epsilon") ? schedule(n.at("epsilon")) : Schedule::power(1.0, -1.0);
  for (const Node& t : n.at("terms").elements()) {
    t.only({"alpha", "entries"});
    SystemTerm term;
    const auto alpha = t.at("alpha").integers();
    if (static_cast<int>(alpha.size()) != s.d) t.at("alpha").fail("expected " + std::to_string(s.d) + " components");
    for (int i = 0; i < s.d; ++i) term.alpha[i] = static_cast<int>(alpha[i]);
    for (const Node& e : t.at("entries").elements()) {
      if (e.is_null()) {
        term.entries.emplace_back();
      } else if (e.is_object()) {
        const Profile p = profile(e.has("profile") ? e.at("profile") : e);
        Point c = Point::Zero(s.d);
        if (e.has("center")) c = point(e.at("center"), s.d);
        term.entries.emplace_back([p, c](const Point& x) { return p(Point(x - c)); });
      } else {
        const Complex v = e.complex();
        term.entries.emplace_back([v](const Point&) { return v; });
      }
    }
    s.terms.push_back(std::move(term));
  }
  guarded(n, [&] {
    s.validate();
    return 0;
  });
  return s;
}

TestBank Config::bank(const Node& n, const Grid& g) const {
  n.only({"phis", "symbols"});
  TestBank b;
  for (const Node& p : n.at("phis").elements()) b.phis.push_back(test_function(p, g));
  for (const Node& s : n.at("symbols").elements()) b.symbols.push_back(symbol(s));
  if (b.phis.empty()) n.at("phis").fail("needs at least one cutoff");
  if (b.symbols.empty()) n.at("symbols").fail("needs at least one symbol");
  return b;
}

std::vector<long long> Config::n_schedule(const Node& n) const {
  if (n.is_object()) {
    n.only({"dyadic"});
    const Node k = n.at("dyadic");
    const long long e = k.integer();
    if (e < 0 || e > 20) k.fail("dyadic exponent must lie in 0..20");
    return dyadic_schedule(static_cast<int>(e));
  }
  const auto v = n.integers();
  if (v.empty()) n.fail("schedule must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 1) n[i].fail("n must be positive");
    if (i && v[i] <= v[i - 1]) n[i].fail("n schedule must be strictly increasing");
  }
  return v;
}

}  // namespace oslab::cli

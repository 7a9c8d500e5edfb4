#include "oslab/fourmult.hpp"

#include <random>
#include <sstream>

namespace oslab {

Eigen::VectorXcd multiplier_samples(const Symbol& s, double omega, const Grid& g) {
  if (!(omega > 0.0)) throw DomainError("multiplier: omega must be positive");
  if (s.dim() != g.d) throw DomainError("multiplier: symbol and grid dimensions differ");
  Eigen::VectorXcd m(g.size());
  const Complex zero = s.zero_value();
  for (std::int64_t i = 0; i < g.size(); ++i) {
    if (i == 0) {
      m(i) = zero;
      continue;
    }
    const Freq xi = omega * g.frequency(i);
    try {
      m(i) = s(xi);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os.precision(17);
      os << "multiplier: symbol '" << s.label() << "' failed at omega*k/L = (";
      for (int a = 0; a < g.d; ++a) os << (a ? ", " : "") << xi(a);
      os << "): " << e.what();
      throw EvaluationError(os.str());
    }
  }
  return m;
}

GridFunction apply_samples(const Eigen::VectorXcd& samples, const GridFunction& u) {
  if (samples.size() != u.grid().size()) throw GridMismatch("multiplier samples do not match the grid");
  Eigen::VectorXcd spec = fft_forward(u);
  spec.array() *= samples.array();
  return fft_inverse(u.grid(), std::move(spec));
}

GridFunction apply_multiplier(const Symbol& s, double omega, const GridFunction& u) {
  return apply_samples(multiplier_samples(s, omega, u.grid()), u);
}

double adjoint_pairing_gap(const Symbol& s, double omega, const GridFunction& phi1u,
                           const GridFunction& phi2v) {
  phi1u.require_same(phi2v);
  const Complex left = integral_product(apply_multiplier(s, omega, phi1u), phi2v);
  const Complex right = integral_product(phi1u, apply_multiplier(s.conj(), omega, phi2v));
  return std::abs(left - right);
}

double multiplier_l2_norm(const Symbol& s, double omega, const Grid& g) {
  return multiplier_samples(s, omega, g).cwiseAbs().maxCoeff();
}

namespace {

GridFunction commutator(const GridFunction& phi, const Eigen::VectorXcd& m, const GridFunction& u) {
  return multiply_pointwise(phi, apply_samples(m, u)) - apply_samples(m, multiply_pointwise(phi, u));
}

}  // namespace

CommutatorProfile commutator_decay(const Symbol& s, const GridFunction& phi,
                                   const std::vector<double>& omegas, double p, int probes,
                                   std::uint64_t seed) {
  if (probes < 1) throw UsageError("commutator_decay: need at least one probe");
  const Grid& g = phi.grid();
  CommutatorProfile prof;
  prof.omegas = omegas;
  prof.split_applied = s.has_trace0();
  prof.empirical = p != 2.0;
  Eigen::VectorXcd m0 = Eigen::VectorXcd::Zero(g.size());
  if (prof.split_applied) m0 = multiplier_samples(s.trace0_symbol(), 1.0, g);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<GridFunction> probe_set;
  for (int q = 0; q < probes; ++q) {
    GridFunction u(g);
    for (std::int64_t i = 0; i < g.size(); ++i) u[i] = Complex(normal(rng), normal(rng));
    probe_set.push_back(std::move(u));
  }

  for (double omega : omegas) {
    const Eigen::VectorXcd m = multiplier_samples(s, omega, g) - m0;
    double best = 0.0;
    const GridFunction* best_probe = &probe_set.front();
    for (const auto& u : probe_set) {
      const double r = lp_norm(commutator(phi, m, u), p) / lp_norm(u, p);
      if (r > best) {
        best = r;
        best_probe = &u;
      }
    }
    if (p == 2.0 && best > 0.0) {
      // Power iteration on C*C, where C* = -[B_conj(phi), A_conj(m)].
      const GridFunction phic = phi.conj();
      const Eigen::VectorXcd mc = m.conjugate();
      GridFunction v = *best_probe;
      for (int it = 0; it < 60; ++it) {
        GridFunction w = commutator(phic, mc, commutator(phi, m, v));
        const double nw = lp_norm(w, 2.0);
        if (nw == 0.0) break;
        v = (1.0 / nw) * w;
        best = std::max(best, lp_norm(commutator(phi, m, v), 2.0) / lp_norm(v, 2.0));
      }
    }
    prof.norms.push_back(best);
  }
  return prof;
}

}  // namespace oslab

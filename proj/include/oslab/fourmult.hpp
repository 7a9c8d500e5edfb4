#pragma once

// Fourier multipliers A_psi u = (psi u^)^v on the torus grid, with dilated
// symbols psi(omega .), and diagnostics built from them.

#include "oslab/grid.hpp"
#include "oslab/symbol.hpp"

#include <cstdint>
#include <vector>

namespace oslab {

// psi(omega k / L) on every grid frequency, with the symbol's zero value at
// k = 0. Evaluation failures name the offending frequency omega k / L.
Eigen::VectorXcd multiplier_samples(const Symbol& s, double omega, const Grid& g);

GridFunction apply_samples(const Eigen::VectorXcd& samples, const GridFunction& u);
GridFunction apply_multiplier(const Symbol& s, double omega, const GridFunction& u);

// |<A_psi(phi1 u), conj(phi2 v)> - <phi1 u, conj(A_conj(psi)(phi2 v))>|.
double adjoint_pairing_gap(const Symbol& s, double omega, const GridFunction& phi1u,
                           const GridFunction& phi2v);

// Exact L^2 operator norm of A_psi(omega .) on the grid: max |samples|.
double multiplier_l2_norm(const Symbol& s, double omega, const Grid& g);

struct CommutatorProfile {
  std::vector<double> omegas;
  std::vector<double> norms;
  bool split_applied = false;  // psi_0 o pi part subtracted
  bool empirical = true;       // randomized lower bounds
};

// Norm profile of [B_phi, A_psi(omega .)] - [B_phi, A_{psi_0 o pi}] over
// omega. Without a trace at the origin the raw commutator is measured.
// Norms are maxima of ||C u||_p / ||u||_p over seeded complex Gaussian
// probes; for p = 2 the best probe is refined by power iteration on C*C.
CommutatorProfile commutator_decay(const Symbol& s, const GridFunction& phi,
                                   const std::vector<double>& omegas, double p, int probes = 32,
                                   std::uint64_t seed = 0);

}  // namespace oslab

#pragma once
// Finite-energy inner product and the quadratic forms that enter the energy
// balance. All of them are plain matrix pairings, so identities between them
// hold to round-off whenever the assembly guarantees them structurally.

#include "fpsi/operators.hpp"

namespace fpsi {

inline double ip_H(const OperatorSet& o, const State& a, const State& b) {
  return a.p.dot(o.Mp * b.p) + a.u.dot(o.Mu * b.u) + a.w.dot(o.pl.Kbih * b.w) + a.s.dot(o.pl.Mw * b.s);
}

inline double norm_H(const OperatorSet& o, const State& y) { return std::sqrt(std::max(0.0, ip_H(o, y, y))); }

/// E(y) = ||y||^2 / 2.
inline double energy(const OperatorSet& o, const State& y) { return 0.5 * ip_H(o, y, y); }

/// Viscous-plus-damping form a(u, u) >= 0.
inline double a_O(const OperatorSet& o, const Vec& u) { return u.dot(o.Kvisc * u) + o.par.eta * u.dot(o.Mu * u); }

/// Indefinite work term contributed by div U: ((div U / 2) p, p) + ((div U / 2) u, u).
inline double divU_work(const OperatorSet& o, const State& y) {
  return 0.5 * (y.p.dot(o.Mdivp * y.p) + y.u.dot(o.Mdivu * y.u));
}

/// Residual of the dissipation identity Re(A y, y) = -a(u, u) [+ divU work for
/// the unperturbed generator]. Zero to round-off by construction.
inline double dissipativity_residual(const OperatorSet& o, const GeneratorOp& gen, const State& y, bool perturbed) {
  State dy = gen.apply(y, perturbed);
  double lhs = ip_H(o, dy, y);
  double rhs = -a_O(o, y.u);
  if (!perturbed) rhs += divU_work(o, y);
  return lhs - rhs;
}

}  // namespace fpsi

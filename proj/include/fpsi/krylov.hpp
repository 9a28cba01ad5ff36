#pragma once
// Matrix-free Krylov solvers. Operators and preconditioners are closures so
// the callers can compose factored blocks without materializing products.

#include "fpsi/util.hpp"

#include <functional>

namespace fpsi {

using LinOp = std::function<Vec(const Vec&)>;

struct KrylovResult {
  Vec x;
  int iters = 0;
  double relres = 1.0;
  bool converged = false;
};

/// Preconditioned BiCGStab, right-preconditioned formulation folded into the
/// standard update (precond approximates A^{-1}). Breakdown falls back to a
/// restart from the current iterate; repeated stagnation gives up and reports.
inline KrylovResult bicgstab(const LinOp& A, const Vec& b, const LinOp& precond, double tol = 1e-12, int maxit = 2000,
                             const Vec* x0 = nullptr) {
  KrylovResult out;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.x = Vec::Zero(b.size());
    out.converged = true;
    out.relres = 0.0;
    return out;
  }
  Vec x = x0 ? *x0 : Vec(Vec::Zero(b.size()));
  Vec r = b - A(x);
  Vec rhat = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  Vec v = Vec::Zero(b.size()), pv = Vec::Zero(b.size());
  double best = r.norm() / bnorm;
  Vec bestx = x;
  int restarts = 0;

  for (int it = 0; it < maxit; ++it) {
    const double rho1 = rhat.dot(r);
    if (std::abs(rho1) < 1e-300 || std::abs(omega) < 1e-300) {
      // breakdown: restart with the current residual as the shadow vector
      if (++restarts > 5) break;
      r = b - A(x);
      rhat = r;
      rho = alpha = omega = 1.0;
      v.setZero();
      pv.setZero();
      continue;
    }
    const double beta = (rho1 / rho) * (alpha / omega);
    rho = rho1;
    pv = r + beta * (pv - omega * v);
    Vec y = precond(pv);
    v = A(y);
    alpha = rho / rhat.dot(v);
    Vec sres = r - alpha * v;
    x += alpha * y;
    double rn = sres.norm() / bnorm;
    if (rn < tol) {
      out.x = x;
      out.iters = it + 1;
      out.relres = rn;
      out.converged = true;
      return out;
    }
    Vec z = precond(sres);
    Vec t = A(z);
    const double tt = t.squaredNorm();
    omega = tt > 0.0 ? t.dot(sres) / tt : 0.0;
    x += omega * z;
    r = sres - omega * t;
    rn = r.norm() / bnorm;
    if (rn < best) {
      best = rn;
      bestx = x;
    }
    if (rn < tol) {
      out.x = x;
      out.iters = it + 1;
      out.relres = rn;
      out.converged = true;
      return out;
    }
    out.iters = it + 1;
  }
  out.x = bestx;
  out.relres = best;
  out.converged = best < tol;
  return out;
}

/// Preconditioned conjugate gradient for SPD operators.
inline KrylovResult pcg(const LinOp& A, const Vec& b, const LinOp& precond, double tol = 1e-12, int maxit = 2000,
                        const Vec* x0 = nullptr) {
  KrylovResult out;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.x = Vec::Zero(b.size());
    out.converged = true;
    out.relres = 0.0;
    return out;
  }
  Vec x = x0 ? *x0 : Vec(Vec::Zero(b.size()));
  Vec r = b - A(x);
  Vec z = precond(r);
  Vec p = z;
  double rz = r.dot(z);
  for (int it = 0; it < maxit; ++it) {
    Vec Ap = A(p);
    const double pAp = p.dot(Ap);
    if (pAp <= 0.0) break;  // loss of positivity, bail with best iterate
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    const double rn = r.norm() / bnorm;
    out.iters = it + 1;
    if (rn < tol) {
      out.x = x;
      out.relres = rn;
      out.converged = true;
      return out;
    }
    z = precond(r);
    const double rz1 = r.dot(z);
    p = z + (rz1 / rz) * p;
    rz = rz1;
  }
  out.x = x;
  out.relres = (b - A(x)).norm() / bnorm;
  out.converged = out.relres < tol;
  return out;
}

}  // namespace fpsi

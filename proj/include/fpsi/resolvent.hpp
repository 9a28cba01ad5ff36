#pragma once
// Resolvent solves (xi - A) y = y* for real xi > 0, two independent routes.
//
// Monolithic: one sparse system in the reduced unknowns (p, u_free, w_free,
// s_free), factored with SparseLU. Also the backbone of the implicit time
// steppers, which reuse the packed layout and the assembled matrix.
//
// Structured: mirrors the constructive route. The pressure row is solved by
// the stationary transport factorization, which turns the momentum equation
// into a coercive problem on the wall-constrained velocity space (solved
// matrix-free with a symmetric preconditioner); the plate unknown then
// satisfies a positive-real Schur equation driven by traces of fluid solves.
// Both routes produce the same discrete solution up to solver tolerances.

#include "fpsi/hspace.hpp"
#include "fpsi/krylov.hpp"
#include "fpsi/operators.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <memory>
#include <vector>

namespace fpsi {

class MonolithicResolvent {
 public:
  MonolithicResolvent(const OperatorSet& o, double xi, bool perturbed) : o_(o), xi_(xi), perturbed_(perturbed) {
    if (xi <= 0.0) throw config_error("resolvent: xi must be positive");
    const SpMat& Cp = perturbed ? o.Cp : o.Cp_gen;
    const SpMat& Cu = perturbed ? o.Cu : o.Cu_gen;
    SpMat At = xi * o.Mu + Cu + o.Kfluid;
    SpMat R = o.R, TR = o.TR;
    SpMat Rt = SpMat(R.transpose()), TRt = SpMat(TR.transpose());

    std::vector<Trip> t;
    auto add = [&t](int r0, int c0, const SpMat& A, double sc = 1.0) {
      for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it)
          t.emplace_back(r0 + static_cast<int>(it.row()), c0 + static_cast<int>(it.col()), sc * it.value());
    };
    const int op = 0, ou = o.np, ow = o.np + o.nuf, os = o.np + o.nuf + o.nwf;
    n_ = o.np + o.nuf + 2 * o.nwf;
    off_ = {op, ou, ow, os};

    add(op, op, SpMat(xi * o.Mp + Cp));
    add(op, ou, SpMat(o.D * R));
    add(op, os, SpMat(o.D * TR));
    add(ou, op, SpMat(Rt * o.D.transpose()), -1.0);
    add(ou, ou, SpMat(Rt * At * R));
    add(ou, os, SpMat(Rt * At * TR));
    for (int i = 0; i < o.nwf; ++i) {
      t.emplace_back(ow + i, ow + i, xi);
      t.emplace_back(ow + i, os + i, -1.0);
    }
    add(os, op, SpMat(TRt * o.D.transpose()), -1.0);
    add(os, ou, SpMat(TRt * At * R));
    add(os, ow, o.Kbih_ff);
    add(os, os, SpMat(TRt * At * TR + xi * o.Mw_ff));

    A_.resize(n_, n_);
    A_.setFromTriplets(t.begin(), t.end());
    lu_.compute(A_);
    if (lu_.info() != Eigen::Success) throw solver_error("resolvent: monolithic factorization failed");
  }

  int size() const { return n_; }
  double xi() const { return xi_; }
  const SpMat& matrix() const { return A_; }
  /// Packed offsets of the four blocks (p, u_free, w_free, s_free).
  int block_offset(int b) const { return off_[static_cast<std::size_t>(b)]; }

  Vec pack(const State& y) const {
    Vec x(n_);
    x.segment(off_[0], o_.np) = y.p;
    x.segment(off_[1], o_.nuf) = o_.R.transpose() * y.u;
    x.segment(off_[2], o_.nwf) = o_.pl.Rw.transpose() * y.w;
    x.segment(off_[3], o_.nwf) = o_.pl.Rw.transpose() * y.s;
    return x;
  }

  State unpack(const Vec& x) const {
    State y = zero_state(o_);
    y.p = x.segment(off_[0], o_.np);
    Vec sf = x.segment(off_[3], o_.nwf);
    y.u = o_.R * x.segment(off_[1], o_.nuf) + o_.TR * sf;
    y.w = o_.pl.Rw * x.segment(off_[2], o_.nwf);
    y.s = o_.pl.Rw * sf;
    return y;
  }

  /// Mass pairings of a state against the reduced test basis; the right-hand
  /// side of the resolvent system and of the implicit steps.
  Vec rows_M(const State& y) const {
    Vec b(n_);
    b.segment(off_[0], o_.np) = o_.Mp * y.p;
    b.segment(off_[1], o_.nuf) = o_.R.transpose() * (o_.Mu * y.u);
    b.segment(off_[2], o_.nwf) = o_.pl.Rw.transpose() * y.w;
    b.segment(off_[3], o_.nwf) = o_.TR.transpose() * (o_.Mu * y.u) + o_.pl.Rw.transpose() * (o_.pl.Mw * y.s);
    return b;
  }

  Vec solve_packed(const Vec& b) const {
    Vec x = lu_.solve(b);
    if (lu_.info() != Eigen::Success) throw solver_error("resolvent: monolithic solve failed");
    return x;
  }

  State solve(const State& ystar) const {
    Vec b = rows_M(ystar);
    // displacement row carries the identity pairing, not a mass pairing
    b.segment(off_[2], o_.nwf) = o_.pl.Rw.transpose() * ystar.w;
    return unpack(solve_packed(b));
  }

 private:
  const OperatorSet& o_;
  double xi_;
  bool perturbed_;
  int n_ = 0;
  std::array<int, 4> off_{};
  SpMat A_;
  Eigen::SparseLU<SpMat> lu_;
};

/// ||xi y - A y - y*||_H relative to ||y*||_H.
inline double resolvent_residual(const OperatorSet& o, const GeneratorOp& gen, double xi, const State& y,
                                 const State& ystar, bool perturbed) {
  State r = y * xi - gen.apply(y, perturbed) - ystar;
  const double den = norm_H(o, ystar);
  return den > 0.0 ? norm_H(o, r) / den : norm_H(o, r);
}

struct StructuredStats {
  int fluid_solves = 0;
  int fluid_iters_max = 0;
  int plate_iters = 0;
  double plate_relres = 0.0;
};

class StructuredResolvent {
 public:
  StructuredResolvent(const OperatorSet& o, double xi) : o_(o), xi_(xi) {
    if (xi <= 0.0) throw config_error("resolvent: xi must be positive");
    tfac_.compute(SpMat(xi * o.Mp + o.Cp));
    if (tfac_.info() != Eigen::Success) throw solver_error("resolvent: transport factorization failed");
    At_ = xi * o.Mu + o.Cu + o.Kfluid;
    SpMat P = SpMat(o.R.transpose()) * SpMat(xi * o.Mu + o.Kfluid) * o.R;
    vpre_.compute(P);
    if (vpre_.info() != Eigen::Success) throw solver_error("resolvent: fluid preconditioner failed");
    SpMat W = o.Kbih_ff + (xi * xi) * o.Mw_ff;
    wpre_.compute(W);
    if (wpre_.info() != Eigen::Success) throw solver_error("resolvent: plate preconditioner failed");
  }

  /// Pressure from the transport row: (xi M + C) p = M p* - D u.
  Vec pressure(const Vec& u, const Vec* pstar = nullptr) const {
    Vec rhs = pstar ? Vec(o_.Mp * (*pstar) - o_.D * u) : Vec(-(o_.D * u));
    Vec p = tfac_.solve(rhs);
    if (tfac_.info() != Eigen::Success) throw solver_error("resolvent: transport solve failed");
    return p;
  }

  /// Momentum residual with the pressure eliminated through the transport map.
  Vec reduced_momentum(const Vec& u, const Vec* pstar = nullptr) const {
    return At_ * u - o_.D.transpose() * pressure(u, pstar);
  }

  /// Fluid solve on the wall-constrained space: find v with the prescribed
  /// interface values (taken from the plate value DOFs of wtrace) such that
  /// the reduced momentum residual is orthogonal to the free velocity space.
  Vec fluid_solve(const Vec* wtrace, const Vec* ustar, const Vec* pstar, StructuredStats* st = nullptr) const {
    Vec lift = Vec::Zero(o_.nu);
    if (wtrace) {
      Vec g = trace_plate_values(o_.plate, *wtrace);
      lift = lift_interface_values(o_.geom, o_.plate, o_.tmap, g);
    }
    Vec b = -(o_.R.transpose() * reduced_momentum(lift, pstar));
    if (ustar) b += o_.R.transpose() * (o_.Mu * (*ustar));
    LinOp op = [this](const Vec& vf) { return Vec(o_.R.transpose() * reduced_momentum(Vec(o_.R * vf))); };
    LinOp pre = [this](const Vec& x) { return Vec(vpre_.solve(x)); };
    KrylovResult res = bicgstab(op, b, pre, 2e-13, 8000);
    if (!res.converged && res.relres > 1e-10)
      throw solver_error("resolvent: fluid solve stagnated, relres=" + std::to_string(res.relres));
    if (st) {
      ++st->fluid_solves;
      st->fluid_iters_max = std::max(st->fluid_iters_max, res.iters);
    }
    return lift + o_.R * res.x;
  }

  /// Schur operator on the free plate displacement: xi^2 Mw + Kbih plus xi
  /// times the interface trace of the fluid response to the displacement.
  Vec plate_operator(const Vec& wf, StructuredStats* st = nullptr) const {
    Vec w = o_.pl.Rw * wf;
    Vec v = fluid_solve(&w, nullptr, nullptr, st);
    Vec r = reduced_momentum(v);
    return (xi_ * xi_) * (o_.Mw_ff * wf) + o_.Kbih_ff * wf + xi_ * (o_.TR.transpose() * r);
  }

  State solve(const State& ystar, StructuredStats* st = nullptr) const {
    StructuredStats local;
    StructuredStats* stats = st ? st : &local;

    // data solve: zero trace, full body data
    Vec vbar = fluid_solve(nullptr, &ystar.u, &ystar.p, stats);
    Vec rbar = reduced_momentum(vbar, &ystar.p);
    // trace solve driven by the displacement datum
    Vec vstar = fluid_solve(&ystar.w, nullptr, nullptr, stats);
    Vec rstar = reduced_momentum(vstar);

    Vec F = o_.pl.Rw.transpose() * (o_.pl.Mw * ystar.s) + o_.TR.transpose() * (o_.Mu * ystar.u) +
            xi_ * (o_.Mw_ff * (o_.pl.Rw.transpose() * ystar.w)) + o_.TR.transpose() * rstar - o_.TR.transpose() * rbar;

    LinOp op = [this, stats](const Vec& x) { return plate_operator(x, stats); };
    LinOp pre = [this](const Vec& x) { return Vec(wpre_.solve(x)); };
    KrylovResult res = bicgstab(op, F, pre, 1e-12, 600);
    if (!res.converged && res.relres > 1e-9)
      throw solver_error("resolvent: plate solve stagnated, relres=" + std::to_string(res.relres));
    stats->plate_iters = res.iters;
    stats->plate_relres = res.relres;

    State y = zero_state(o_);
    y.w = o_.pl.Rw * res.x;
    y.s = xi_ * y.w - o_.pl.Rw * (o_.pl.Rw.transpose() * ystar.w);
    Vec vw = fluid_solve(&y.w, nullptr, nullptr, stats);
    y.u = xi_ * vw - vstar + vbar;
    y.p = pressure(y.u, &ystar.p);
    return y;
  }

 private:
  const OperatorSet& o_;
  double xi_;
  Eigen::SparseLU<SpMat> tfac_;
  SpMat At_;
  Eigen::SimplicialLDLT<SpMat> vpre_;
  Eigen::SimplicialLDLT<SpMat> wpre_;
};

/// Smallest safe spectral parameter: the transport admissibility threshold for
/// the ambient field (coercivity of the reduced fluid operator holds for any
/// positive value, so the transport bound is the binding constraint).
inline double xi_min_heuristic(const AmbientField& amb, double c_s = 1.0) {
  return std::max(1.0, admissibility(amb, c_s).k_min);
}

}  // namespace fpsi

#pragma once
// Stationary states and generator kernel. For divergence-free ambient fields
// the kernel consists of constant pressure, zero velocity, zero plate speed,
// and a displacement balancing the constant pressure load through the
// clamped plate operator. The load on the plate row is assembled from the
// same coupling matrices as the evolution rows, so the constructed state is
// stationary for the discrete dynamics to round-off, not merely to
// discretization accuracy.

#include "fpsi/hspace.hpp"
#include "fpsi/krylov.hpp"
#include "fpsi/operators.hpp"
#include "fpsi/resolvent.hpp"
#include "fpsi/vonkarman.hpp"

#include <algorithm>
#include <vector>

namespace fpsi {

/// Interface load of a unit pressure on the free plate DOFs, as the
/// evolution rows see it.
inline Vec unit_pressure_plate_load(const OperatorSet& o) {
  return o.TR.transpose() * (o.D.transpose() * Vec::Ones(o.np));
}

/// Kernel element (c, 0, w_c, 0): the plate displacement solves the clamped
/// biharmonic problem with the interface load of the constant pressure.
inline State solve_linear_stationary(const OperatorSet& o, double c) {
  State y = zero_state(o);
  y.p = c * Vec::Ones(o.np);
  Vec rhs = c * unit_pressure_plate_load(o);
  Vec wf = o.pl.Kfac->solve(rhs);
  if (o.pl.Kfac->info() != Eigen::Success) throw solver_error("stationary: plate solve failed");
  y.w = o.pl.Rw * wf;
  return y;
}

/// Kernel extraction by block inverse iteration with a small positive shift
/// on the monolithic system. Equal-order pressure spaces carry spurious
/// checkerboard members in the numerical kernel alongside the physical
/// constant-pressure one, so a single iterated vector lands on an arbitrary
/// mix. The block captures the whole near-null subspace; within it the
/// returned representative minimizes the pressure H1 seminorm, which is the
/// structure the continuous kernel prescribes. The spurious directions have
/// gradients of order 1/h, so the selection gap is many orders wide.
inline State extract_kernel(const OperatorSet& o, std::mt19937_64& rng, double shift = 1e-8, int iters = 6,
                            int block = 12) {
  MonolithicResolvent res(o, shift, false);
  std::vector<State> Y;
  Y.reserve(static_cast<std::size_t>(block));
  for (int i = 0; i < block; ++i) Y.push_back(random_state(o, rng));

  auto orthonormalize = [&o](std::vector<State>& B) {
    for (std::size_t i = 0; i < B.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) B[i] = B[i] - B[j] * ip_H(o, B[j], B[i]);
      const double nn = norm_H(o, B[i]);
      if (!(nn > 0.0) || !std::isfinite(nn)) throw solver_error("stationary: inverse iteration broke down");
      B[i] = B[i] * (1.0 / nn);
    }
  };

  orthonormalize(Y);
  for (int it = 0; it < iters; ++it) {
    for (State& y : Y) y = res.solve(y);
    orthonormalize(Y);
  }

  // Pick the flattest-pressure member of the converged subspace.
  std::vector<const Vec*> ps;
  ps.reserve(Y.size());
  for (const State& y : Y) ps.push_back(&y.p);
  Eigen::MatrixXd A = pressure_h1_gram(o.geom, ps);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw solver_error("stationary: selection eigensolve failed");
  const Vec alpha = es.eigenvectors().col(0);
  State y = zero_state(o);
  for (std::size_t i = 0; i < Y.size(); ++i) y = y + Y[i] * alpha[static_cast<int>(i)];
  const double nh = norm_H(o, y);
  if (!(nh > 0.0) || !std::isfinite(nh)) throw solver_error("stationary: degenerate kernel candidate");
  y = y * (1.0 / nh);
  // fix the sign so the pressure level is nonnegative
  const double c = y.p.dot(o.Mp * Vec::Ones(o.np));
  if (c < 0.0) y = y * (-1.0);
  return y;
}

struct KernelReport {
  double c = 0.0;             // mean pressure level
  double u_rel = 0.0;         // ||u|| relative to the state norm
  double gradp_rel = 0.0;     // |p|_H1 seminorm relative to ||p||
  double p_stddev_rel = 0.0;  // coefficient stddev of p relative to |mean|
  double diss_residual = 0.0; // |Re(A y, y) + a(u,u) - divwork| / ||y||^2
  double gen_residual = 0.0;  // ||A y|| relative to ||y||
  double plate_residual = 0.0;// clamped plate row vs. the pressure load
};

inline KernelReport verify_kernel_structure(const OperatorSet& o, const GeneratorOp& gen, const State& y) {
  KernelReport r;
  const Vec ones = Vec::Ones(o.np);
  const double vol = ones.dot(o.Mp * ones);
  r.c = y.p.dot(o.Mp * ones) / vol;
  const double ny = norm_H(o, y);
  r.u_rel = std::sqrt(std::max(0.0, y.u.dot(o.Mu * y.u))) / ny;
  const double pn = std::sqrt(std::max(0.0, y.p.dot(o.Mp * y.p)));
  r.gradp_rel = pressure_h1_seminorm(o.geom, y.p) / std::max(pn, 1e-300);
  const double cmean = y.p.mean();
  r.p_stddev_rel = std::sqrt((y.p.array() - cmean).square().sum() / static_cast<double>(o.np)) /
                   std::max(std::abs(cmean), 1e-300);
  State dy = gen.apply(y, false);
  r.gen_residual = norm_H(o, dy) / ny;
  r.diss_residual = std::abs(ip_H(o, dy, y) + a_O(o, y.u) - divU_work(o, y)) / (ny * ny);
  Vec load = r.c * unit_pressure_plate_load(o);
  Vec res = o.Kbih_ff * Vec(o.pl.Rw.transpose() * y.w) - load;
  r.plate_residual = res.norm() / std::max(load.norm(), 1e-300);
  return r;
}

// ---------------------------------------------------------------------------
// Nonlinear stationary problem: K w = f(w) + c * interface load, Newton with
// several starting points. Solutions keep the fluid at rest and the pressure
// constant, so only the plate unknown is iterated.
// ---------------------------------------------------------------------------

struct NewtonMember {
  Vec w;                  // full plate DOFs
  double residual = 0.0;  // scaled plate-row residual
  double wnorm = 0.0;     // energy seminorm |w|_K
  int iters = 0;
  bool converged = false;
};

struct NewtonOptions {
  int max_iters = 40;
  double tol = 1e-12;
  int random_starts = 5;
  double krylov_tol = 1e-11;
};

inline std::vector<NewtonMember> solve_nonlinear_stationary(const OperatorSet& o, const VonKarman& vk, double c,
                                                            std::mt19937_64& rng, const NewtonOptions& opt = {}) {
  const Vec rhs = c * unit_pressure_plate_load(o);
  const double scale = 1.0 + rhs.norm();
  LinOp pre = [&o](const Vec& x) { return Vec(o.pl.Kfac->solve(x)); };

  auto G = [&](const Vec& wf) {
    Vec w = o.pl.Rw * wf;
    return Vec(o.Kbih_ff * wf - o.pl.Rw.transpose() * vk.force_load(w) - rhs);
  };

  auto newton = [&](Vec wf) {
    NewtonMember m;
    Vec g = G(wf);
    double gn = g.norm();
    for (int it = 0; it < opt.max_iters; ++it) {
      if (gn <= opt.tol * scale) break;
      Vec w = o.pl.Rw * wf;
      Vec v = vk.airy(w);
      LinOp J = [&](const Vec& h) {
        return Vec(o.Kbih_ff * h - o.pl.Rw.transpose() * vk.jacobian_apply(w, v, Vec(o.pl.Rw * h)));
      };
      KrylovResult kr = bicgstab(J, Vec(-g), pre, opt.krylov_tol, 2000);
      if (!kr.converged && kr.relres > 1e-6) break;
      double alpha = 1.0;
      bool accepted = false;
      while (alpha >= 1.0 / 1024.0) {
        Vec trial = wf + alpha * kr.x;
        Vec gt = G(trial);
        const double gtn = gt.norm();
        if (gtn <= (1.0 - 0.25 * alpha) * gn || gtn <= opt.tol * scale) {
          wf = std::move(trial);
          g = std::move(gt);
          gn = gtn;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      ++m.iters;
      if (!accepted) break;
    }
    m.w = o.pl.Rw * wf;
    m.residual = gn / scale;
    m.wnorm = std::sqrt(std::max(0.0, m.w.dot(vk.plate().Kbih * m.w)));
    m.converged = m.residual <= 1e-8;
    return m;
  };

  std::vector<Vec> starts;
  starts.push_back(Vec::Zero(o.nwf));
  Vec lin = o.pl.Kfac->solve(rhs);
  starts.push_back(lin);
  const double amp = 1.0 + lin.norm();
  for (int i = 0; i < opt.random_starts; ++i) starts.push_back(Vec(amp * random_vec(rng, o.nwf)));

  std::vector<NewtonMember> members;
  for (const Vec& s0 : starts) {
    NewtonMember m = newton(s0);
    if (!m.converged) continue;
    bool dup = false;
    for (const NewtonMember& e : members)
      if ((e.w - m.w).norm() <= 1e-6 * (1.0 + e.w.norm())) {
        dup = true;
        break;
      }
    if (!dup) members.push_back(std::move(m));
  }
  std::sort(members.begin(), members.end(), [](const NewtonMember& a, const NewtonMember& b) {
    return a.residual != b.residual ? a.residual < b.residual : a.wnorm < b.wnorm;
  });
  return members;
}

}  // namespace fpsi

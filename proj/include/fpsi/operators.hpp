#pragma once
// Discrete operators for the coupled flow-plate system.
//
// Conventions that the energy identities depend on:
//  * Advection matrices are skew-symmetrized, C = (N - N^T) / 2, so the
//    quadratic form of the combined convection + half-divergence operator
//    vanishes identically, not just up to quadrature error.
//  * The pressure-velocity coupling uses one matrix D = (div u, q) and its
//    transpose, so the two appearances cancel exactly in the energy pairing.
//  * The plate feels the fluid through T^T applied to the momentum residual;
//    with test functions lifted through the same T, the interface stress
//    terms cancel structurally in the coupled pairing.
//
// All forms use 2x2x2 Gauss. The ambient-weighted ones integrate the
// cell-polynomial stand-in of the field (stream perp-gradient or trilinear
// corner interpolant), so every integrand has degree <= 3 per direction and
// the rule is exact; the residual between the skew assembly and the
// unsymmetrized one is kept as a diagnostic and sits at round-off.
// Params::ambient_quad only affects quadrature of analytic transport data.

#include "fpsi/ambient.hpp"
#include "fpsi/geometry.hpp"
#include "fpsi/plate.hpp"
#include "fpsi/quadrature.hpp"
#include "fpsi/util.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <array>
#include <memory>
#include <vector>

namespace fpsi {

struct Params {
  double nu = 1.0;      // shear viscosity
  double lambda = 1.0;  // second Lame parameter
  double eta = 1.0;     // static damping
  int ambient_quad = 4;  // rule for analytic transport data only
  double c_s = 1.0;  // Sobolev embedding constant in the transport bound
};

// ---------------------------------------------------------------------------
// Scalar-space pieces (pressure space, also the transport unknown space).
// ---------------------------------------------------------------------------

struct ScalarAdvection {
  SpMat M;     // mass
  SpMat Klap;  // (grad q, grad r)
  SpMat N;     // (U . grad q_j, q_i)
  SpMat Mdiv;  // (div U q_j, q_i); stays empty for divergence-free fields
  SpMat C;     // (N - N^T) / 2, exactly skew
  double skew_residual = 0.0;  // max-norm of (N + Mdiv / 2) - C
  double div_qp_max = 0.0;     // max |div U_h| seen at assembly points
};

inline ScalarAdvection assemble_scalar_advection(const BoxGeometry& g, const AmbientField& amb) {
  ScalarAdvection s;
  const int n = g.npts();
  const double vol = g.hx * g.hy * g.hz;
  std::vector<Trip> tm, tl, tn, td;

  {  // exact constant-coefficient forms
    const Rule1d r = gauss01(2);
    for (int cz = 0; cz < g.nz; ++cz)
      for (int cy = 0; cy < g.ny; ++cy)
        for (int cx = 0; cx < g.nx; ++cx) {
          const auto cn = g.cell_nodes(cx, cy, cz);
          Eigen::Matrix<double, 8, 8> lm, ll;
          lm.setZero();
          ll.setZero();
          for (std::size_t a = 0; a < r.x.size(); ++a)
            for (std::size_t b = 0; b < r.x.size(); ++b)
              for (std::size_t c = 0; c < r.x.size(); ++c) {
                const double w = r.w[a] * r.w[b] * r.w[c] * vol;
                std::array<double, 8> val;
                std::array<Vec3, 8> grad;
                for (int l = 0; l < 8; ++l) {
                  val[static_cast<std::size_t>(l)] = q1_value(l, r.x[a], r.x[b], r.x[c]);
                  Vec3 gr = q1_grad(l, r.x[a], r.x[b], r.x[c]);
                  grad[static_cast<std::size_t>(l)] = Vec3(gr[0] / g.hx, gr[1] / g.hy, gr[2] / g.hz);
                }
                for (int i = 0; i < 8; ++i)
                  for (int j = 0; j < 8; ++j) {
                    lm(i, j) += w * val[static_cast<std::size_t>(i)] * val[static_cast<std::size_t>(j)];
                    ll(i, j) += w * grad[static_cast<std::size_t>(i)].dot(grad[static_cast<std::size_t>(j)]);
                  }
              }
          for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) {
              tm.emplace_back(cn[static_cast<std::size_t>(i)], cn[static_cast<std::size_t>(j)], lm(i, j));
              tl.emplace_back(cn[static_cast<std::size_t>(i)], cn[static_cast<std::size_t>(j)], ll(i, j));
            }
        }
  }

  if (amb.kind != AmbientKind::zero) {  // ambient-weighted forms
    const Rule1d r = gauss01(2);
    const bool use_stream = static_cast<bool>(amb.stream);
    const bool with_div = !amb.is_div_free;
    for (int cz = 0; cz < g.nz; ++cz)
      for (int cy = 0; cy < g.ny; ++cy)
        for (int cx = 0; cx < g.nx; ++cx) {
          const auto cn = g.cell_nodes(cx, cy, cz);
          // Corner data of the cell-polynomial stand-in.
          std::array<double, 8> psi{};
          std::array<Vec3, 8> Uc;
          for (int l = 0; l < 8; ++l) {
            const Vec3 xl((cx + (l & 1)) * g.hx, (cy + ((l >> 1) & 1)) * g.hy, -1.0 + (cz + ((l >> 2) & 1)) * g.hz);
            if (use_stream)
              psi[static_cast<std::size_t>(l)] = amb.stream(xl);
            else
              Uc[static_cast<std::size_t>(l)] = amb.U(xl);
          }
          Eigen::Matrix<double, 8, 8> ln, ld;
          ln.setZero();
          ld.setZero();
          for (std::size_t a = 0; a < r.x.size(); ++a)
            for (std::size_t b = 0; b < r.x.size(); ++b)
              for (std::size_t c = 0; c < r.x.size(); ++c) {
                const double w = r.w[a] * r.w[b] * r.w[c] * vol;
                std::array<double, 8> val;
                std::array<Vec3, 8> sg;  // physically scaled gradients
                for (int l = 0; l < 8; ++l) {
                  val[static_cast<std::size_t>(l)] = q1_value(l, r.x[a], r.x[b], r.x[c]);
                  const Vec3 gr = q1_grad(l, r.x[a], r.x[b], r.x[c]);
                  sg[static_cast<std::size_t>(l)] = Vec3(gr[0] / g.hx, gr[1] / g.hy, gr[2] / g.hz);
                }
                Vec3 U = Vec3::Zero();
                double dv = 0.0;
                if (use_stream) {
                  double px = 0.0, py = 0.0;
                  for (int l = 0; l < 8; ++l) {
                    px += psi[static_cast<std::size_t>(l)] * sg[static_cast<std::size_t>(l)][0];
                    py += psi[static_cast<std::size_t>(l)] * sg[static_cast<std::size_t>(l)][1];
                  }
                  U = Vec3(py, -px, 0.0);
                } else {
                  for (int l = 0; l < 8; ++l) {
                    U += val[static_cast<std::size_t>(l)] * Uc[static_cast<std::size_t>(l)];
                    dv += Uc[static_cast<std::size_t>(l)].dot(sg[static_cast<std::size_t>(l)]);
                  }
                }
                if (with_div) s.div_qp_max = std::max(s.div_qp_max, std::abs(dv));
                std::array<double, 8> conv;
                for (int l = 0; l < 8; ++l) conv[static_cast<std::size_t>(l)] = U.dot(sg[static_cast<std::size_t>(l)]);
                for (int i = 0; i < 8; ++i)
                  for (int j = 0; j < 8; ++j) {
                    ln(i, j) += w * conv[static_cast<std::size_t>(j)] * val[static_cast<std::size_t>(i)];
                    if (with_div) ld(i, j) += w * dv * val[static_cast<std::size_t>(i)] * val[static_cast<std::size_t>(j)];
                  }
              }
          for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) {
              tn.emplace_back(cn[static_cast<std::size_t>(i)], cn[static_cast<std::size_t>(j)], ln(i, j));
              if (with_div) td.emplace_back(cn[static_cast<std::size_t>(i)], cn[static_cast<std::size_t>(j)], ld(i, j));
            }
        }
  }

  s.M.resize(n, n);
  s.M.setFromTriplets(tm.begin(), tm.end());
  s.Klap.resize(n, n);
  s.Klap.setFromTriplets(tl.begin(), tl.end());
  s.N.resize(n, n);
  s.N.setFromTriplets(tn.begin(), tn.end());
  s.Mdiv.resize(n, n);
  s.Mdiv.setFromTriplets(td.begin(), td.end());
  SpMat Nt = SpMat(s.N.transpose());
  s.C = 0.5 * (s.N - Nt);
  SpMat diff = s.N + 0.5 * s.Mdiv - s.C;
  double mx = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SpMat::InnerIterator it(diff, k); it; ++it) mx = std::max(mx, std::abs(it.value()));
  s.skew_residual = mx;
  return s;
}

/// Gram matrix of the H1 seminorm over a family of scalar fields, summed
/// pointwise at the 2x2x2 Gauss points. Gradients are evaluated in corner
/// difference form, so a constant field yields bitwise-zero gradients and
/// the form has no round-off floor on flat members; that property is what
/// lets kernel selection separate constants from checkerboard modes.
inline Eigen::MatrixXd pressure_h1_gram(const BoxGeometry& g, const std::vector<const Vec*>& ps) {
  const int m = static_cast<int>(ps.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  const Rule1d r = gauss01(2);
  const double vol = g.hx * g.hy * g.hz;
  std::vector<Vec3> grads(static_cast<std::size_t>(m));
  for (int cz = 0; cz < g.nz; ++cz)
    for (int cy = 0; cy < g.ny; ++cy)
      for (int cx = 0; cx < g.nx; ++cx) {
        const auto cn = g.cell_nodes(cx, cy, cz);
        for (std::size_t a = 0; a < r.x.size(); ++a)
          for (std::size_t b = 0; b < r.x.size(); ++b)
            for (std::size_t c = 0; c < r.x.size(); ++c) {
              const double w = r.w[a] * r.w[b] * r.w[c] * vol;
              const double xa = r.x[a], xb = r.x[b], xc = r.x[c];
              const double fy[2] = {1.0 - xb, xb}, fz[2] = {1.0 - xc, xc};
              const double fx[2] = {1.0 - xa, xa};
              for (int k = 0; k < m; ++k) {
                const Vec& p = *ps[static_cast<std::size_t>(k)];
                auto at = [&](int l) { return p[cn[static_cast<std::size_t>(l)]]; };
                Vec3 gr = Vec3::Zero();
                for (int s = 0; s < 2; ++s)
                  for (int t = 0; t < 2; ++t) {
                    gr[0] += (at(1 + 2 * s + 4 * t) - at(2 * s + 4 * t)) * fy[s] * fz[t] / g.hx;
                    gr[1] += (at(2 + s + 4 * t) - at(s + 4 * t)) * fx[s] * fz[t] / g.hy;
                    gr[2] += (at(4 + s + 2 * t) - at(s + 2 * t)) * fx[s] * fy[t] / g.hz;
                  }
                grads[static_cast<std::size_t>(k)] = gr;
              }
              for (int k = 0; k < m; ++k)
                for (int l = k; l < m; ++l) {
                  const double v = w * grads[static_cast<std::size_t>(k)].dot(grads[static_cast<std::size_t>(l)]);
                  A(k, l) += v;
                  if (l != k) A(l, k) += v;
                }
            }
      }
  return A;
}

/// H1 seminorm of one scalar field; exactly zero for constants.
inline double pressure_h1_seminorm(const BoxGeometry& g, const Vec& p) {
  std::vector<const Vec*> ps{&p};
  return std::sqrt(std::max(0.0, pressure_h1_gram(g, ps)(0, 0)));
}

// ---------------------------------------------------------------------------
// Full operator set.
// ---------------------------------------------------------------------------

struct OperatorSet {
  BoxGeometry geom;
  PlateGrid plate;
  TraceMap tmap;
  VelocityDofMap vmap;
  Params par;
  AmbientField amb;

  // pressure space
  SpMat Mp, Klap_p, Np, Mdivp, Cp;
  double skew_residual_p = 0.0;
  double div_qp_max = 0.0;  // max |div U_h| over assembly quadrature points

  // velocity space (component-major DOFs)
  SpMat Mu, Cu, Mdivu, Kvisc, Kfluid, Kgrad, D;
  double skew_residual_u = 0.0;

  // plate
  PlateOps pl;

  // coupling
  SpMat R;   // 3 Np x nuf, injection of free velocity DOFs
  SpMat T;   // 3 Np x 4 Npl, tied interface DOFs from plate value DOFs
  SpMat TR;  // T * pl.Rw
  SpMat Kbih_ff, Mw_ff;

  int np = 0, nu = 0, nuf = 0, nw = 0, nwf = 0;

  /// Advection blocks for the actual generator; the perturbed variant drops
  /// the half-divergence correction because the skew matrices carry it.
  SpMat Cp_gen, Cu_gen;  // Cp - Mdivp/2, Cu - Mdivu/2
};

namespace detail {

inline SpMat blkdiag3(const SpMat& A) {
  const int n = static_cast<int>(A.rows());
  std::vector<Trip> t;
  t.reserve(static_cast<std::size_t>(3 * A.nonZeros()));
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it) t.emplace_back(c * n + static_cast<int>(it.row()), c * n + static_cast<int>(it.col()), it.value());
  SpMat out(3 * n, 3 * n);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace detail

inline OperatorSet assemble_operators(const BoxGeometry& g, const Params& par, const AmbientField& amb) {
  OperatorSet o;
  o.geom = g;
  o.plate = build_plate_grid(g);
  o.tmap = build_trace_map(g, o.plate);
  o.vmap = build_velocity_dofs(g, o.plate, o.tmap);
  o.par = par;
  o.amb = amb;

  ScalarAdvection s = assemble_scalar_advection(g, amb);
  o.Mp = s.M;
  o.Klap_p = s.Klap;
  o.Np = s.N;
  o.Mdivp = s.Mdiv;
  o.Cp = s.C;
  o.skew_residual_p = s.skew_residual;
  o.div_qp_max = s.div_qp_max;

  const int n = g.npts();
  o.np = n;
  o.nu = 3 * n;
  o.Mu = detail::blkdiag3(s.M);
  o.Cu = detail::blkdiag3(s.C);
  o.Mdivu = detail::blkdiag3(s.Mdiv);
  o.Kgrad = detail::blkdiag3(s.Klap);
  o.skew_residual_u = s.skew_residual;

  // Viscous stiffness and divergence coupling, exact 2-point Gauss.
  {
    const Rule1d r = gauss01(2);
    const double vol = g.hx * g.hy * g.hz;
    std::vector<Trip> tv, td;
    Eigen::Matrix<double, 24, 24> lv;
    Eigen::Matrix<double, 8, 24> ld;
    lv.setZero();
    ld.setZero();
    // One local matrix serves all cells of the uniform grid.
    for (std::size_t a = 0; a < r.x.size(); ++a)
      for (std::size_t b = 0; b < r.x.size(); ++b)
        for (std::size_t c = 0; c < r.x.size(); ++c) {
          const double w = r.w[a] * r.w[b] * r.w[c] * vol;
          std::array<double, 8> val;
          std::array<Vec3, 8> grad;
          for (int l = 0; l < 8; ++l) {
            val[static_cast<std::size_t>(l)] = q1_value(l, r.x[a], r.x[b], r.x[c]);
            Vec3 gr = q1_grad(l, r.x[a], r.x[b], r.x[c]);
            grad[static_cast<std::size_t>(l)] = Vec3(gr[0] / g.hx, gr[1] / g.hy, gr[2] / g.hz);
          }
          for (int ci = 0; ci < 3; ++ci)
            for (int li = 0; li < 8; ++li)
              for (int cj = 0; cj < 3; ++cj)
                for (int lj = 0; lj < 8; ++lj) {
                  const Vec3& gi = grad[static_cast<std::size_t>(li)];
                  const Vec3& gj = grad[static_cast<std::size_t>(lj)];
                  double e = par.nu * gj[ci] * gi[cj] + par.lambda * gi[ci] * gj[cj];
                  if (ci == cj) e += par.nu * gi.dot(gj);
                  lv(8 * ci + li, 8 * cj + lj) += w * e;
                }
          for (int i = 0; i < 8; ++i)
            for (int cj = 0; cj < 3; ++cj)
              for (int lj = 0; lj < 8; ++lj)
                ld(i, 8 * cj + lj) += w * val[static_cast<std::size_t>(i)] * grad[static_cast<std::size_t>(lj)][cj];
        }
    for (int cz = 0; cz < g.nz; ++cz)
      for (int cy = 0; cy < g.ny; ++cy)
        for (int cx = 0; cx < g.nx; ++cx) {
          const auto cn = g.cell_nodes(cx, cy, cz);
          for (int ci = 0; ci < 3; ++ci)
            for (int li = 0; li < 8; ++li) {
              const int gi = ci * n + cn[static_cast<std::size_t>(li)];
              for (int cj = 0; cj < 3; ++cj)
                for (int lj = 0; lj < 8; ++lj)
                  tv.emplace_back(gi, cj * n + cn[static_cast<std::size_t>(lj)], lv(8 * ci + li, 8 * cj + lj));
            }
          for (int i = 0; i < 8; ++i)
            for (int cj = 0; cj < 3; ++cj)
              for (int lj = 0; lj < 8; ++lj)
                td.emplace_back(cn[static_cast<std::size_t>(i)], cj * n + cn[static_cast<std::size_t>(lj)], ld(i, 8 * cj + lj));
        }
    o.Kvisc.resize(3 * n, 3 * n);
    o.Kvisc.setFromTriplets(tv.begin(), tv.end());
    o.D.resize(n, 3 * n);
    o.D.setFromTriplets(td.begin(), td.end());
  }
  o.Kfluid = o.Kvisc + par.eta * o.Mu;

  o.pl = assemble_plate(o.plate, 4);
  o.nw = o.pl.ndof();
  o.nwf = o.pl.nfree();
  o.nuf = static_cast<int>(o.vmap.free_list.size());

  {
    std::vector<Trip> tr, tt;
    for (std::size_t i = 0; i < o.vmap.free_list.size(); ++i) tr.emplace_back(o.vmap.free_list[i], static_cast<int>(i), 1.0);
    o.R.resize(3 * n, o.nuf);
    o.R.setFromTriplets(tr.begin(), tr.end());
    for (int d = 0; d < 3 * n; ++d)
      if (o.vmap.kind[static_cast<std::size_t>(d)] == VelDofKind::tied_dof) tt.emplace_back(d, o.vmap.tied_plate[static_cast<std::size_t>(d)], 1.0);
    o.T.resize(3 * n, o.nw);
    o.T.setFromTriplets(tt.begin(), tt.end());
  }
  o.TR = o.T * o.pl.Rw;
  o.Kbih_ff = SpMat(o.pl.Rw.transpose()) * o.pl.Kbih * o.pl.Rw;
  o.Mw_ff = SpMat(o.pl.Rw.transpose()) * o.pl.Mw * o.pl.Rw;

  o.Cp_gen = o.Cp - 0.5 * o.Mdivp;
  o.Cu_gen = o.Cu - 0.5 * o.Mdivu;
  return o;
}

/// Plate load of the interface normal stress [2 nu d3 u3 + lambda div u - p],
/// realized through the same matrices that enter the coupled rows so that the
/// discrete Green identity holds exactly against any lifting of the test trace.
inline Vec stress_trace(const OperatorSet& o, const Vec& u, const Vec& p) {
  return o.T.transpose() * (o.Kvisc * u - o.D.transpose() * p).eval();
}

// ---------------------------------------------------------------------------
// State and generator.
// ---------------------------------------------------------------------------

struct State {
  Vec p, u, w, s;

  State() = default;
  State(int np, int nu, int nw) : p(Vec::Zero(np)), u(Vec::Zero(nu)), w(Vec::Zero(nw)), s(Vec::Zero(nw)) {}

  State operator+(const State& o) const { return State{p + o.p, u + o.u, w + o.w, s + o.s}; }
  State operator-(const State& o) const { return State{p - o.p, u - o.u, w - o.w, s - o.s}; }
  State operator*(double a) const { return State{a * p, a * u, a * w, a * s}; }

 private:
  State(Vec pp, Vec uu, Vec ww, Vec ss) : p(std::move(pp)), u(std::move(uu)), w(std::move(ww)), s(std::move(ss)) {}
};

inline State zero_state(const OperatorSet& o) { return State(o.np, o.nu, o.nw); }

/// Overwrite constrained entries: wall normal DOFs to zero, interface vertical
/// DOFs to the plate velocity trace, clamped plate DOFs to zero.
inline void enforce_constraints(const OperatorSet& o, State& y) {
  for (int d = 0; d < o.nw; ++d)
    if (o.plate.dof_clamped(d)) {
      y.w[d] = 0.0;
      y.s[d] = 0.0;
    }
  for (int d = 0; d < o.nu; ++d) {
    const auto k = o.vmap.kind[static_cast<std::size_t>(d)];
    if (k == VelDofKind::zero_dof) y.u[d] = 0.0;
    else if (k == VelDofKind::tied_dof) y.u[d] = y.s[o.vmap.tied_plate[static_cast<std::size_t>(d)]];
  }
}

inline double constraint_defect(const OperatorSet& o, const State& y) {
  double mx = 0.0;
  for (int d = 0; d < o.nw; ++d)
    if (o.plate.dof_clamped(d)) mx = std::max(mx, std::max(std::abs(y.w[d]), std::abs(y.s[d])));
  for (int d = 0; d < o.nu; ++d) {
    const auto k = o.vmap.kind[static_cast<std::size_t>(d)];
    if (k == VelDofKind::zero_dof) mx = std::max(mx, std::abs(y.u[d]));
    else if (k == VelDofKind::tied_dof) mx = std::max(mx, std::abs(y.u[d] - y.s[o.vmap.tied_plate[static_cast<std::size_t>(d)]]));
  }
  return mx;
}

inline State random_state(const OperatorSet& o, std::mt19937_64& rng, double scale = 1.0) {
  State y = zero_state(o);
  y.p = random_vec(rng, o.np, scale);
  Vec uf = random_vec(rng, o.nuf, scale);
  Vec wf = random_vec(rng, o.nwf, scale);
  Vec sf = random_vec(rng, o.nwf, scale);
  y.w = o.pl.Rw * wf;
  y.s = o.pl.Rw * sf;
  y.u = o.R * uf + o.TR * sf;
  return y;
}

/// Time-derivative map y -> A y (perturbed: the generator shifted by
/// -div(U)/2 on the flow components). Velocity and plate accelerations come
/// from one SPD solve with the coupled interface mass matrix.
class GeneratorOp {
 public:
  explicit GeneratorOp(const OperatorSet& o) : o_(o) {
    SpMat A11 = SpMat(o.R.transpose()) * o.Mu * o.R;
    SpMat A12 = SpMat(o.R.transpose()) * o.Mu * o.TR;
    SpMat A22 = SpMat(o.TR.transpose()) * o.Mu * o.TR + o.Mw_ff;
    std::vector<Trip> t;
    auto add = [&t](int r0, int c0, const SpMat& A) {
      for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it) t.emplace_back(r0 + static_cast<int>(it.row()), c0 + static_cast<int>(it.col()), it.value());
    };
    add(0, 0, A11);
    add(0, o_.nuf, A12);
    add(o_.nuf, 0, SpMat(A12.transpose()));
    add(o_.nuf, o_.nuf, A22);
    SpMat M(o_.nuf + o_.nwf, o_.nuf + o_.nwf);
    M.setFromTriplets(t.begin(), t.end());
    mass_.compute(M);
    if (mass_.info() != Eigen::Success) throw solver_error("GeneratorOp: coupled mass factorization failed");
    mp_.compute(o.Mp);
    if (mp_.info() != Eigen::Success) throw solver_error("GeneratorOp: pressure mass factorization failed");
  }

  State apply(const State& y, bool perturbed) const {
    const OperatorSet& o = o_;
    State dy = zero_state(o);
    const SpMat& Cp = perturbed ? o.Cp : o.Cp_gen;
    const SpMat& Cu = perturbed ? o.Cu : o.Cu_gen;

    Vec rp = -(Cp * y.p) - o.D * y.u;
    dy.p = mp_.solve(rp);

    Vec res = Cu * y.u + o.Kfluid * y.u - o.D.transpose() * y.p;  // momentum row without du/dt
    Vec rhs(o.nuf + o.nwf);
    rhs.head(o.nuf) = -(o.R.transpose() * res);
    rhs.tail(o.nwf) = -(o.TR.transpose() * res) - o.Kbih_ff * (o.pl.Rw.transpose() * y.w);
    Vec acc = mass_.solve(rhs);
    dy.u = o.R * acc.head(o.nuf) + o.TR * acc.tail(o.nwf);
    dy.s = o.pl.Rw * acc.tail(o.nwf);
    dy.w = y.s;
    return dy;
  }

  const OperatorSet& ops() const { return o_; }

 private:
  const OperatorSet& o_;
  Eigen::SimplicialLDLT<SpMat> mass_;
  Eigen::SimplicialLDLT<SpMat> mp_;
};

}  // namespace fpsi

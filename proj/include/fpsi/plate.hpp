#pragma once
// Plate-side assembly on the Bogner-Fox-Schmit element: mass, biharmonic
// stiffness (which doubles as the (Lap w, Lap z) inner product block), load
// vectors, the clamped reduction, and a quadrature cache reused by the von
// Karman operators. The 4x4 Gauss rule integrates every product of second
// derivatives of bicubics exactly (degree <= 7 per axis), which is what makes
// the discrete bracket identities close to round-off.

#include "fpsi/geometry.hpp"
#include "fpsi/quadrature.hpp"
#include "fpsi/util.hpp"

#include <Eigen/SparseCholesky>

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace fpsi {

struct PlateOps {
  PlateGrid grid;
  SpMat Mw;    // (w, z) on Omega
  SpMat Kbih;  // (Lap w, Lap z) on Omega
  Vec b;       // (1, z) load
  SpMat Rw;    // injection of free (unclamped) DOFs, ndof x nfree
  std::vector<int> free_list;
  std::vector<int> free_index;  // dof -> free position or -1

  // Quadrature cache: nq^2 points per cell, identical on every cell of the
  // uniform grid. qw carries the cell Jacobian hx*hy.
  int nq = 4;
  std::vector<double> qx, qy, qw;
  std::vector<std::array<BfsVal, 16>> shp;

  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> Kfac;  // clamped stiffness factor

  int ndof() const { return grid.ndof(); }
  int nfree() const { return static_cast<int>(free_list.size()); }
  int nqp() const { return nq * nq; }

  std::array<double, 2> qp_position(int cx, int cy, int q) const {
    return {(cx + qx[static_cast<std::size_t>(q)]) * grid.hx, (cy + qy[static_cast<std::size_t>(q)]) * grid.hy};
  }

  /// Clamped biharmonic solve K w = load; returns a full DOF vector.
  Vec solve_bih_load(const Vec& load_full) const {
    const Vec lf = Rw.transpose() * load_full;
    const Vec xf = Kfac->solve(lf);
    return Rw * xf;
  }
};

inline PlateOps assemble_plate(const PlateGrid& grid, int quad = 4) {
  PlateOps P;
  P.grid = grid;
  P.nq = quad;
  const Rule1d r = gauss01(quad);
  const double hx = grid.hx, hy = grid.hy;
  for (int a = 0; a < quad; ++a)
    for (int c = 0; c < quad; ++c) {
      P.qx.push_back(r.x[static_cast<std::size_t>(a)]);
      P.qy.push_back(r.x[static_cast<std::size_t>(c)]);
      P.qw.push_back(r.w[static_cast<std::size_t>(a)] * r.w[static_cast<std::size_t>(c)] * hx * hy);
      std::array<BfsVal, 16> at{};
      for (int l = 0; l < 16; ++l)
        at[static_cast<std::size_t>(l)] = bfs_eval(l, r.x[static_cast<std::size_t>(a)], r.x[static_cast<std::size_t>(c)], hx, hy);
      P.shp.push_back(at);
    }

  const int nd = grid.ndof();
  std::vector<Trip> tm, tk;
  Vec b = Vec::Zero(nd);
  Eigen::Matrix<double, 16, 16> lm, lk;
  lm.setZero();
  lk.setZero();
  Eigen::Matrix<double, 16, 1> lb;
  lb.setZero();
  // Local matrices are identical for every cell on the uniform grid.
  for (std::size_t q = 0; q < P.shp.size(); ++q) {
    const double w = P.qw[q];
    for (int i = 0; i < 16; ++i) {
      const BfsVal& si = P.shp[q][static_cast<std::size_t>(i)];
      lb[i] += w * si.v;
      for (int j = 0; j < 16; ++j) {
        const BfsVal& sj = P.shp[q][static_cast<std::size_t>(j)];
        lm(i, j) += w * si.v * sj.v;
        lk(i, j) += w * (si.dxx + si.dyy) * (sj.dxx + sj.dyy);
      }
    }
  }
  for (int cy = 0; cy < grid.ny; ++cy)
    for (int cx = 0; cx < grid.nx; ++cx) {
      const auto cn = grid.cell_nodes(cx, cy);
      std::array<int, 16> gdof;
      for (int l = 0; l < 16; ++l) gdof[static_cast<std::size_t>(l)] = 4 * cn[static_cast<std::size_t>(l / 4)] + l % 4;
      for (int i = 0; i < 16; ++i) {
        b[gdof[static_cast<std::size_t>(i)]] += lb[i];
        for (int j = 0; j < 16; ++j) {
          tm.emplace_back(gdof[static_cast<std::size_t>(i)], gdof[static_cast<std::size_t>(j)], lm(i, j));
          tk.emplace_back(gdof[static_cast<std::size_t>(i)], gdof[static_cast<std::size_t>(j)], lk(i, j));
        }
      }
    }
  P.Mw.resize(nd, nd);
  P.Mw.setFromTriplets(tm.begin(), tm.end());
  P.Kbih.resize(nd, nd);
  P.Kbih.setFromTriplets(tk.begin(), tk.end());
  P.b = b;

  P.free_index.assign(static_cast<std::size_t>(nd), -1);
  for (int d = 0; d < nd; ++d)
    if (!grid.dof_clamped(d)) {
      P.free_index[static_cast<std::size_t>(d)] = static_cast<int>(P.free_list.size());
      P.free_list.push_back(d);
    }
  std::vector<Trip> tr;
  for (std::size_t i = 0; i < P.free_list.size(); ++i) tr.emplace_back(P.free_list[i], static_cast<int>(i), 1.0);
  P.Rw.resize(nd, static_cast<int>(P.free_list.size()));
  P.Rw.setFromTriplets(tr.begin(), tr.end());

  SpMat Kff = SpMat(P.Rw.transpose()) * P.Kbih * P.Rw;
  P.Kfac = std::make_shared<Eigen::SimplicialLDLT<SpMat>>();
  P.Kfac->compute(Kff);
  if (P.Kfac->info() != Eigen::Success) throw solver_error("assemble_plate: clamped stiffness factorization failed");
  return P;
}

/// Hermite interpolant of an analytic function given its derivatives.
inline Vec plate_interpolate(const PlateGrid& g, const std::function<double(double, double)>& f,
                             const std::function<double(double, double)>& fx,
                             const std::function<double(double, double)>& fy,
                             const std::function<double(double, double)>& fxy) {
  Vec w(g.ndof());
  for (int n = 0; n < g.npts(); ++n) {
    const auto c = g.ij(n);
    const double x = g.xcoord(c[0]), y = g.ycoord(c[1]);
    w[4 * n + 0] = f(x, y);
    w[4 * n + 1] = fx(x, y);
    w[4 * n + 2] = fy(x, y);
    w[4 * n + 3] = fxy(x, y);
  }
  return w;
}

/// Values and second derivatives of a DOF vector at every cached quadrature
/// point; pass nullptr for outputs that are not needed. Arrays are cells x nq^2.
inline void plate_eval(const PlateOps& P, const Vec& dofs, Eigen::ArrayXXd* val, Eigen::ArrayXXd* dxx,
                       Eigen::ArrayXXd* dyy, Eigen::ArrayXXd* dxy) {
  const int nc = P.grid.ncells(), nq = P.nqp();
  auto init = [&](Eigen::ArrayXXd* a) {
    if (a) a->setZero(nc, nq);
  };
  init(val);
  init(dxx);
  init(dyy);
  init(dxy);
  for (int cy = 0; cy < P.grid.ny; ++cy)
    for (int cx = 0; cx < P.grid.nx; ++cx) {
      const int cell = cx + P.grid.nx * cy;
      const auto cn = P.grid.cell_nodes(cx, cy);
      std::array<double, 16> loc;
      for (int l = 0; l < 16; ++l) loc[static_cast<std::size_t>(l)] = dofs[4 * cn[static_cast<std::size_t>(l / 4)] + l % 4];
      for (int q = 0; q < nq; ++q) {
        const auto& sh = P.shp[static_cast<std::size_t>(q)];
        double v = 0, axx = 0, ayy = 0, axy = 0;
        for (int l = 0; l < 16; ++l) {
          const double d = loc[static_cast<std::size_t>(l)];
          const BfsVal& s = sh[static_cast<std::size_t>(l)];
          v += d * s.v;
          axx += d * s.dxx;
          ayy += d * s.dyy;
          axy += d * s.dxy;
        }
        if (val) (*val)(cell, q) = v;
        if (dxx) (*dxx)(cell, q) = axx;
        if (dyy) (*dyy)(cell, q) = ayy;
        if (dxy) (*dxy)(cell, q) = axy;
      }
    }
}

/// Load vector (f, z) from values of f at the cached quadrature points.
inline Vec plate_load_from_qp(const PlateOps& P, const Eigen::ArrayXXd& fvals) {
  Vec load = Vec::Zero(P.ndof());
  for (int cy = 0; cy < P.grid.ny; ++cy)
    for (int cx = 0; cx < P.grid.nx; ++cx) {
      const int cell = cx + P.grid.nx * cy;
      const auto cn = P.grid.cell_nodes(cx, cy);
      for (int q = 0; q < P.nqp(); ++q) {
        const double fw = fvals(cell, q) * P.qw[static_cast<std::size_t>(q)];
        const auto& sh = P.shp[static_cast<std::size_t>(q)];
        for (int l = 0; l < 16; ++l)
          load[4 * cn[static_cast<std::size_t>(l / 4)] + l % 4] += fw * sh[static_cast<std::size_t>(l)].v;
      }
    }
  return load;
}

/// Load vector (g, z) for an analytic g evaluated at quadrature points.
inline Vec plate_load_from_function(const PlateOps& P, const std::function<double(double, double)>& g) {
  Eigen::ArrayXXd vals(P.grid.ncells(), P.nqp());
  for (int cy = 0; cy < P.grid.ny; ++cy)
    for (int cx = 0; cx < P.grid.nx; ++cx)
      for (int q = 0; q < P.nqp(); ++q) {
        const auto xy = P.qp_position(cx, cy, q);
        vals(cx + P.grid.nx * cy, q) = g(xy[0], xy[1]);
      }
  return plate_load_from_qp(P, vals);
}

/// L2 distance between a DOF vector and an analytic reference.
inline double plate_l2_error(const PlateOps& P, const Vec& dofs, const std::function<double(double, double)>& exact) {
  Eigen::ArrayXXd val;
  plate_eval(P, dofs, &val, nullptr, nullptr, nullptr);
  double acc = 0.0;
  for (int cy = 0; cy < P.grid.ny; ++cy)
    for (int cx = 0; cx < P.grid.nx; ++cx) {
      const int cell = cx + P.grid.nx * cy;
      for (int q = 0; q < P.nqp(); ++q) {
        const auto xy = P.qp_position(cx, cy, q);
        acc += P.qw[static_cast<std::size_t>(q)] * sq(val(cell, q) - exact(xy[0], xy[1]));
      }
    }
  return std::sqrt(acc);
}

}  // namespace fpsi

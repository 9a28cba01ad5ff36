#pragma once
// Stationary transport solves: k q + U . grad q + (div U / 2) q = G on the
// box, with U tangent to the boundary, plus a viscous regularization with
// homogeneous Dirichlet data whose limit eps -> 0 recovers the plain system.
//
// The admissible-k estimate k ||q|| <= ||G|| is reproduced exactly at the
// discrete level: the advection matrix is skew, so the energy pairing leaves
// k q^T M q = q^T G_vec, and Cauchy-Schwarz applied at the quadrature points
// of the load rule (positive weights, rule exact for products of the bilinear
// basis) gives the bound with the load-rule norm of G on the right.

#include "fpsi/ambient.hpp"
#include "fpsi/geometry.hpp"
#include "fpsi/krylov.hpp"
#include "fpsi/operators.hpp"
#include "fpsi/util.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <memory>
#include <vector>

namespace fpsi {

struct TransportLoad {
  Vec vec;            // load vector against the scalar basis
  double gnorm = 0.0; // quadrature-rule L2 norm of the data
};

struct TransportSchedule {
  std::vector<double> eps;
  std::vector<Vec> q;        // regularized solutions, boundary entries zero
  std::vector<double> ratio; // k ||q||_M / ||G||
  std::vector<int> iters;
  std::vector<double> diff;  // ||q_j - q_{j-1}||_M, one entry per refinement
  bool monotone = true;      // the difference sequence never increases
};

class TransportSolver {
 public:
  TransportSolver(const BoxGeometry& g, const AmbientField& amb, double k, int uquad = 4)
      : geom_(g), amb_(amb), k_(k), uquad_(uquad) {
    if (k <= 0.0) throw config_error("transport: k must be positive");
    adv_ = assemble_scalar_advection(g, amb);
    SpMat A = k * adv_.M + adv_.C;
    limit_.compute(A);
    if (limit_.info() != Eigen::Success) throw solver_error("transport: limit factorization failed");

    const int n = g.npts();
    interior_.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      if (!g.on_boundary(i)) interior_.push_back(i);
    std::vector<Trip> t;
    for (std::size_t j = 0; j < interior_.size(); ++j) t.emplace_back(interior_[j], static_cast<int>(j), 1.0);
    Ri_.resize(n, static_cast<int>(interior_.size()));
    Ri_.setFromTriplets(t.begin(), t.end());
    Mi_ = SpMat(Ri_.transpose()) * adv_.M * Ri_;
    Ki_ = SpMat(Ri_.transpose()) * adv_.Klap * Ri_;
    Ci_ = SpMat(Ri_.transpose()) * adv_.C * Ri_;
  }

  const ScalarAdvection& advection() const { return adv_; }
  double k() const { return k_; }

  /// Assemble the load of G with the ambient quadrature rule; the returned
  /// norm is taken over the same points so the stability ratio is exact.
  TransportLoad load_from_function(const std::function<double(const Vec3&)>& G) const {
    const BoxGeometry& g = geom_;
    TransportLoad out;
    out.vec = Vec::Zero(g.npts());
    const Rule1d r = gauss01(uquad_);
    const double vol = g.hx * g.hy * g.hz;
    double nrm2 = 0.0;
    for (int cz = 0; cz < g.nz; ++cz)
      for (int cy = 0; cy < g.ny; ++cy)
        for (int cx = 0; cx < g.nx; ++cx) {
          const auto cn = g.cell_nodes(cx, cy, cz);
          for (std::size_t a = 0; a < r.x.size(); ++a)
            for (std::size_t b = 0; b < r.x.size(); ++b)
              for (std::size_t c = 0; c < r.x.size(); ++c) {
                const double w = r.w[a] * r.w[b] * r.w[c] * vol;
                const Vec3 x((cx + r.x[a]) * g.hx, (cy + r.x[b]) * g.hy, -1.0 + (cz + r.x[c]) * g.hz);
                const double gv = G(x);
                nrm2 += w * gv * gv;
                for (int l = 0; l < 8; ++l)
                  out.vec[cn[static_cast<std::size_t>(l)]] += w * gv * q1_value(l, r.x[a], r.x[b], r.x[c]);
              }
        }
    out.gnorm = std::sqrt(nrm2);
    return out;
  }

  Vec solve_limit(const TransportLoad& load) const {
    Vec q = limit_.solve(load.vec);
    if (limit_.info() != Eigen::Success) throw solver_error("transport: limit solve failed");
    return q;
  }

  /// One regularized solve on the interior DOFs. Warm start optional (full-size
  /// vector). Returns the solution extended by zero to the boundary.
  Vec solve_regularized(double eps, const TransportLoad& load, const Vec* warm = nullptr, int* iters = nullptr) const {
    SpMat S = eps * Ki_ + k_ * Mi_;  // SPD part, used as preconditioner
    Eigen::SimplicialLDLT<SpMat> fac(S);
    if (fac.info() != Eigen::Success) throw solver_error("transport: regularized preconditioner failed");
    SpMat A = S + Ci_;
    LinOp op = [&A](const Vec& x) { return Vec(A * x); };
    LinOp pre = [&fac](const Vec& x) { return Vec(fac.solve(x)); };
    Vec b = Ri_.transpose() * load.vec;
    Vec w0;
    const Vec* x0 = nullptr;
    if (warm) {
      w0 = Ri_.transpose() * (*warm);
      x0 = &w0;
    }
    KrylovResult res = bicgstab(op, b, pre, 1e-13, 4000, x0);
    if (!res.converged && res.relres > 1e-10)
      throw solver_error("transport: regularized solve stagnated, relres=" + std::to_string(res.relres));
    if (iters) *iters = res.iters;
    return Ri_ * res.x;
  }

  double estimate_ratio(const Vec& q, const TransportLoad& load) const {
    const double qn = std::sqrt(std::max(0.0, q.dot(adv_.M * q)));
    return load.gnorm > 0.0 ? k_ * qn / load.gnorm : 0.0;
  }

  /// Decreasing eps sweep, warm-started. Default schedule eps_j = h 2^-j.
  TransportSchedule solve_schedule(const TransportLoad& load, std::vector<double> eps = {}) const {
    if (eps.empty()) {
      const double h = std::min({geom_.hx, geom_.hy, geom_.hz});
      for (int j = 0; j <= 6; ++j) eps.push_back(h / static_cast<double>(1 << j));
    }
    TransportSchedule sc;
    sc.eps = eps;
    const Vec* warm = nullptr;
    for (double e : eps) {
      int it = 0;
      Vec q = solve_regularized(e, load, warm, &it);
      sc.ratio.push_back(estimate_ratio(q, load));
      sc.iters.push_back(it);
      if (warm) {
        const Vec d = q - *warm;
        sc.diff.push_back(std::sqrt(std::max(0.0, d.dot(adv_.M * d))));
      }
      sc.q.push_back(std::move(q));
      warm = &sc.q.back();
    }
    for (std::size_t j = 1; j < sc.diff.size(); ++j)
      if (sc.diff[j] > sc.diff[j - 1]) sc.monotone = false;
    return sc;
  }

  /// L2 error of the nodal field against a function, restricted to cells whose
  /// closure lies inside [m,1-m]^2 x [-1+m,-m]. margin = 0 gives the full box.
  double l2_error(const Vec& q, const std::function<double(const Vec3&)>& exact, double margin = 0.0) const {
    const BoxGeometry& g = geom_;
    const Rule1d r = gauss01(4);
    const double vol = g.hx * g.hy * g.hz;
    const double lo = margin - 1e-12, hi = 1.0 - margin + 1e-12;
    double err2 = 0.0;
    for (int cz = 0; cz < g.nz; ++cz)
      for (int cy = 0; cy < g.ny; ++cy)
        for (int cx = 0; cx < g.nx; ++cx) {
          if (margin > 0.0) {
            const double x0 = cx * g.hx, x1 = (cx + 1) * g.hx;
            const double y0 = cy * g.hy, y1 = (cy + 1) * g.hy;
            const double z0 = cz * g.hz, z1 = (cz + 1) * g.hz;  // z measured from the bottom face
            if (x0 < lo || x1 > hi || y0 < lo || y1 > hi || z0 < lo || z1 > hi) continue;
          }
          const auto cn = g.cell_nodes(cx, cy, cz);
          for (std::size_t a = 0; a < r.x.size(); ++a)
            for (std::size_t b = 0; b < r.x.size(); ++b)
              for (std::size_t c = 0; c < r.x.size(); ++c) {
                const double w = r.w[a] * r.w[b] * r.w[c] * vol;
                const Vec3 x((cx + r.x[a]) * g.hx, (cy + r.x[b]) * g.hy, -1.0 + (cz + r.x[c]) * g.hz);
                double qh = 0.0;
                for (int l = 0; l < 8; ++l) qh += q[cn[static_cast<std::size_t>(l)]] * q1_value(l, r.x[a], r.x[b], r.x[c]);
                err2 += w * sq(qh - exact(x));
              }
        }
    return std::sqrt(err2);
  }

 private:
  BoxGeometry geom_;
  AmbientField amb_;
  double k_;
  int uquad_;
  ScalarAdvection adv_;
  Eigen::SparseLU<SpMat> limit_;
  std::vector<int> interior_;
  SpMat Ri_, Mi_, Ki_, Ci_;
};

}  // namespace fpsi

#pragma once
// Ambient velocity fields U on the flow box. Built-ins:
//   zero      U = 0
//   vortex    U = (psi_y, -psi_x, 0), psi = sin^2(pi x1) sin^2(pi x2);
//             tangent to every face and divergence free
//   columnar  U = (0, 0, sin(pi x3)); tangent, div U = pi cos(pi x3)
// plus nodal-sample fields interpolated with Q1 shapes.
//
// A field carries two representations. The analytic closures (U, divU,
// gradU, lap_divU) feed growth envelopes, transport admissibility and
// manufactured data. Operator assembly instead integrates a cell-polynomial
// stand-in: the perp-gradient of the interpolated stream function when one
// is present, the trilinear interpolant of corner samples otherwise. Every
// assembled integrand is then polynomial of degree <= 3 per direction, the
// fixed 2-point Gauss rule is exact, and the discrete identities (skew
// advection, zero row sums, divergence bookkeeping) hold to round-off
// instead of to quadrature error. When is_div_free is set the divergence
// mass is dropped entirely: the stand-in is pointwise divergence free, so
// the perturbed and unperturbed generators coincide by construction.

#include "fpsi/geometry.hpp"
#include "fpsi/quadrature.hpp"
#include "fpsi/util.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>

namespace fpsi {

enum class AmbientKind { zero, vortex, columnar, file };

inline std::string to_string(AmbientKind k) {
  switch (k) {
    case AmbientKind::zero: return "zero";
    case AmbientKind::vortex: return "vortex";
    case AmbientKind::columnar: return "columnar";
    case AmbientKind::file: return "file";
  }
  return "?";
}

struct AmbientField {
  AmbientKind kind = AmbientKind::zero;
  std::function<Vec3(const Vec3&)> U;
  std::function<double(const Vec3&)> divU;
  std::function<Mat3(const Vec3&)> gradU;
  std::function<double(const Vec3&)> lap_divU;

  /// In-plane stream potential; when set, assembly represents the field as
  /// (psi_y, -psi_x, 0) of the interpolated potential, which is divergence
  /// free inside every cell and single-valued across faces.
  std::function<double(const Vec3&)> stream;

  // Structural flags. is_div_free promises that the assembly stand-in has
  // |div| <= 1e-12 at every quadrature point; is_tangent that U . n
  // vanishes on the boundary faces.
  bool is_div_free = false;
  bool is_tangent = false;

  // Metadata used by growth envelopes and transport admissibility.
  double divU_inf = 0.0;    // sup |div U|
  double grad_sup = 0.0;    // sup Frobenius norm of grad U
  double lap_div_l2 = 0.0;  // L2 norm of Laplacian(div U) over the box
};

namespace detail {

/// Max over a lattice including all faces, corners and interior points.
template <class F>
double lattice_sup(F&& f, int n = 32) {
  double sup = 0.0;
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        const Vec3 x(static_cast<double>(i) / n, static_cast<double>(j) / n, -1.0 + static_cast<double>(k) / n);
        sup = std::max(sup, f(x));
      }
  return sup;
}

template <class F>
double box_l2(F&& f, int cells = 16, int q = 4) {
  const Rule1d r = gauss01(q);
  const double h = 1.0 / cells;
  double acc = 0.0;
  for (int cz = 0; cz < cells; ++cz)
    for (int cy = 0; cy < cells; ++cy)
      for (int cx = 0; cx < cells; ++cx)
        for (std::size_t a = 0; a < r.x.size(); ++a)
          for (std::size_t b = 0; b < r.x.size(); ++b)
            for (std::size_t c = 0; c < r.x.size(); ++c) {
              const Vec3 x((cx + r.x[a]) * h, (cy + r.x[b]) * h, -1.0 + (cz + r.x[c]) * h);
              acc += r.w[a] * r.w[b] * r.w[c] * h * h * h * sq(f(x));
            }
  return std::sqrt(acc);
}

inline void finalize_metadata(AmbientField& f) {
  f.divU_inf = lattice_sup([&](const Vec3& x) { return std::abs(f.divU(x)); });
  f.grad_sup = lattice_sup([&](const Vec3& x) { return f.gradU(x).norm(); });
  f.lap_div_l2 = box_l2([&](const Vec3& x) { return f.lap_divU(x); });
}

}  // namespace detail

inline AmbientField make_ambient(AmbientKind kind) {
  using std::numbers::pi;
  AmbientField f;
  f.kind = kind;
  switch (kind) {
    case AmbientKind::zero:
      f.U = [](const Vec3&) { return Vec3::Zero().eval(); };
      f.divU = [](const Vec3&) { return 0.0; };
      f.gradU = [](const Vec3&) { return Mat3::Zero().eval(); };
      f.lap_divU = [](const Vec3&) { return 0.0; };
      f.is_div_free = true;
      f.is_tangent = true;
      break;
    case AmbientKind::vortex:
      f.U = [](const Vec3& x) {
        const double s1 = std::sin(pi * x[0]), s2 = std::sin(pi * x[1]);
        return Vec3(pi * s1 * s1 * std::sin(2.0 * pi * x[1]), -pi * std::sin(2.0 * pi * x[0]) * s2 * s2, 0.0);
      };
      f.divU = [](const Vec3&) { return 0.0; };
      f.gradU = [](const Vec3& x) {
        const double s1 = std::sin(pi * x[0]), s2 = std::sin(pi * x[1]);
        const double t1 = std::sin(2.0 * pi * x[0]), t2 = std::sin(2.0 * pi * x[1]);
        const double c1 = std::cos(2.0 * pi * x[0]), c2 = std::cos(2.0 * pi * x[1]);
        Mat3 g = Mat3::Zero();
        g(0, 0) = pi * pi * t1 * t2;          // d U1 / d x1
        g(0, 1) = 2.0 * pi * pi * s1 * s1 * c2;  // d U1 / d x2
        g(1, 0) = -2.0 * pi * pi * c1 * s2 * s2;
        g(1, 1) = -pi * pi * t1 * t2;
        return g;
      };
      f.lap_divU = [](const Vec3&) { return 0.0; };
      f.stream = [](const Vec3& x) { return sq(std::sin(pi * x[0])) * sq(std::sin(pi * x[1])); };
      f.is_div_free = true;
      f.is_tangent = true;
      break;
    case AmbientKind::columnar:
      f.U = [](const Vec3& x) { return Vec3(0.0, 0.0, std::sin(pi * x[2])); };
      f.divU = [](const Vec3& x) { return pi * std::cos(pi * x[2]); };
      f.gradU = [](const Vec3& x) {
        Mat3 g = Mat3::Zero();
        g(2, 2) = pi * std::cos(pi * x[2]);
        return g;
      };
      f.lap_divU = [](const Vec3& x) { return -pi * pi * pi * std::cos(pi * x[2]); };
      f.is_tangent = true;
      break;
    case AmbientKind::file:
      throw config_error("make_ambient: file fields come from make_ambient_from_nodal");
  }
  detail::finalize_metadata(f);
  return f;
}

/// Field from nodal samples (component-major velocity block plus nodal div U),
/// interpolated with the fluid Q1 shapes. Piecewise-trilinear data has zero
/// Laplacian of its divergence inside every cell, so the admissibility bound
/// for sampled fields rests on the gradient term alone.
inline AmbientField make_ambient_from_nodal(const BoxGeometry& g, const Vec& unodal, const Vec& divnodal) {
  if (unodal.size() != 3 * g.npts() || divnodal.size() != g.npts())
    throw config_error("make_ambient_from_nodal: sample block sizes do not match the grid");
  auto geom = std::make_shared<BoxGeometry>(g);
  auto uu = std::make_shared<Vec>(unodal);
  auto dd = std::make_shared<Vec>(divnodal);

  auto locate = [geom](const Vec3& x, int& cx, int& cy, int& cz, Vec3& loc) {
    auto clamp_cell = [](double t, int n) {
      int c = static_cast<int>(std::floor(t * n));
      if (c < 0) c = 0;
      if (c >= n) c = n - 1;
      return c;
    };
    const double zx = x[0], zy = x[1], zz = x[2] + 1.0;
    cx = clamp_cell(zx, geom->nx);
    cy = clamp_cell(zy, geom->ny);
    cz = clamp_cell(zz, geom->nz);
    loc = Vec3(zx * geom->nx - cx, zy * geom->ny - cy, zz * geom->nz - cz);
  };

  AmbientField f;
  f.kind = AmbientKind::file;
  f.U = [geom, uu, locate](const Vec3& x) {
    int cx, cy, cz;
    Vec3 loc;
    locate(x, cx, cy, cz, loc);
    const auto nodes = geom->cell_nodes(cx, cy, cz);
    Vec3 val = Vec3::Zero();
    const int n = geom->npts();
    for (int l = 0; l < 8; ++l) {
      const double s = q1_value(l, loc[0], loc[1], loc[2]);
      for (int c = 0; c < 3; ++c) val[c] += s * (*uu)[c * n + nodes[static_cast<std::size_t>(l)]];
    }
    return val;
  };
  f.divU = [geom, dd, locate](const Vec3& x) {
    int cx, cy, cz;
    Vec3 loc;
    locate(x, cx, cy, cz, loc);
    const auto nodes = geom->cell_nodes(cx, cy, cz);
    double val = 0.0;
    for (int l = 0; l < 8; ++l) val += q1_value(l, loc[0], loc[1], loc[2]) * (*dd)[nodes[static_cast<std::size_t>(l)]];
    return val;
  };
  f.gradU = [geom, uu, locate](const Vec3& x) {
    int cx, cy, cz;
    Vec3 loc;
    locate(x, cx, cy, cz, loc);
    const auto nodes = geom->cell_nodes(cx, cy, cz);
    Mat3 val = Mat3::Zero();
    const int n = geom->npts();
    const Vec3 hinv(1.0 / geom->hx, 1.0 / geom->hy, 1.0 / geom->hz);
    for (int l = 0; l < 8; ++l) {
      const Vec3 gr = q1_grad(l, loc[0], loc[1], loc[2]);
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) val(c, d) += (*uu)[c * n + nodes[static_cast<std::size_t>(l)]] * gr[d] * hinv[d];
    }
    return val;
  };
  f.lap_divU = [](const Vec3&) { return 0.0; };

  // Structural flags from the samples. Tangency follows once the normal
  // component vanishes at every boundary node, because the interpolated
  // face trace is the bilinear hull of those samples. Divergence freedom
  // requires zero divergence samples plus a pointwise divergence-free
  // interpolant at the assembly quadrature points of every cell.
  {
    const int n = g.npts();
    bool tang = true;
    for (int id = 0; id < n && tang; ++id) {
      const auto c = g.ijk(id);
      if ((c[0] == 0 || c[0] == g.nx) && unodal[id] != 0.0) tang = false;
      if ((c[1] == 0 || c[1] == g.ny) && unodal[n + id] != 0.0) tang = false;
      if ((c[2] == 0 || c[2] == g.nz) && unodal[2 * n + id] != 0.0) tang = false;
    }
    f.is_tangent = tang;

    double dvmax = 0.0;
    const Rule1d r = gauss01(2);
    for (int cz = 0; cz < g.nz; ++cz)
      for (int cy = 0; cy < g.ny; ++cy)
        for (int cx = 0; cx < g.nx; ++cx) {
          const auto nodes = g.cell_nodes(cx, cy, cz);
          for (std::size_t a = 0; a < r.x.size(); ++a)
            for (std::size_t b = 0; b < r.x.size(); ++b)
              for (std::size_t c = 0; c < r.x.size(); ++c) {
                double dv = 0.0;
                for (int l = 0; l < 8; ++l) {
                  const Vec3 gr = q1_grad(l, r.x[a], r.x[b], r.x[c]);
                  const int id = nodes[static_cast<std::size_t>(l)];
                  dv += unodal[id] * gr[0] / g.hx + unodal[n + id] * gr[1] / g.hy + unodal[2 * n + id] * gr[2] / g.hz;
                }
                dvmax = std::max(dvmax, std::abs(dv));
              }
        }
    f.is_div_free = divnodal.cwiseAbs().maxCoeff() == 0.0 && dvmax <= 1e-12;
  }
  detail::finalize_metadata(f);
  return f;
}

/// Largest |U . n| over tensor sample points of every boundary facet.
inline double tangency_defect(const BoxGeometry& g, const AmbientField& f, int samples = 3) {
  const auto facets = classify_facets(g);
  double worst = 0.0;
  for (const auto& fc : facets) {
    const Vec3 a = g.coord(fc.nodes[0]);
    const Vec3 b = g.coord(fc.nodes[2]);  // diagonal corner
    for (int s = 0; s <= samples; ++s)
      for (int t = 0; t <= samples; ++t) {
        Vec3 x = a;
        int other = 0;
        for (int d = 0; d < 3; ++d)
          if (d != fc.axis) {
            const double frac = (other++ == 0) ? static_cast<double>(s) / samples : static_cast<double>(t) / samples;
            x[d] = a[d] + frac * (b[d] - a[d]);
          }
        worst = std::max(worst, std::abs(f.U(x)[fc.axis]));
      }
  }
  return worst;
}

struct TransportAdmissibility {
  double k_min = 0.0;
  double grad_term = 0.0;
  double lap_term = 0.0;
  double c_s = 1.0;
};

/// Smallest admissible transport reaction coefficient for the field:
/// k >= 2 sup|grad U| + (C_S / 2) meas(box)^{1/6} ||lap div U||_L2.
inline TransportAdmissibility admissibility(const AmbientField& f, double c_s = 1.0) {
  TransportAdmissibility a;
  a.c_s = c_s;
  a.grad_term = 2.0 * f.grad_sup;
  const double meas = 1.0;  // |(0,1)^2 x (-1,0)|
  a.lap_term = 0.5 * c_s * std::pow(meas, 1.0 / 6.0) * f.lap_div_l2;
  a.k_min = a.grad_term + a.lap_term;
  return a;
}

}  // namespace fpsi

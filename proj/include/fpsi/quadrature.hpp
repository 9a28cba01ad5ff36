#pragma once
// Gauss-Legendre rules on [0,1] and the local element bases: trilinear Q1 on
// the unit cube for fluid unknowns, bicubic Hermite (Bogner-Fox-Schmit) on the
// unit square for the plate. Derivative degrees of freedom are physical, so
// the Hermite shapes carry the element spacings as scale factors.

#include "fpsi/util.hpp"

#include <array>
#include <vector>

namespace fpsi {

struct Rule1d {
  std::vector<double> x;  // points in [0,1]
  std::vector<double> w;  // weights summing to 1
};

/// n-point Gauss-Legendre rule mapped to [0,1]; exact for degree <= 2n-1.
inline Rule1d gauss01(int n) {
  // (abscissa, weight) pairs on [-1,1]
  static const std::array<std::vector<std::array<double, 2>>, 6> table = {{
      {{{0.0, 2.0}}},
      {{{-0.5773502691896257, 1.0}, {0.5773502691896257, 1.0}}},
      {{{-0.7745966692414834, 0.5555555555555556},
        {0.0, 0.8888888888888889},
        {0.7745966692414834, 0.5555555555555556}}},
      {{{-0.8611363115940526, 0.3478548451374538},
        {-0.3399810435848563, 0.6521451548625461},
        {0.3399810435848563, 0.6521451548625461},
        {0.8611363115940526, 0.3478548451374538}}},
      {{{-0.9061798459386640, 0.2369268850561891},
        {-0.5384693101056831, 0.4786286704993665},
        {0.0, 0.5688888888888889},
        {0.5384693101056831, 0.4786286704993665},
        {0.9061798459386640, 0.2369268850561891}}},
      {{{-0.9324695142031521, 0.1713244923791704},
        {-0.6612093864662645, 0.3607615730481386},
        {-0.2386191860831969, 0.4679139345726910},
        {0.2386191860831969, 0.4679139345726910},
        {0.6612093864662645, 0.3607615730481386},
        {0.9324695142031521, 0.1713244923791704}}},
  }};
  if (n < 1 || n > 6) throw error("gauss01: rule order out of range [1,6]");
  Rule1d r;
  for (const auto& pw : table[static_cast<std::size_t>(n - 1)]) {
    r.x.push_back(0.5 * (pw[0] + 1.0));
    r.w.push_back(0.5 * pw[1]);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Q1 trilinear basis on the unit cube. Local corner l = lx + 2 ly + 4 lz.
// ---------------------------------------------------------------------------

inline double q1_value(int l, double x, double y, double z) {
  const double fx = (l & 1) ? x : 1.0 - x;
  const double fy = (l & 2) ? y : 1.0 - y;
  const double fz = (l & 4) ? z : 1.0 - z;
  return fx * fy * fz;
}

/// Gradient on the unit cube; divide by spacings for physical gradients.
inline Vec3 q1_grad(int l, double x, double y, double z) {
  const double fx = (l & 1) ? x : 1.0 - x;
  const double fy = (l & 2) ? y : 1.0 - y;
  const double fz = (l & 4) ? z : 1.0 - z;
  const double dx = (l & 1) ? 1.0 : -1.0;
  const double dy = (l & 2) ? 1.0 : -1.0;
  const double dz = (l & 4) ? 1.0 : -1.0;
  return Vec3(dx * fy * fz, fx * dy * fz, fx * fy * dz);
}

// ---------------------------------------------------------------------------
// Cubic Hermite shapes on [0,1]: node in {0,1}, type in {0: value, 1: slope},
// deriv in {0,1,2}.
// ---------------------------------------------------------------------------

inline double hermite(int node, int type, int deriv, double t) {
  const double t2 = t * t, t3 = t2 * t;
  if (node == 0 && type == 0) {
    if (deriv == 0) return 1.0 - 3.0 * t2 + 2.0 * t3;
    if (deriv == 1) return -6.0 * t + 6.0 * t2;
    return -6.0 + 12.0 * t;
  }
  if (node == 0 && type == 1) {
    if (deriv == 0) return t - 2.0 * t2 + t3;
    if (deriv == 1) return 1.0 - 4.0 * t + 3.0 * t2;
    return -4.0 + 6.0 * t;
  }
  if (node == 1 && type == 0) {
    if (deriv == 0) return 3.0 * t2 - 2.0 * t3;
    if (deriv == 1) return 6.0 * t - 6.0 * t2;
    return 6.0 - 12.0 * t;
  }
  if (deriv == 0) return -t2 + t3;
  if (deriv == 1) return -2.0 * t + 3.0 * t2;
  return -2.0 + 6.0 * t;
}

/// Values and physical derivatives of one Bogner-Fox-Schmit shape function.
struct BfsVal {
  double v;    // value
  double dx;   // d/dx
  double dy;   // d/dy
  double dxx;  // d2/dx2
  double dyy;  // d2/dy2
  double dxy;  // d2/dxdy
};

/// Local BFS basis on a hx-by-hy rectangle at unit coordinates (xi, eta).
/// Local index l = 4 * (a + 2 b) + (dx_flag + 2 dy_flag) for corner (a, b);
/// the DOF layout matches the global per-node order (w, w_x, w_y, w_xy).
inline BfsVal bfs_eval(int l, double xi, double eta, double hx, double hy) {
  const int corner = l / 4;
  const int type = l % 4;
  const int a = corner & 1, b = (corner >> 1) & 1;
  const int tx = type & 1, ty = (type >> 1) & 1;
  // DOFs store physical derivatives, so slope shapes are scaled by spacings.
  const double scale = (tx ? hx : 1.0) * (ty ? hy : 1.0);
  const double fx0 = hermite(a, tx, 0, xi), fx1 = hermite(a, tx, 1, xi), fx2 = hermite(a, tx, 2, xi);
  const double fy0 = hermite(b, ty, 0, eta), fy1 = hermite(b, ty, 1, eta), fy2 = hermite(b, ty, 2, eta);
  BfsVal out;
  out.v = scale * fx0 * fy0;
  out.dx = scale * fx1 * fy0 / hx;
  out.dy = scale * fx0 * fy1 / hy;
  out.dxx = scale * fx2 * fy0 / (hx * hx);
  out.dyy = scale * fx0 * fy2 / (hy * hy);
  out.dxy = scale * fx1 * fy1 / (hx * hy);
  return out;
}

}  // namespace fpsi

#pragma once
// Structured grids for the flow box (0,1)^2 x (-1,0) and the elastic plate
// face Omega = (0,1)^2 x {0}. The remaining five faces form the rigid wall S.
// The plate grid always coincides with the top face of the fluid grid, so
// interface nodes align exactly and trace / lift maps are index lookups.

#include "fpsi/util.hpp"

#include <array>
#include <vector>

namespace fpsi {

enum class FacetKind { omega, wall };

struct Facet {
  std::array<int, 4> nodes;  // corner node ids, boundary face of one cell
  FacetKind kind;
  int axis;       // outward normal axis 0,1,2
  bool positive;  // normal points toward +axis
};

struct BoxGeometry {
  int nx = 0, ny = 0, nz = 0;
  double hx = 0, hy = 0, hz = 0;

  int npts() const { return (nx + 1) * (ny + 1) * (nz + 1); }
  int ncells() const { return nx * ny * nz; }

  int node(int i, int j, int k) const { return i + (nx + 1) * (j + (ny + 1) * k); }

  std::array<int, 3> ijk(int n) const {
    const int i = n % (nx + 1);
    const int j = (n / (nx + 1)) % (ny + 1);
    const int k = n / ((nx + 1) * (ny + 1));
    return {i, j, k};
  }

  Vec3 coord(int n) const {
    const auto c = ijk(n);
    return Vec3(c[0] * hx, c[1] * hy, -1.0 + c[2] * hz);
  }

  bool on_omega(int n) const { return ijk(n)[2] == nz; }

  bool on_boundary(int n) const {
    const auto c = ijk(n);
    return c[0] == 0 || c[0] == nx || c[1] == 0 || c[1] == ny || c[2] == 0 || c[2] == nz;
  }

  /// Corner nodes of cell (cx, cy, cz) in Q1 local order (lx + 2 ly + 4 lz).
  std::array<int, 8> cell_nodes(int cx, int cy, int cz) const {
    std::array<int, 8> out;
    for (int l = 0; l < 8; ++l)
      out[static_cast<std::size_t>(l)] = node(cx + (l & 1), cy + ((l >> 1) & 1), cz + ((l >> 2) & 1));
    return out;
  }
};

inline BoxGeometry build_box_grid(int nx, int ny, int nz) {
  if (nx < 2 || ny < 2 || nz < 2) throw config_error("build_box_grid: nx, ny, nz must each be >= 2");
  BoxGeometry g;
  g.nx = nx;
  g.ny = ny;
  g.nz = nz;
  g.hx = 1.0 / nx;
  g.hy = 1.0 / ny;
  g.hz = 1.0 / nz;
  return g;
}

/// Boundary facets of the box, the top face tagged as the plate interface.
inline std::vector<Facet> classify_facets(const BoxGeometry& g) {
  std::vector<Facet> out;
  auto push = [&](std::array<int, 4> nodes, FacetKind kind, int axis, bool pos) {
    out.push_back(Facet{nodes, kind, axis, pos});
  };
  for (int j = 0; j < g.ny; ++j)
    for (int k = 0; k < g.nz; ++k) {
      push({g.node(0, j, k), g.node(0, j + 1, k), g.node(0, j + 1, k + 1), g.node(0, j, k + 1)}, FacetKind::wall, 0, false);
      push({g.node(g.nx, j, k), g.node(g.nx, j + 1, k), g.node(g.nx, j + 1, k + 1), g.node(g.nx, j, k + 1)}, FacetKind::wall, 0, true);
    }
  for (int i = 0; i < g.nx; ++i)
    for (int k = 0; k < g.nz; ++k) {
      push({g.node(i, 0, k), g.node(i + 1, 0, k), g.node(i + 1, 0, k + 1), g.node(i, 0, k + 1)}, FacetKind::wall, 1, false);
      push({g.node(i, g.ny, k), g.node(i + 1, g.ny, k), g.node(i + 1, g.ny, k + 1), g.node(i, g.ny, k + 1)}, FacetKind::wall, 1, true);
    }
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      push({g.node(i, j, 0), g.node(i + 1, j, 0), g.node(i + 1, j + 1, 0), g.node(i, j + 1, 0)}, FacetKind::wall, 2, false);
      push({g.node(i, j, g.nz), g.node(i + 1, j, g.nz), g.node(i + 1, j + 1, g.nz), g.node(i, j + 1, g.nz)}, FacetKind::omega, 2, true);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Plate grid. Four DOFs per node: value, d/dx, d/dy, d2/dxdy. The clamped
// boundary zeroes all four at boundary nodes, which keeps the Hermite space
// inside H^2_0: value plus tangential slope kill the edge trace, normal slope
// plus twist kill the normal derivative along the edge.
// ---------------------------------------------------------------------------

struct PlateGrid {
  int nx = 0, ny = 0;
  double hx = 0, hy = 0;

  int npts() const { return (nx + 1) * (ny + 1); }
  int ncells() const { return nx * ny; }
  int ndof() const { return 4 * npts(); }

  int node(int i, int j) const { return i + (nx + 1) * j; }
  std::array<int, 2> ij(int n) const { return {n % (nx + 1), n / (nx + 1)}; }

  double xcoord(int i) const { return i * hx; }
  double ycoord(int j) const { return j * hy; }

  bool node_clamped(int n) const {
    const auto c = ij(n);
    return c[0] == 0 || c[0] == nx || c[1] == 0 || c[1] == ny;
  }
  bool dof_clamped(int dof) const { return node_clamped(dof / 4); }

  /// Corner nodes of cell (cx, cy) in BFS local corner order (a + 2 b).
  std::array<int, 4> cell_nodes(int cx, int cy) const {
    return {node(cx, cy), node(cx + 1, cy), node(cx, cy + 1), node(cx + 1, cy + 1)};
  }
};

inline PlateGrid build_plate_grid(int nx, int ny) {
  if (nx < 2 || ny < 2) throw config_error("build_plate_grid: nx, ny must each be >= 2");
  PlateGrid p;
  p.nx = nx;
  p.ny = ny;
  p.hx = 1.0 / nx;
  p.hy = 1.0 / ny;
  return p;
}

/// The coupled system always uses the plate grid inherited from the top face.
inline PlateGrid build_plate_grid(const BoxGeometry& g) { return build_plate_grid(g.nx, g.ny); }

// ---------------------------------------------------------------------------
// Interface alignment and velocity DOF classification.
//
// Velocity DOF layout is component major: dof = c * npts + node. Normal
// components on wall faces are constrained to zero; the vertical component on
// interface nodes is tied to the plate value DOF at the same (i, j), except
// along the clamped plate rim where it is zero.
// ---------------------------------------------------------------------------

struct TraceMap {
  std::vector<int> plate_to_fluid;  // plate node -> top-face fluid node
  std::vector<int> fluid_top_to_plate;  // fluid node -> plate node or -1
};

inline TraceMap build_trace_map(const BoxGeometry& g, const PlateGrid& p) {
  if (p.nx != g.nx || p.ny != g.ny) throw config_error("build_trace_map: plate grid must match the box top face");
  TraceMap t;
  t.plate_to_fluid.resize(static_cast<std::size_t>(p.npts()));
  t.fluid_top_to_plate.assign(static_cast<std::size_t>(g.npts()), -1);
  for (int j = 0; j <= p.ny; ++j)
    for (int i = 0; i <= p.nx; ++i) {
      const int pn = p.node(i, j);
      const int fn = g.node(i, j, g.nz);
      t.plate_to_fluid[static_cast<std::size_t>(pn)] = fn;
      t.fluid_top_to_plate[static_cast<std::size_t>(fn)] = pn;
    }
  return t;
}

enum class VelDofKind : std::uint8_t { free_dof, zero_dof, tied_dof };

struct VelocityDofMap {
  std::vector<VelDofKind> kind;   // size 3 * npts
  std::vector<int> tied_plate;    // plate value DOF for tied entries, else -1
  std::vector<int> free_list;     // free DOF ids in ascending order
  std::vector<int> free_index;    // dof -> position in free_list or -1
};

inline VelocityDofMap build_velocity_dofs(const BoxGeometry& g, const PlateGrid& p, const TraceMap& tm) {
  const int n = g.npts();
  VelocityDofMap m;
  m.kind.assign(static_cast<std::size_t>(3 * n), VelDofKind::free_dof);
  m.tied_plate.assign(static_cast<std::size_t>(3 * n), -1);
  for (int node = 0; node < n; ++node) {
    const auto c = g.ijk(node);
    if (c[0] == 0 || c[0] == g.nx) m.kind[static_cast<std::size_t>(node)] = VelDofKind::zero_dof;
    if (c[1] == 0 || c[1] == g.ny) m.kind[static_cast<std::size_t>(n + node)] = VelDofKind::zero_dof;
    if (c[2] == 0) m.kind[static_cast<std::size_t>(2 * n + node)] = VelDofKind::zero_dof;
    if (c[2] == g.nz) {
      const int pn = tm.fluid_top_to_plate[static_cast<std::size_t>(node)];
      const std::size_t dof = static_cast<std::size_t>(2 * n + node);
      if (p.node_clamped(pn)) {
        m.kind[dof] = VelDofKind::zero_dof;
      } else {
        m.kind[dof] = VelDofKind::tied_dof;
        m.tied_plate[dof] = 4 * pn;
      }
    }
  }
  m.free_index.assign(static_cast<std::size_t>(3 * n), -1);
  for (int d = 0; d < 3 * n; ++d)
    if (m.kind[static_cast<std::size_t>(d)] == VelDofKind::free_dof) {
      m.free_index[static_cast<std::size_t>(d)] = static_cast<int>(m.free_list.size());
      m.free_list.push_back(d);
    }
  return m;
}

/// Nodal interface values of a plate DOF vector: g_i = w(value DOF) at node i.
inline Vec trace_plate_values(const PlateGrid& p, const Vec& w) {
  Vec g(p.npts());
  for (int n = 0; n < p.npts(); ++n) g[n] = w[4 * n];
  return g;
}

/// Lift interface data g into the box: (0, 0, g(x1, x2) (1 + x3)) sampled at
/// nodes. Vanishes on the wall whenever g vanishes on the plate rim.
inline Vec lift_interface_values(const BoxGeometry& g, const PlateGrid& p, const TraceMap&, const Vec& gvals) {
  for (int n = 0; n < p.npts(); ++n)
    if (p.node_clamped(n) && std::abs(gvals[n]) > 0.0)
      throw error("lift_interface_values: nonzero data on the clamped rim");
  const int npts = g.npts();
  Vec v = Vec::Zero(3 * npts);
  for (int node = 0; node < npts; ++node) {
    const double z = g.coord(node)[2];
    const auto c = g.ijk(node);
    const int pn = p.node(c[0], c[1]);
    v[2 * npts + node] = gvals[pn] * (1.0 + z);
  }
  return v;
}

}  // namespace fpsi

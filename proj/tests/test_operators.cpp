#include <fpsi/hspace.hpp>
#include <fpsi/operators.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace fpsi;

namespace {

OperatorSet make_ops(AmbientKind kind, int n = 4) {
  Params par;
  par.nu = 0.7;
  par.lambda = 0.3;
  par.eta = 1.1;
  return assemble_operators(build_box_grid(n, n, n), par, make_ambient(kind));
}

double max_abs(const SpMat& A) {
  double mx = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) mx = std::max(mx, std::abs(it.value()));
  return mx;
}

}  // namespace

TEST_CASE("advection matrix is exactly skew", "[operators]") {
  for (AmbientKind kind : {AmbientKind::vortex, AmbientKind::columnar}) {
    OperatorSet o = make_ops(kind);
    REQUIRE(max_abs(SpMat(o.Cp + SpMat(o.Cp.transpose()))) == 0.0);
    REQUIRE(max_abs(SpMat(o.Cu + SpMat(o.Cu.transpose()))) == 0.0);
  }
}

TEST_CASE("divergence-free fields produce no divergence mass", "[operators]") {
  OperatorSet o = make_ops(AmbientKind::vortex);
  REQUIRE(o.amb.is_div_free);
  REQUIRE(max_abs(o.Mdivp) == 0.0);
  REQUIRE(o.div_qp_max <= 1e-12);  // pointwise promise of the flag
  OperatorSet oz = make_ops(AmbientKind::zero);
  REQUIRE(max_abs(oz.Np) == 0.0);
  REQUIRE(oz.div_qp_max == 0.0);
}

TEST_CASE("compressible fields report their divergence at quadrature points", "[operators]") {
  OperatorSet o = make_ops(AmbientKind::columnar);
  REQUIRE_FALSE(o.amb.is_div_free);
  REQUIRE(o.div_qp_max > 0.1);
  // interpolated divergence is a difference quotient of sin, capped by the slope
  REQUIRE(o.div_qp_max <= o.amb.divU_inf * (1.0 + 1e-12));
}

TEST_CASE("divergence mass is dominated by the scaled mass form", "[operators]") {
  OperatorSet o = make_ops(AmbientKind::columnar);
  auto rng = make_rng(7);
  for (int i = 0; i < 10; ++i) {
    Vec q = random_vec(rng, o.np);
    REQUIRE(std::abs(q.dot(o.Mdivp * q)) <= o.amb.divU_inf * q.dot(o.Mp * q) * (1.0 + 1e-12));
  }
}

TEST_CASE("viscous form matches a linear-field closed form", "[operators][oracle]") {
  OperatorSet o = make_ops(AmbientKind::zero, 3);
  const int n = o.np;
  Vec u = Vec::Zero(3 * n);
  for (int node = 0; node < n; ++node) u[node] = o.geom.coord(node)[0];  // u = (x1, 0, 0)
  // sigma(u):eps(u) = 2 nu + lambda on the unit-volume box, damping adds eta/3
  const double expected = 2.0 * o.par.nu + o.par.lambda + o.par.eta / 3.0;
  REQUIRE(std::abs(a_O(o, u) - expected) < 1e-12);
  // total divergence of this field is the box volume
  REQUIRE(std::abs(Vec::Ones(n).dot(o.D * u) - 1.0) < 1e-13);
}

TEST_CASE("constant pressure is compatible with the free velocity space", "[operators]") {
  for (AmbientKind kind : {AmbientKind::zero, AmbientKind::vortex, AmbientKind::columnar}) {
    OperatorSet o = make_ops(kind);
    Vec r = o.R.transpose() * (o.D.transpose() * Vec::Ones(o.np));
    REQUIRE(r.cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("random states satisfy the kinematic constraints", "[operators]") {
  OperatorSet o = make_ops(AmbientKind::vortex);
  auto rng = make_rng(3);
  State y = random_state(o, rng);
  REQUIRE(constraint_defect(o, y) == 0.0);
  y.u[o.vmap.free_list[0]] += 0.5;  // still free, still fine
  REQUIRE(constraint_defect(o, y) == 0.0);
  y.w[4 * o.plate.node(0, 0)] = 1.0;  // clamped corner violates
  REQUIRE(constraint_defect(o, y) == 1.0);
}

TEST_CASE("generator keeps states inside the constrained space", "[operators]") {
  OperatorSet o = make_ops(AmbientKind::columnar);
  GeneratorOp gen(o);
  auto rng = make_rng(11);
  State y = random_state(o, rng);
  State dy = gen.apply(y, true);
  REQUIRE(constraint_defect(o, dy) < 1e-11);
  REQUIRE(dy.w.isApprox(y.s));  // displacement rate is the plate velocity
}

TEST_CASE("energy pairing of the shifted generator is exactly dissipative", "[operators]") {
  for (AmbientKind kind : {AmbientKind::zero, AmbientKind::vortex, AmbientKind::columnar}) {
    OperatorSet o = make_ops(kind);
    GeneratorOp gen(o);
    auto rng = make_rng(29);
    for (int i = 0; i < 5; ++i) {
      State y = random_state(o, rng);
      const double scale = 1.0 + sq(norm_H(o, y));
      REQUIRE(std::abs(dissipativity_residual(o, gen, y, true)) < 1e-11 * scale);
      REQUIRE(std::abs(dissipativity_residual(o, gen, y, false)) < 1e-11 * scale);
    }
  }
}

TEST_CASE("interface stress load is linear and supported on the plate", "[operators]") {
  OperatorSet o = make_ops(AmbientKind::zero);
  auto rng = make_rng(5);
  Vec u = random_vec(rng, o.nu), p = random_vec(rng, o.np);
  Vec s1 = stress_trace(o, u, p);
  Vec s2 = stress_trace(o, Vec(2.0 * u), Vec(2.0 * p));
  REQUIRE((s2 - 2.0 * s1).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + s1.cwiseAbs().maxCoeff()));
  // only value DOFs of interior plate nodes can carry load
  for (int n = 0; n < o.plate.npts(); ++n)
    for (int d = 1; d < 4; ++d) REQUIRE(s1[4 * n + d] == 0.0);
}

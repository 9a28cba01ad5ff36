#include <fpsi/hspace.hpp>
#include <fpsi/integrator.hpp>
#include <fpsi/stationary.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace fpsi;

namespace {

OperatorSet make_ops(AmbientKind kind, int n = 4) {
  Params par;
  return assemble_operators(build_box_grid(n, n, n), par, make_ambient(kind));
}

}  // namespace

TEST_CASE("constructed steady state has the advertised structure", "[stationary]") {
  for (AmbientKind kind : {AmbientKind::zero, AmbientKind::vortex}) {
    OperatorSet o = make_ops(kind);
    GeneratorOp gen(o);
    State y = solve_linear_stationary(o, 2.0);
    REQUIRE(y.u.norm() == 0.0);
    REQUIRE(y.s.norm() == 0.0);
    KernelReport rep = verify_kernel_structure(o, gen, y);
    CAPTURE(rep.c, rep.u_rel, rep.gradp_rel, rep.gen_residual, rep.plate_residual);
    REQUIRE(std::abs(rep.c - 2.0) < 1e-10);
    REQUIRE(rep.gradp_rel < 1e-10);
    REQUIRE(rep.p_stddev_rel < 1e-12);
    REQUIRE(rep.plate_residual < 1e-10);
    REQUIRE(rep.gen_residual < 1e-9);
  }
}

TEST_CASE("inverse iteration recovers the steady direction", "[stationary]") {
  OperatorSet o = make_ops(AmbientKind::vortex);
  GeneratorOp gen(o);
  auto rng = make_rng(63);
  State y = extract_kernel(o, rng);
  KernelReport rep = verify_kernel_structure(o, gen, y);
  CAPTURE(rep.c, rep.u_rel, rep.gradp_rel, rep.p_stddev_rel, rep.gen_residual);
  REQUIRE(rep.u_rel < 1e-6);
  REQUIRE(rep.gradp_rel < 1e-6);
  REQUIRE(rep.p_stddev_rel < 1e-8);  // accepted kernel vectors have constant p
  REQUIRE(rep.gen_residual < 1e-7);
  REQUIRE(rep.c > 0.0);  // sign convention: mean pressure is positive
}

TEST_CASE("steady states are fixed points of the implicit scheme", "[stationary]") {
  OperatorSet o = make_ops(AmbientKind::vortex);
  State y0 = solve_linear_stationary(o, 1.0);
  const double n0 = norm_H(o, y0);
  TimeIntegrator ti(o, Scheme::backward_euler, 0.1);
  ti.set_state(y0);
  for (int i = 0; i < 5; ++i) {
    State before = ti.state();
    ti.step();
    REQUIRE(norm_H(o, ti.state() + before * (-1.0)) < 1e-8 * n0);
  }
}

TEST_CASE("Newton continuation finds only the flat panel when unloaded", "[stationary][newton]") {
  OperatorSet o = make_ops(AmbientKind::zero);
  VonKarman vk(o.pl, make_prestress(o.plate, "zero", 0.0));
  auto rng = make_rng(5);
  auto members = solve_nonlinear_stationary(o, vk, 0.0, rng);
  REQUIRE(!members.empty());
  for (const NewtonMember& m : members) {
    REQUIRE(m.converged);
    REQUIRE(m.residual < 1e-10);
    REQUIRE(m.wnorm < 1e-8);
  }
}

TEST_CASE("Newton solutions approach the linear response as the load vanishes", "[stationary][newton]") {
  OperatorSet o = make_ops(AmbientKind::zero);
  VonKarman vk(o.pl, make_prestress(o.plate, "zero", 0.0));
  double prev_gap = -1.0;
  for (double c : {0.2, 0.1}) {
    auto rng = make_rng(11);
    auto members = solve_nonlinear_stationary(o, vk, c, rng);
    REQUIRE(!members.empty());
    REQUIRE(members.front().converged);
    REQUIRE(members.front().residual < 1e-8);
    State lin = solve_linear_stationary(o, c);
    Vec d = members.front().w - lin.w;
    const double gap = std::sqrt(d.dot(o.pl.Kbih * d));
    CAPTURE(c, gap);
    if (prev_gap > 0.0) REQUIRE(gap < prev_gap / 5.0);  // cubic defect, order >= 2.5 in c
    prev_gap = gap;
  }
}

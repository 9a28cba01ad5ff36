#include <fpsi/hspace.hpp>
#include <fpsi/resolvent.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace fpsi;

namespace {

OperatorSet make_ops(AmbientKind kind, int nf) {
  Params par;
  par.nu = 1.0;
  par.lambda = 0.5;
  par.eta = 1.0;
  return assemble_operators(build_box_grid(nf, nf, nf), par, make_ambient(kind));
}

}  // namespace

TEST_CASE("monolithic resolvent inverts the shifted generator", "[resolvent]") {
  for (AmbientKind kind : {AmbientKind::zero, AmbientKind::columnar}) {
    OperatorSet o = make_ops(kind, 4);
    GeneratorOp gen(o);
    const double xi = xi_min_heuristic(o.amb, o.par.c_s) + 1.0;
    for (bool perturbed : {false, true}) {
      MonolithicResolvent res(o, xi, perturbed);
      auto rng = make_rng(101);
      for (int i = 0; i < 4; ++i) {
        State ystar = random_state(o, rng);
        State y = res.solve(ystar);
        const double r = resolvent_residual(o, gen, xi, y, ystar, perturbed);
        CAPTURE(perturbed, i, r);
        REQUIRE(r < 1e-10);
      }
    }
  }
}

TEST_CASE("shifted resolvent is a strict contraction", "[resolvent]") {
  OperatorSet o = make_ops(AmbientKind::vortex, 4);
  const double xi = 3.0;  // any positive shift works for a solenoidal ambient field
  MonolithicResolvent res(o, xi, false);
  auto rng = make_rng(7);
  for (int i = 0; i < 6; ++i) {
    State ystar = random_state(o, rng);
    State y = res.solve(ystar);
    REQUIRE(norm_H(o, y) <= norm_H(o, ystar) / xi * (1.0 + 1e-12));
  }
}

TEST_CASE("structured elimination matches the monolithic solve", "[resolvent]") {
  for (AmbientKind kind : {AmbientKind::zero, AmbientKind::columnar}) {
    OperatorSet o = make_ops(kind, 4);
    const double xi = xi_min_heuristic(o.amb, o.par.c_s) + 1.0;
    MonolithicResolvent mono(o, xi, true);  // the elimination works on the shifted generator
    StructuredResolvent sr(o, xi);
    auto rng = make_rng(55);
    for (int i = 0; i < 3; ++i) {
      State ystar = random_state(o, rng);
      State ym = mono.solve(ystar);
      StructuredStats st;
      State ys = sr.solve(ystar, &st);
      const double gap = norm_H(o, ym + ys * (-1.0)) / norm_H(o, ym);
      CAPTURE(kind == AmbientKind::zero ? "zero" : "columnar", i, gap, st.plate_iters, st.plate_relres);
      REQUIRE(gap < 1e-8);
      REQUIRE(st.fluid_solves >= 2);
    }
  }
}

TEST_CASE("resolvent solution depends linearly on the data", "[resolvent]") {
  OperatorSet o = make_ops(AmbientKind::zero, 3);
  MonolithicResolvent res(o, 5.0, false);
  auto rng = make_rng(9);
  State a = random_state(o, rng), b = random_state(o, rng);
  State ya = res.solve(a), yb = res.solve(b);
  State yab = res.solve(a + b);
  const double gap = norm_H(o, yab + (ya + yb) * (-1.0));
  REQUIRE(gap < 1e-10 * (1.0 + norm_H(o, yab)));
}

TEST_CASE("heuristic shift floor covers the admissible range", "[resolvent]") {
  AmbientField amb = make_ambient(AmbientKind::columnar);
  const double lo = xi_min_heuristic(amb, 1.0);
  REQUIRE(lo >= admissibility(amb, 1.0).k_min - 1e-9);
  REQUIRE(xi_min_heuristic(make_ambient(AmbientKind::zero), 1.0) >= 1.0);
}

#include <fpsi/driver.hpp>
#include <fpsi/integrator.hpp>
#include <fpsi/vonkarman.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace fpsi;

namespace {

OperatorSet make_ops(AmbientKind kind, int n = 4) {
  Params par;
  return assemble_operators(build_box_grid(n, n, n), par, make_ambient(kind));
}

}  // namespace

TEST_CASE("backward Euler never increases the norm for solenoidal flows", "[integrator]") {
  for (AmbientKind kind : {AmbientKind::zero, AmbientKind::vortex}) {
    OperatorSet o = make_ops(kind);
    TimeIntegrator ti(o, Scheme::backward_euler, 2e-2);
    auto rng = make_rng(13);
    ti.set_state(random_state(o, rng));
    double prev = norm_H(o, ti.state());
    for (int i = 0; i < 40; ++i) {
      StepRecord r = ti.step();
      REQUIRE(r.h_norm <= prev * (1.0 + 1e-13));
      prev = r.h_norm;
    }
    REQUIRE(prev == norm_H(o, ti.state()));  // record reflects the live state
  }
}

TEST_CASE("trapezoid rule balances energy against interior dissipation", "[integrator]") {
  for (AmbientKind kind : {AmbientKind::zero, AmbientKind::columnar}) {
    OperatorSet o = make_ops(kind);
    TimeIntegrator ti(o, Scheme::trapezoid, 1e-2);
    auto rng = make_rng(21);
    ti.set_state(random_state(o, rng));
    const double E0 = energy(o, ti.state());
    for (int i = 0; i < 30; ++i) {
      StepRecord r = ti.step();
      CAPTURE(i, r.balance_residual);
      REQUIRE(std::abs(r.balance_residual) < 1e-9 * (1.0 + E0 / ti.dt()));
    }
  }
}

TEST_CASE("columnar growth stays below the divergence envelope", "[integrator]") {
  OperatorSet o = make_ops(AmbientKind::columnar);
  const double dt = 1e-2, T = 0.4;
  for (Scheme sch : {Scheme::trapezoid, Scheme::backward_euler}) {
    TimeIntegrator ti(o, sch, dt);
    ti.set_state(seeded_initial_state(o, 34));
    const double n0 = norm_H(o, ti.state());
    auto trace = ti.run(T);
    for (const StepRecord& r : trace) {
      const double envelope = std::exp(r.t * std::numbers::pi / 2.0) * (1.0 + 10.0 * dt) * n0;
      CAPTURE(to_string(sch), r.t, r.h_norm, envelope);
      REQUIRE(r.h_norm <= envelope);
    }
  }
}

TEST_CASE("step count and timestamps line up", "[integrator]") {
  OperatorSet o = make_ops(AmbientKind::zero, 3);
  TimeIntegrator ti(o, Scheme::trapezoid, 0.05);
  ti.set_state(seeded_initial_state(o, 1));
  auto trace = ti.run(0.5);
  REQUIRE(trace.size() == 11);
  REQUIRE(trace.front().t == 0.0);
  REQUIRE(std::abs(trace.back().t - 0.5) < 1e-12);
}

TEST_CASE("plate forcing keeps the combined energy bounded", "[integrator][nonlinear]") {
  Params par;
  OperatorSet o = assemble_operators(build_box_grid(4, 4, 4), par, make_ambient(AmbientKind::zero));
  VonKarman vk(o.pl, make_prestress(o.plate, "bubble", 0.5));
  PlateForce force;
  force.load = [&vk](const Vec& w) { return vk.force_load(w); };
  force.potential = [&vk](const Vec& w) { return vk.potential(w); };
  TimeIntegrator ti(o, Scheme::trapezoid, 1e-2, &force);
  ti.set_state(seeded_initial_state(o, 77));
  const double H0 = energy(o, ti.state()) + vk.potential(ti.state().w);
  auto trace = ti.run(0.5);
  for (const StepRecord& r : trace) {
    REQUIRE(std::isfinite(r.E));
    REQUIRE(r.E + r.Pi <= 50.0 * (H0 + 1.0));
  }
}

TEST_CASE("energy blow-up raises a dedicated error", "[integrator]") {
  OperatorSet o = make_ops(AmbientKind::zero, 3);
  PlateForce force;  // anti-dissipative rig: feed energy proportional to displacement
  force.load = [&o](const Vec& w) { return Vec(1e12 * (o.pl.Mw * w + Vec::Constant(o.nw, 1.0))); };
  force.potential = [](const Vec&) { return 0.0; };
  TimeIntegrator ti(o, Scheme::backward_euler, 0.5, &force);
  ti.set_state(seeded_initial_state(o, 2));
  bool blew = false;
  try {
    for (int i = 0; i < 200; ++i) ti.step();
  } catch (const blowup_error&) {
    blew = true;
  }
  REQUIRE(blew);
}

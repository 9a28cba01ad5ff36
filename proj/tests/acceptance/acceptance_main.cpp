// Acceptance suite for the coupled flow-plate solver. Each check prints one
// PASS/FAIL line with the measured numbers; the exit status is nonzero when
// any check fails. Sizes are chosen so the whole suite runs on a desktop.
#include <fpsi/fpsi.hpp>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

using namespace fpsi;

namespace {

constexpr double kPi = std::numbers::pi;
int failures = 0;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

class Check {
 public:
  Check(int idx, const char* name) : idx_(idx), name_(name), start_(std::chrono::steady_clock::now()) {}
  void finish(bool ok, const std::string& detail) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::printf("[%2d/11] %s %-34s %s (%.1fs)\n", idx_, ok ? "PASS" : "FAIL", name_, detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  void crashed(const std::string& what) { finish(false, "exception: " + what); }

 private:
  int idx_;
  const char* name_;
  std::chrono::steady_clock::time_point start_;
};

OperatorSet ops(AmbientKind kind, int n) {
  Params par;
  return assemble_operators(build_box_grid(n, n, n), par, make_ambient(kind));
}

// 1. The energy pairing of the shifted generator equals minus the interior
//    dissipation on every admissible state; the unshifted generator differs
//    exactly by the compression work term.
void check_dissipativity() {
  Check ck(1, "generator energy pairing");
  double worst = 0.0;
  int count = 0;
  for (AmbientKind kind : {AmbientKind::zero, AmbientKind::vortex, AmbientKind::columnar}) {
    OperatorSet o = ops(kind, 6);
    GeneratorOp gen(o);
    auto rng = make_rng(1000 + static_cast<int>(kind));
    for (int i = 0; i < 67 && count < 200; ++i, ++count) {
      State y = random_state(o, rng);
      const double scale = 1.0 + sq(norm_H(o, y));
      worst = std::max(worst, std::abs(dissipativity_residual(o, gen, y, true)) / scale);
      worst = std::max(worst, std::abs(dissipativity_residual(o, gen, y, false)) / scale);
    }
  }
  ck.finish(worst <= 1e-10 && count == 200, fmt("states=%d worst=%.2e tol=1e-10", count, worst));
}

// 2. Backward Euler is unconditionally contractive when the ambient field is
//    solenoidal: the state norm never grows, step after step.
void check_ie_contraction() {
  Check ck(2, "implicit Euler contraction");
  double worst = -1.0;
  for (AmbientKind kind : {AmbientKind::zero, AmbientKind::vortex}) {
    OperatorSet o = ops(kind, 6);
    TimeIntegrator ti(o, Scheme::backward_euler, 1e-2);
    ti.set_state(seeded_initial_state(o, 20));
    double prev = norm_H(o, ti.state());
    for (int i = 0; i < 500; ++i) {
      StepRecord r = ti.step();
      worst = std::max(worst, r.h_norm / prev - 1.0);
      prev = r.h_norm;
    }
  }
  ck.finish(worst <= 1e-13, fmt("worst step growth=%.2e tol=1e-13", worst));
}

// 3. With the columnar field the norm stays under the divergence growth
//    envelope exp(t pi / 2) with a small time-step allowance.
void check_growth_envelope() {
  Check ck(3, "columnar growth envelope");
  OperatorSet o = ops(AmbientKind::columnar, 6);
  double worst = 0.0;
  bool ok = true;
  for (Scheme sch : {Scheme::trapezoid, Scheme::backward_euler}) {
    for (double dt : {1e-2, 5e-3}) {
      TimeIntegrator ti(o, sch, dt);
      ti.set_state(seeded_initial_state(o, 30));
      const double n0 = norm_H(o, ti.state());
      auto trace = ti.run(1.0);
      for (const StepRecord& r : trace) {
        const double env = std::exp(r.t * kPi / 2.0) * (1.0 + 10.0 * dt) * n0;
        worst = std::max(worst, r.h_norm / env);
        ok = ok && r.h_norm <= env;
      }
    }
  }
  ck.finish(ok, fmt("max norm/envelope=%.4f", worst));
}

// 4. The trapezoid rule balances (E(t+dt) - E(t))/dt against interior
//    dissipation and compression work to rounding accuracy, for every field.
void check_cn_balance() {
  Check ck(4, "trapezoid energy balance");
  double worst = 0.0;
  for (AmbientKind kind : {AmbientKind::zero, AmbientKind::vortex, AmbientKind::columnar}) {
    OperatorSet o = ops(kind, 6);
    TimeIntegrator ti(o, Scheme::trapezoid, 1e-2);
    ti.set_state(seeded_initial_state(o, 40));
    const double scale = 1.0 + energy(o, ti.state()) / ti.dt();
    for (int i = 0; i < 50; ++i) {
      StepRecord r = ti.step();
      worst = std::max(worst, std::abs(r.balance_residual) / scale);
    }
  }
  ck.finish(worst <= 1e-9, fmt("worst relative residual=%.2e tol=1e-9", worst));
}

// 5. Every transport solve, at the limit and across the whole regularization
//    schedule, satisfies the a-priori estimate k ||q|| <= ||G||; the
//    manufactured columnar solution converges at interior points.
void check_transport() {
  Check ck(5, "transport stability estimate");
  double worst_ratio = 0.0;
  auto G_generic = [](const Vec3& x) { return (1.0 + x[0]) * (2.0 - x[1]) * std::cos(kPi * x[2]); };
  for (AmbientKind kind : {AmbientKind::zero, AmbientKind::vortex, AmbientKind::columnar}) {
    AmbientField amb = make_ambient(kind);
    const double k = std::max(1.0, admissibility(amb).k_min) + 1.0;
    TransportSolver ts(build_box_grid(6, 6, 6), amb, k);
    TransportLoad load = ts.load_from_function(G_generic);
    worst_ratio = std::max(worst_ratio, ts.estimate_ratio(ts.solve_limit(load), load));
    TransportSchedule sc = ts.solve_schedule(load);
    for (double r : sc.ratio) worst_ratio = std::max(worst_ratio, r);
  }
  // interior convergence of the manufactured solution
  const double k = 18.0;
  auto exact = [](const Vec3& x) { return std::cos(kPi * x[2]); };
  auto data = [&](const Vec3& x) {
    const double s = std::sin(kPi * x[2]), c = std::cos(kPi * x[2]);
    return k * c - kPi * s * s + 0.5 * kPi * c * c;
  };
  std::vector<double> errs;
  for (int n : {6, 12}) {
    TransportSolver ts(build_box_grid(n, n, n), make_ambient(AmbientKind::columnar), k);
    TransportLoad load = ts.load_from_function(data);
    errs.push_back(ts.l2_error(ts.solve_limit(load), exact, 0.25));
  }
  const double order = std::log2(errs[0] / errs[1]);
  ck.finish(worst_ratio <= 1.0 + 1e-8 && order >= 1.0,
            fmt("worst ratio-1=%.2e interior order=%.2f", worst_ratio - 1.0, order));
}

// 6. The monolithic and elimination-based resolvent solves agree, both satisfy
//    the equation to solver accuracy, and the contraction bound ||y|| <=
//    ||y*|| / xi holds for every right-hand side.
void check_resolvent() {
  Check ck(6, "resolvent path agreement");
  double worst_gap = 0.0, worst_res = 0.0, worst_con = 0.0;
  int nrhs = 0;
  for (AmbientKind kind : {AmbientKind::zero, AmbientKind::columnar}) {
    OperatorSet o = ops(kind, 6);
    GeneratorOp gen(o);
    const double xi = xi_min_heuristic(o.amb, o.par.c_s) + 1.0;
    MonolithicResolvent mono(o, xi, true);
    StructuredResolvent sr(o, xi);
    auto rng = make_rng(60 + static_cast<int>(kind));
    for (int i = 0; i < 10; ++i, ++nrhs) {
      State ystar = random_state(o, rng);
      State ym = mono.solve(ystar);
      worst_res = std::max(worst_res, resolvent_residual(o, gen, xi, ym, ystar, true));
      worst_con = std::max(worst_con, norm_H(o, ym) * xi / norm_H(o, ystar) - 1.0);
      State ys = sr.solve(ystar);
      worst_gap = std::max(worst_gap, norm_H(o, ym + ys * (-1.0)) / norm_H(o, ym));
    }
  }
  ck.finish(worst_gap <= 1e-8 && worst_res <= 1e-8 && worst_con <= 1e-10 && nrhs == 20,
            fmt("rhs=%d gap=%.2e residual=%.2e contraction excess=%.2e", nrhs, worst_gap, worst_res, worst_con));
}

// 7. Constant-pressure steady states: the constructed state solves the
//    stationary problem to rounding, survives implicit steps as a fixed point,
//    and inverse iteration recovers the same structure from random data.
void check_kernel() {
  Check ck(7, "steady kernel structure");
  double worst_plate = 0.0, worst_step = 0.0, worst_u = 0.0, worst_gp = 0.0;
  for (AmbientKind kind : {AmbientKind::zero, AmbientKind::vortex}) {
    OperatorSet o = ops(kind, 6);
    GeneratorOp gen(o);
    State y0 = solve_linear_stationary(o, 1.0);
    KernelReport rep = verify_kernel_structure(o, gen, y0);
    worst_plate = std::max(worst_plate, rep.plate_residual);
    worst_gp = std::max(worst_gp, rep.gradp_rel);
    const double n0 = norm_H(o, y0);
    TimeIntegrator ti(o, Scheme::backward_euler, 0.1);
    ti.set_state(y0);
    for (int i = 0; i < 10; ++i) {
      State before = ti.state();
      ti.step();
      worst_step = std::max(worst_step, norm_H(o, ti.state() + before * (-1.0)) / n0);
    }
    auto rng = make_rng(70 + static_cast<int>(kind));
    KernelReport ext = verify_kernel_structure(o, gen, extract_kernel(o, rng));
    worst_u = std::max(worst_u, ext.u_rel);
    worst_gp = std::max(worst_gp, ext.gradp_rel);
  }
  ck.finish(worst_plate <= 1e-10 && worst_step <= 1e-8 && worst_u <= 1e-6 && worst_gp <= 1e-6,
            fmt("plate res=%.2e step drift=%.2e u rel=%.2e gradp rel=%.2e", worst_plate, worst_step, worst_u,
                worst_gp));
}

// 8. Clamped bending solves converge at second order or better against the
//    closed-form bending energy 4/1225 of the product bubble.
void check_biharmonic_orders() {
  Check ck(8, "clamped bending convergence");
  auto g = [](double t) { return t * t * (1.0 - t) * (1.0 - t); };
  auto gpp = [](double t) { return 2.0 - 12.0 * t + 12.0 * t * t; };
  auto wfun = [&](double x, double y) { return g(x) * g(y); };
  auto load = [&](double x, double y) { return 24.0 * g(y) + 2.0 * gpp(x) * gpp(y) + 24.0 * g(x); };
  std::vector<double> errs;
  for (int n : {8, 16, 32}) {
    PlateOps P = assemble_plate(build_plate_grid(n, n));
    Vec rhs = plate_load_from_function(P, load);
    Vec w = P.solve_bih_load(rhs);
    errs.push_back(plate_l2_error(P, w, wfun));
  }
  const double o1 = std::log2(errs[0] / errs[1]);
  const double o2 = std::log2(errs[1] / errs[2]);
  ck.finish(o1 >= 2.0 && o2 >= 2.0, fmt("L2 orders %.2f, %.2f (need >= 2)", o1, o2));
}

// 9. The membrane nonlinearity is the exact negative gradient of its
//    potential, is cubically homogeneous without prestress, and its local
//    stiffness is stable under mesh refinement.
void check_vonkarman_structure() {
  Check ck(9, "membrane force structure");
  PlateOps P16 = assemble_plate(build_plate_grid(16, 16));
  VonKarman vk16(P16, make_prestress(P16.grid, "bubble", 1.0));
  auto rng = make_rng(90);
  Vec w = P16.Rw * random_vec(rng, static_cast<int>(P16.Rw.cols()));
  Vec h = P16.Rw * random_vec(rng, static_cast<int>(P16.Rw.cols()));
  const double slope = -h.dot(vk16.force_load(w));
  double best = 1e99;
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7}) {
    const double fd = (vk16.potential(Vec(w + eps * h)) - vk16.potential(Vec(w - eps * h))) / (2.0 * eps);
    best = std::min(best, std::abs(fd - slope) / (1.0 + std::abs(slope)));
  }
  VonKarman vk0(P16, make_prestress(P16.grid, "zero", 0.0));
  Vec f1 = vk0.force_load(Vec(1.9 * w));
  const double homo = (f1 - Vec(1.9 * 1.9 * 1.9 * vk0.force_load(w))).norm() / f1.norm();

  // mesh stability of the nonlinear stiffness on matched smooth fields
  auto g = [](double t) { return t * t * (1.0 - t) * (1.0 - t); };
  auto gp = [](double t) { return 2.0 * t * (1.0 - t) * (1.0 - 2.0 * t); };
  auto A = [&](double t) { return g(t) * (1.0 + t); };
  auto Ap = [&](double t) { return gp(t) * (1.0 + t) + g(t); };
  std::vector<double> lip;
  for (int n : {16, 24}) {
    PlateOps P = assemble_plate(build_plate_grid(n, n));
    VonKarman vk(P, make_prestress(P.grid, "bubble", 1.0));
    Vec ws = plate_interpolate(
        P.grid, [&](double x, double y) { return 3.0 * g(x) * g(y); },
        [&](double x, double y) { return 3.0 * gp(x) * g(y); },
        [&](double x, double y) { return 3.0 * g(x) * gp(y); },
        [&](double x, double y) { return 3.0 * gp(x) * gp(y); });
    Vec hs = plate_interpolate(
        P.grid, [&](double x, double y) { return A(x) * g(y); },
        [&](double x, double y) { return Ap(x) * g(y); },
        [&](double x, double y) { return A(x) * gp(y); },
        [&](double x, double y) { return Ap(x) * gp(y); });
    lip.push_back(std::abs(hs.dot(Vec(vk.force_load(Vec(ws + hs)) - vk.force_load(ws)))));
  }
  const double drift = std::abs(lip[0] - lip[1]) / lip[1];
  ck.finish(best <= 1e-6 && homo <= 1e-12 && drift < 0.2,
            fmt("gradient fd=%.2e homogeneity=%.2e stiffness drift=%.1f%%", best, homo, 100.0 * drift));
}

// 10. Long nonlinear runs (T = 10) stay within a fixed multiple of the initial
//     combined energy, with the prestress offset 0.25 |F0|_K^2 making the
//     potential bounded below.
void check_nonlinear_bound() {
  Check ck(10, "long-run energy bound");
  Params par;
  OperatorSet o = assemble_operators(build_box_grid(6, 6, 6), par, make_ambient(AmbientKind::vortex));
  VonKarman vk(o.pl, make_prestress(o.plate, "bubble", 2.0));
  PlateForce force;
  force.load = [&vk](const Vec& w) { return vk.force_load(w); };
  force.potential = [&vk](const Vec& w) { return vk.potential(w); };
  Vec F0 = make_prestress(o.plate, "bubble", 2.0);
  const double C = 0.25 * F0.dot(o.pl.Kbih * F0);
  double worst = 0.0;
  for (std::uint64_t seed : {101ull, 202ull, 303ull}) {
    TimeIntegrator ti(o, Scheme::trapezoid, 1e-2, &force);
    ti.set_state(seeded_initial_state(o, seed));
    const double H0 = energy(o, ti.state()) + vk.potential(ti.state().w) + C;
    auto trace = ti.run(10.0);
    for (const StepRecord& r : trace) worst = std::max(worst, (r.E + r.Pi + C) / H0);
  }
  ck.finish(worst <= 50.0, fmt("max (E+Pi+C)/(E0+Pi0+C)=%.3f bound=50", worst));
}

// 11. Newton continuation from multiple starts: every converged branch meets
//     the residual target, the unloaded flat panel is the unique solution, and
//     the gap to the linear response vanishes like c^3.
void check_newton() {
  Check ck(11, "stationary Newton continuation");
  OperatorSet o = ops(AmbientKind::zero, 8);
  VonKarman vk(o.pl, make_prestress(o.plate, "zero", 0.0));
  auto rng0 = make_rng(110);
  auto flat = solve_nonlinear_stationary(o, vk, 0.0, rng0);
  bool flat_ok = !flat.empty();
  for (const NewtonMember& m : flat) flat_ok = flat_ok && m.converged && m.residual <= 1e-10 && m.wnorm <= 1e-8;

  double worst_res = 0.0;
  std::vector<double> gaps;
  for (double c : {0.8, 0.4, 0.2}) {
    auto rng = make_rng(111);
    auto mem = solve_nonlinear_stationary(o, vk, c, rng);
    if (mem.empty() || !mem.front().converged) {
      ck.finish(false, fmt("no converged branch at c=%.2f", c));
      return;
    }
    worst_res = std::max(worst_res, mem.front().residual);
    State lin = solve_linear_stationary(o, c);
    Vec d = mem.front().w - lin.w;
    gaps.push_back(std::sqrt(d.dot(o.pl.Kbih * d)));
  }
  const double o1 = std::log2(gaps[0] / gaps[1]);
  const double o2 = std::log2(gaps[1] / gaps[2]);
  ck.finish(flat_ok && worst_res <= 1e-8 && o1 >= 2.5 && o2 >= 2.5,
            fmt("flat=%s residual=%.2e gap orders %.2f, %.2f", flat_ok ? "yes" : "no", worst_res, o1, o2));
}

}  // namespace

int main() {
  std::printf("acceptance suite: coupled flow-plate solver\n");
  using Fn = void (*)();
  const Fn checks[] = {check_dissipativity,  check_ie_contraction, check_growth_envelope, check_cn_balance,
                       check_transport,      check_resolvent,      check_kernel,          check_biharmonic_orders,
                       check_vonkarman_structure, check_nonlinear_bound, check_newton};
  int idx = 1;
  for (Fn fn : checks) {
    try {
      fn();
    } catch (const std::exception& e) {
      Check ck(idx, "unexpected failure");
      ck.crashed(e.what());
    }
    ++idx;
  }
  std::printf("%s: %d of 11 checks passed\n", failures ? "FAILURE" : "SUCCESS", 11 - failures);
  return failures ? 1 : 0;
}

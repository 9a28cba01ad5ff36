// Command line front end for the flow-plate interaction solver.
//
// Exit codes: 0 success, 2 configuration problem, 3 solver failure,
// 4 invariant-suite failure, 5 energy blow-up.

#include <fpsi/fpsi.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numbers>

using nlohmann::json;

namespace {

void apply_thread_cap() {
  if (const char* v = std::getenv("FSI_THREADS")) {
    const int n = std::atoi(v);
    if (n > 0) Eigen::setNbThreads(n);
  }
}

std::string zero_pad(long v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*ld", width, v);
  return buf;
}

int cmd_simulate(const std::string& cfg_path, const std::string& initial) {
  fpsi::RunConfig cfg = fpsi::parse_config_file(cfg_path);
  auto pb = fpsi::make_problem(cfg);
  const std::string hash = fpsi::config_hash(cfg);
  fpsi::State y0 = initial.empty() ? fpsi::seeded_initial_state(pb->ops, cfg.seed)
                                   : fpsi::read_checkpoint(initial, pb->ops).y;

  fpsi::Scheme sch = cfg.scheme == "ie" ? fpsi::Scheme::backward_euler : fpsi::Scheme::trapezoid;
  fpsi::TimeIntegrator ti(pb->ops, sch, cfg.dt, pb->plate_force());
  ti.set_state(y0);

  const long nsteps = std::llround(cfg.T / cfg.dt);
  std::vector<fpsi::StepRecord> trace;
  trace.push_back(ti.record());
  bool blew_up = false;
  std::string blow_msg;
  for (long i = 1; i <= nsteps; ++i) {
    try {
      trace.push_back(ti.step());
    } catch (const fpsi::blowup_error& e) {
      blew_up = true;
      blow_msg = e.what();
      break;
    }
    if (cfg.checkpoint_cadence > 0 && i % cfg.checkpoint_cadence == 0)
      fpsi::write_checkpoint(cfg.out_dir + "/checkpoint_" + zero_pad(i, 6) + ".ckpt", pb->ops, ti.state(), ti.time(),
                             hash);
  }

  json meta{{"config", fpsi::to_json(cfg)},
            {"config_hash", hash},
            {"seed", cfg.seed},
            {"grid", {{"nx", cfg.nx}, {"ny", cfg.ny}, {"nz", cfg.nz}}},
            {"scheme", cfg.scheme},
            {"dt", cfg.dt}};
  fpsi::write_trace_csv(cfg.out_dir + "/energy.csv", trace, meta, pb->vk != nullptr);
  fpsi::write_checkpoint(cfg.out_dir + "/final.ckpt", pb->ops, ti.state(), ti.time(), hash);
  if (cfg.emit_svg) {
    std::vector<double> ts, Es, Hs;
    for (const auto& r : trace) {
      ts.push_back(r.t);
      Es.push_back(r.E);
      Hs.push_back(r.h_norm);
    }
    fpsi::write_svg_plot(cfg.out_dir + "/energy.svg", "energy and state norm", ts,
                         {{"E", Es}, {"state norm", Hs}});
  }
  json report{{"config_hash", hash},
              {"steps", static_cast<long>(trace.size()) - 1},
              {"t_final", trace.back().t},
              {"E_final", trace.back().E},
              {"E_initial", trace.front().E},
              {"blow_up", blew_up}};
  if (blew_up) report["blow_up_message"] = blow_msg;
  fpsi::atomic_write(cfg.out_dir + "/run.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << std::endl;
  return blew_up ? 5 : 0;
}

int cmd_resolvent(const std::string& cfg_path, double xi, int nrhs, bool compare, const std::string& dump) {
  fpsi::RunConfig cfg = fpsi::parse_config_file(cfg_path);
  auto pb = fpsi::make_problem(cfg);
  const fpsi::OperatorSet& o = pb->ops;
  if (xi <= 0.0) xi = fpsi::xi_min_heuristic(o.amb, cfg.c_s) + 1.0;
  fpsi::GeneratorOp gen(o);
  fpsi::MonolithicResolvent mono(o, xi, true);
  std::unique_ptr<fpsi::StructuredResolvent> str;
  if (compare) str = std::make_unique<fpsi::StructuredResolvent>(o, xi);
  if (!dump.empty()) fpsi::dump_matrix(dump, mono.matrix());

  auto rng = fpsi::make_rng(cfg.seed);
  json rows = json::array();
  bool ok = true;
  for (int r = 0; r < nrhs; ++r) {
    fpsi::State ystar = fpsi::random_state(o, rng);
    fpsi::State y = mono.solve(ystar);
    const double nstar = fpsi::norm_H(o, ystar), ny = fpsi::norm_H(o, y);
    json row{{"xi", xi},
             {"mono_residual", fpsi::resolvent_residual(o, gen, xi, y, ystar, true)},
             {"contraction_ratio", xi * ny / nstar}};
    if (compare) {
      fpsi::StructuredStats st;
      fpsi::State ys = str->solve(ystar, &st);
      row["struct_residual"] = fpsi::resolvent_residual(o, gen, xi, ys, ystar, true);
      row["path_gap"] = fpsi::norm_H(o, y - ys) / nstar;
      row["fluid_solves"] = st.fluid_solves;
      row["plate_iters"] = st.plate_iters;
      if (row["path_gap"].get<double>() > 1e-8) ok = false;
    }
    if (row["mono_residual"].get<double>() > 1e-8 || row["contraction_ratio"].get<double>() > 1.0 + 1e-10) ok = false;
    rows.push_back(row);
  }
  json report{{"xi", xi}, {"nrhs", nrhs}, {"ok", ok}, {"solves", rows}};
  std::cout << report.dump(2) << std::endl;
  return ok ? 0 : 3;
}

int cmd_stationary(const std::string& cfg_path, double c) {
  fpsi::RunConfig cfg = fpsi::parse_config_file(cfg_path);
  auto pb = fpsi::make_problem(cfg);
  const fpsi::OperatorSet& o = pb->ops;
  fpsi::GeneratorOp gen(o);
  json report;

  fpsi::State lin = fpsi::solve_linear_stationary(o, c);
  fpsi::KernelReport kr = fpsi::verify_kernel_structure(o, gen, lin);
  report["constructed"] = {{"c", kr.c},
                           {"u_rel", kr.u_rel},
                           {"gradp_rel", kr.gradp_rel},
                           {"p_stddev_rel", kr.p_stddev_rel},
                           {"gen_residual", kr.gen_residual},
                           {"diss_residual", kr.diss_residual},
                           {"plate_residual", kr.plate_residual}};

  auto rng = fpsi::make_rng(cfg.seed);
  fpsi::State ker = fpsi::extract_kernel(o, rng);
  fpsi::KernelReport ke = fpsi::verify_kernel_structure(o, gen, ker);
  report["extracted"] = {{"c", ke.c},
                         {"u_rel", ke.u_rel},
                         {"gradp_rel", ke.gradp_rel},
                         {"p_stddev_rel", ke.p_stddev_rel},
                         {"gen_residual", ke.gen_residual},
                         {"diss_residual", ke.diss_residual},
                         {"plate_residual", ke.plate_residual}};

  if (pb->vk) {
    fpsi::NewtonOptions opt;
    auto members = fpsi::solve_nonlinear_stationary(o, *pb->vk, c, rng, opt);
    json ms = json::array();
    for (const auto& m : members)
      ms.push_back({{"residual", m.residual}, {"wnorm", m.wnorm}, {"iters", m.iters}});
    report["newton_members"] = ms;
  }
  std::cout << report.dump(2) << std::endl;
  return 0;
}

int cmd_transport_check(const std::string& cfg_path, double k) {
  fpsi::RunConfig cfg = fpsi::parse_config_file(cfg_path);
  fpsi::validate(cfg);
  fpsi::BoxGeometry g = fpsi::build_box_grid(cfg.nx, cfg.ny, cfg.nz);
  fpsi::AmbientField amb = fpsi::ambient_from_config(cfg, g);
  fpsi::TransportAdmissibility ad = fpsi::admissibility(amb, cfg.c_s);
  if (k <= 0.0) k = std::ceil(ad.k_min) + 1.0;
  fpsi::TransportSolver ts(g, amb, k, cfg.ambient_quad);

  auto G = [](const fpsi::Vec3& x) {
    return (1.0 + x[0]) * (2.0 - x[1]) * std::cos(std::numbers::pi * x[2]);
  };
  fpsi::TransportLoad load = ts.load_from_function(G);
  fpsi::Vec ql = ts.solve_limit(load);
  fpsi::TransportSchedule sc = ts.solve_schedule(load);

  bool ok = ts.estimate_ratio(ql, load) <= 1.0 + 1e-8;
  for (double r : sc.ratio)
    if (r > 1.0 + 1e-8) ok = false;

  json meta{{"k", k},
            {"k_min", ad.k_min},
            {"grad_term", ad.grad_term},
            {"lap_term", ad.lap_term},
            {"limit_ratio", ts.estimate_ratio(ql, load)},
            {"cauchy_monotone", sc.monotone},
            {"limit_vs_last_eps_gap", (ql - sc.q.back()).norm() / std::max(1e-300, ql.norm())},
            {"ok", ok}};
  std::cout << "# " << meta.dump() << "\n";
  std::cout << "epsilon,l2_norm_q,estimate_ratio,diff_prev\n";
  char buf[160];
  for (std::size_t j = 0; j < sc.eps.size(); ++j) {
    const double qn = sc.ratio[j] * load.gnorm / k;  // k ||q||_M / ||G|| inverted
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", sc.eps[j], qn, sc.ratio[j],
                  j == 0 ? 0.0 : sc.diff[j - 1]);
    std::cout << buf;
  }
  return ok ? 0 : 3;
}

int cmd_validate(const std::string& cfg_path) {
  fpsi::RunConfig cfg = fpsi::parse_config_file(cfg_path);
  auto pb = fpsi::make_problem(cfg);
  const fpsi::OperatorSet& o = pb->ops;
  fpsi::GeneratorOp gen(o);
  auto rng = fpsi::make_rng(cfg.seed);
  json checks = json::array();
  bool ok = true;
  auto push = [&](const std::string& name, double value, double bound) {
    const bool pass = value <= bound;
    checks.push_back({{"name", name}, {"value", value}, {"bound", bound}, {"pass", pass}});
    if (!pass) ok = false;
  };

  // advection skewness is structural: C + C^T must vanish identically
  {
    fpsi::SpMat S = fpsi::SpMat(o.Cp.transpose()) + o.Cp;
    double mx = 0.0;
    for (int kk = 0; kk < S.outerSize(); ++kk)
      for (fpsi::SpMat::InnerIterator it(S, kk); it; ++it) mx = std::max(mx, std::abs(it.value()));
    push("advection_skew_defect", mx, 1e-14);
  }
  checks.push_back({{"name", "skew_vs_divergence_diagnostic"}, {"value", o.skew_residual_p}, {"pass", true}});
  checks.push_back(
      {{"name", "ambient_tangency_defect"}, {"value", fpsi::tangency_defect(o.geom, o.amb)}, {"pass", true}});

  // compatibility of the constant pressure with the free velocity space
  {
    fpsi::Vec r = o.R.transpose() * (o.D.transpose() * fpsi::Vec::Ones(o.np));
    push("free_space_pressure_compat", r.cwiseAbs().maxCoeff(), 1e-12);
  }

  // dissipation identity on random states
  double worst = 0.0;
  for (int i = 0; i < 16; ++i) {
    fpsi::State y = fpsi::random_state(o, rng);
    const double n2 = 1.0 + fpsi::sq(fpsi::norm_H(o, y));
    worst = std::max(worst, std::abs(fpsi::dissipativity_residual(o, gen, y, true)) / n2);
  }
  push("dissipativity_residual", worst, 1e-10);

  // constrained states stay constrained through a generator application
  {
    fpsi::State y = fpsi::random_state(o, rng);
    fpsi::State dy = gen.apply(y, true);
    push("generator_constraint_defect", fpsi::constraint_defect(o, dy), 1e-10);
  }

  // one backward Euler step of the shifted dynamics never grows the norm
  {
    const double xi = std::max(10.0, fpsi::xi_min_heuristic(o.amb, cfg.c_s));
    fpsi::MonolithicResolvent res(o, xi, true);
    fpsi::State ystar = fpsi::random_state(o, rng);
    fpsi::State y = res.solve(ystar);
    push("resolvent_contraction_excess", xi * fpsi::norm_H(o, y) / fpsi::norm_H(o, ystar) - 1.0, 1e-10);
  }

  // trapezoid energy balance on one step
  {
    fpsi::TimeIntegrator ti(o, fpsi::Scheme::trapezoid, 1e-2, pb->plate_force());
    ti.set_state(fpsi::random_state(o, rng));
    const double E0 = ti.record().E;
    fpsi::StepRecord r = ti.step();
    const double tol = pb->vk ? 1e-4 : 1e-9;
    push("trapezoid_balance_residual", std::abs(r.balance_residual) / std::max(E0, 1e-300), tol);
  }

  json report{{"ok", ok}, {"checks", checks}};
  std::cout << report.dump(2) << std::endl;
  return ok ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();
  CLI::App app{"coupled compressible flow / elastic plate simulator"};
  app.require_subcommand(1);

  std::string cfg_path, initial, dump;
  double xi = 0.0, c_level = 1.0, kval = 0.0;
  int nrhs = 1;
  bool compare = false;

  auto* sim = app.add_subcommand("simulate", "advance the coupled system in time");
  sim->add_option("--config", cfg_path, "configuration file")->required();
  sim->add_option("--initial", initial, "checkpoint file with the initial state");

  auto* res = app.add_subcommand("resolvent", "solve (xi - A) y = y* and report residuals");
  res->add_option("--config", cfg_path, "configuration file")->required();
  res->add_option("--xi", xi, "spectral parameter (default: admissibility threshold + 1)");
  res->add_option("--nrhs", nrhs, "number of random right-hand sides");
  res->add_flag("--compare", compare, "also run the structured path and compare");
  res->add_option("--dump-matrix", dump, "write the monolithic matrix as i j value triplets");

  auto* sta = app.add_subcommand("stationary", "stationary states and kernel diagnostics");
  sta->add_option("--config", cfg_path, "configuration file")->required();
  sta->add_option("--c", c_level, "pressure level of the constructed stationary state");

  auto* tra = app.add_subcommand("transport-check", "admissibility and stability of the transport solves");
  tra->add_option("--config", cfg_path, "configuration file")->required();
  tra->add_option("--k", kval, "zeroth-order coefficient (default: past the admissibility threshold)");

  auto* val = app.add_subcommand("validate", "run the structural invariant suite");
  val->add_option("--config", cfg_path, "configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(cfg_path, initial);
    if (res->parsed()) return cmd_resolvent(cfg_path, xi, nrhs, compare, dump);
    if (sta->parsed()) return cmd_stationary(cfg_path, c_level);
    if (tra->parsed()) return cmd_transport_check(cfg_path, kval);
    if (val->parsed()) return cmd_validate(cfg_path);
  } catch (const fpsi::config_error& e) {
    std::cerr << "configuration error: " << e.what() << std::endl;
    return 2;
  } catch (const fpsi::blowup_error& e) {
    std::cerr << "blow-up: " << e.what() << std::endl;
    return 5;
  } catch (const fpsi::solver_error& e) {
    std::cerr << "solver error: " << e.what() << std::endl;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  }
  return 2;
}

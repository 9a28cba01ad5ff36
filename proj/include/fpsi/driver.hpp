#pragma once
// Glue between a validated configuration and a ready-to-run problem. The
// bundle is pinned in memory (no copy, no move) because the solver objects
// hold references into the operator set.

#include "fpsi/ambient.hpp"
#include "fpsi/config.hpp"
#include "fpsi/hspace.hpp"
#include "fpsi/integrator.hpp"
#include "fpsi/io.hpp"
#include "fpsi/operators.hpp"
#include "fpsi/vonkarman.hpp"

#include <memory>
#include <optional>

namespace fpsi {

inline AmbientField ambient_from_config(const RunConfig& cfg, const BoxGeometry& g) {
  if (cfg.ambient_kind == "zero") return make_ambient(AmbientKind::zero);
  if (cfg.ambient_kind == "vortex") return make_ambient(AmbientKind::vortex);
  if (cfg.ambient_kind == "columnar") return make_ambient(AmbientKind::columnar);
  AmbientSamples s = read_ambient_file(cfg.ambient_file, g);
  return make_ambient_from_nodal(g, s.u, s.div);
}

struct Problem {
  RunConfig cfg;
  OperatorSet ops;
  std::unique_ptr<VonKarman> vk;  // set when the plate is nonlinear
  PlateForce force;               // closures over *vk

  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;
  Problem(Problem&&) = delete;
  Problem& operator=(Problem&&) = delete;
  Problem() = default;

  const PlateForce* plate_force() const { return vk ? &force : nullptr; }
};

inline std::unique_ptr<Problem> make_problem(const RunConfig& cfg) {
  validate(cfg);
  auto pb = std::make_unique<Problem>();
  pb->cfg = cfg;
  BoxGeometry g = build_box_grid(cfg.nx, cfg.ny, cfg.nz);
  Params par;
  par.nu = cfg.nu;
  par.lambda = cfg.lambda;
  par.eta = cfg.eta;
  par.ambient_quad = cfg.ambient_quad;
  par.c_s = cfg.c_s;
  AmbientField amb = ambient_from_config(cfg, g);
  pb->ops = assemble_operators(g, par, amb);
  if (cfg.nonlinearity == "vonkarman") {
    Vec F0 = make_prestress(pb->ops.plate, cfg.f0_id, cfg.f0_scale);
    pb->vk = std::make_unique<VonKarman>(pb->ops.pl, std::move(F0));
    VonKarman* v = pb->vk.get();
    pb->force.load = [v](const Vec& w) { return v->force_load(w); };
    pb->force.potential = [v](const Vec& w) { return v->potential(w); };
  }
  return pb;
}

/// Deterministic initial data for a run: a seeded random finite-energy state
/// normalized to unit state norm.
inline State seeded_initial_state(const OperatorSet& ops, std::uint64_t seed) {
  auto rng = make_rng(seed);
  State y = random_state(ops, rng);
  const double n = norm_H(ops, y);
  if (n > 0.0) y = y * (1.0 / n);
  return y;
}

}  // namespace fpsi

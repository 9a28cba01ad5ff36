#pragma once
// Von Karman plate nonlinearity. The bracket [a,b] = a_xx b_yy + a_yy b_xx
// - 2 a_xy b_xy is evaluated at the plate quadrature points; with the C1
// Hermite elements and a rule exact for the triple products involved, the
// trilinear form (a, [b, c]) is fully symmetric at the discrete level. That
// symmetry makes the discrete force the exact negative gradient of
//   Pi(w) = 1/4 v(w)^T K v(w) - 1/2 (w, [w, F0]),   K v(w) = -load([w, w]),
// which the gradient and homogeneity checks verify to round-off.

#include "fpsi/plate.hpp"
#include "fpsi/util.hpp"

#include <string>

namespace fpsi {

struct QpDerivs {
  Eigen::ArrayXXd xx, yy, xy;
};

class VonKarman {
 public:
  VonKarman(const PlateOps& P, Vec F0) : P_(P), F0_(std::move(F0)) {
    if (F0_.size() == 0) F0_ = Vec::Zero(P.ndof());
    if (F0_.size() != P.ndof()) throw config_error("vonkarman: prestress DOF size mismatch");
    dF0_ = derivs(F0_);
  }

  const PlateOps& plate() const { return P_; }
  const Vec& prestress() const { return F0_; }

  QpDerivs derivs(const Vec& dofs) const {
    QpDerivs d;
    plate_eval(P_, dofs, nullptr, &d.xx, &d.yy, &d.xy);
    return d;
  }

  static Eigen::ArrayXXd bracket(const QpDerivs& a, const QpDerivs& b) {
    return a.xx * b.yy + a.yy * b.xx - 2.0 * a.xy * b.xy;
  }

  /// Load vector of [a, b] against the displacement basis.
  Vec bracket_load(const QpDerivs& a, const QpDerivs& b) const { return plate_load_from_qp(P_, bracket(a, b)); }

  /// Airy stress of a displacement: K v = -load([w, w]), clamped.
  Vec airy(const Vec& w) const {
    QpDerivs dw = derivs(w);
    return P_.solve_bih_load(Vec(-bracket_load(dw, dw)));
  }

  /// Polarized Airy solve: v(w, h) with v(w + t h) = v(w) + 2 t v(w,h) + t^2 v(h).
  Vec airy_pair(const Vec& w, const Vec& h) const {
    return P_.solve_bih_load(Vec(-bracket_load(derivs(w), derivs(h))));
  }

  /// Nonlinear force load f(w) = [w, v(w) + F0] paired with the basis.
  Vec force_load(const Vec& w) const {
    QpDerivs dw = derivs(w);
    Vec v = P_.solve_bih_load(Vec(-bracket_load(dw, dw)));
    return bracket_load(dw, derivs(Vec(v + F0_)));
  }

  double potential(const Vec& w) const {
    QpDerivs dw = derivs(w);
    Vec v = P_.solve_bih_load(Vec(-bracket_load(dw, dw)));
    double p = 0.25 * v.dot(P_.Kbih * v);
    p -= 0.5 * w.dot(bracket_load(dw, dF0_));
    return p;
  }

  /// Directional derivative of the force load at w, given the cached Airy
  /// stress v = airy(w): f'(w) h = [h, v + F0] + [w, 2 v(w,h)].
  Vec jacobian_apply(const Vec& w, const Vec& v, const Vec& h) const {
    QpDerivs dw = derivs(w), dh = derivs(h);
    Vec vwh = P_.solve_bih_load(Vec(-bracket_load(dw, dh)));
    return bracket_load(dh, derivs(Vec(v + F0_))) + 2.0 * bracket_load(dw, derivs(vwh));
  }

 private:
  const PlateOps& P_;
  Vec F0_;
  QpDerivs dF0_;
};

/// Built-in prestress profiles interpolated into the Hermite space.
inline Vec make_prestress(const PlateGrid& grid, const std::string& id, double scale) {
  if (id == "zero" || scale == 0.0) return Vec::Zero(4 * grid.npts());
  if (id == "bubble") {
    auto g = [](double t) { return t * t * (1.0 - t) * (1.0 - t); };
    auto gp = [](double t) { return 2.0 * t * (1.0 - t) * (1.0 - 2.0 * t); };
    Vec F = plate_interpolate(
        grid, [&](double x, double y) { return g(x) * g(y); }, [&](double x, double y) { return gp(x) * g(y); },
        [&](double x, double y) { return g(x) * gp(y); }, [&](double x, double y) { return gp(x) * gp(y); });
    return scale * F;
  }
  throw config_error("vonkarman: unknown prestress id '" + id + "'");
}

}  // namespace fpsi

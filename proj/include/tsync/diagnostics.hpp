#pragma once

// Analysis quantities evaluated on logged signals: barrier Lyapunov value,
// the three Lyapunov-Krasovskii delay functionals, the skew-symmetry
// residual of the plant and the safe-set radius formula. None of this feeds
// back into the control loop.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "tsync/controller.hpp"
#include "tsync/robot_model.hpp"

namespace tsync {

using Vec3d = Eigen::Vector3d;

struct DiagnosticsConfig {
  Vec3d K_LK{1.0, 1.0, 1.0};
  Vec3d omega{0.5, 0.5, 0.5};  // each must exceed the delay
  double lambda_threshold = 1e-4;
  // Inputs to the safe-set radius formula, which needs proof constants.
  double safe_epsilon1 = 0.05;
  double safe_beta1 = 1.0;

  void validate(double delay) const;
};

struct BlfValue {
  double value;
  bool violated;
};

/// V1 = 1/2 sum log(k_m,i^2 / (k_m,i^2 - e_i^2)); +inf with the violation
/// flag set at or beyond the bound.
template <typename Scalar>
BlfValue blf_value(const Vec2<Scalar>& e_p, const BarrierBounds& bb) {
  double v = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double k2 = bb.k_m(i) * bb.k_m(i);
    const double e2 = double(e_p(i)) * double(e_p(i));
    if (!(e2 < k2)) return {std::numeric_limits<double>::infinity(), true};
    // log1p form keeps accuracy for small errors
    v += -0.5 * std::log1p(-e2 / k2);
  }
  return {v, false};
}

/// x^T (Mdot - 2C) x; zero up to rounding for a Christoffel-consistent C.
template <typename Scalar>
Scalar skew_residual(const JointState<Scalar>& js, const DynamicParams<Scalar>& zy, const Vec2<Scalar>& x) {
  const auto d = dynamics_eval(js, zy);
  return x.dot((mass_matrix_rate(js, zy) - Scalar(2) * d.C) * x);
}

/// Integrands of the three delay functionals at one instant.
struct LkSample {
  double t;
  double p_h_ddot_sq;     // |d/dt p_h_dot|^2
  double phi_e_rate_sq;   // |d/dt (phi(e_p) e_p)|^2
  double p_h_dot_sq;      // |p_h_dot|^2
};

struct LkValues {
  double P1 = 0, P2 = 0, P3 = 0;
};

/// P_i = (K_i w_i / 2) int_{t-T}^{t} int_{s}^{t} f_i(l) dl ds, nested
/// trapezoid on the sample grid. t is the last sample's time; the lower
/// limit is clamped to the first available sample.
LkValues lk_functionals(std::span<const LkSample> history, double delay, const DiagnosticsConfig& dc);

struct SafeRadius {
  Vec2d radius;  // NaN where the formula leaves the real domain
  double exponent;
  bool domain_ok;
};

/// k_m,i sqrt(1 - exp(-rho)).
SafeRadius safe_radius_from_exponent(double rho, const BarrierBounds& bb);

/// rho = -2 (V0 e^{-beta t} + (eps/beta)(1 - e^{-beta t})) fed to the
/// radius formula as written; for positive arguments rho < 0 and the
/// result is flagged out of domain.
SafeRadius safe_radius(double V0, double epsilon1, double beta1, double t, const BarrierBounds& bb);

struct DiagnosticsRecord {
  double V1 = 0;
  double P1 = 0, P2 = 0, P3 = 0;
  double skew_residual = 0;
  Vec2d safe_radius = Vec2d::Zero();
};

}  // namespace tsync

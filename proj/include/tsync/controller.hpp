#pragma once

// Barrier-weighted synchronization errors, the delayed auxiliary error, the
// control torque and the gradient update for the dynamic parameters.
// Barrier weight matrices are diagonal and carried as their diagonal.

#include <cmath>
#include <string>

#include "tsync/robot_model.hpp"

namespace tsync {

struct BarrierBounds {
  Vec2d k_m{0.4, 1.4};   // error bounds
  Vec2d k_h{0.75, 0.45};  // human position bounds

  Vec2d k_r() const { return k_m + k_h; }

  void validate() const {
    for (int i = 0; i < 2; ++i) {
      if (!(k_m(i) > 0)) throw ConfigError("bounds.k_m: entry " + std::to_string(i + 1) + " must be positive");
      if (!(k_h(i) > 0)) throw ConfigError("bounds.k_h: entry " + std::to_string(i + 1) + " must be positive");
    }
  }
};

struct Gains {
  double k_r = 0.1;
  double k_phi = 1.0;
  double k_1 = 0.8;
  double k_icl = 100.0;
  Mat2d Gamma1 = Mat2d::Identity();
  Mat7d Gamma2 = 0.5 * Mat7d::Identity();
  double alpha_s4 = 0.002;
  int N = 25;
  double delta_t = 0.2;
  double T = 0.45;

  void validate() const;
};

struct ControlOutput {
  Vec2d tau = Vec2d::Zero();
  Vec2d e_pT = Vec2d::Zero();
  Vec2d eta_T = Vec2d::Zero();
  Vec2d phi_T = Vec2d::Zero();
  Vec7d zeta_y_dot = Vec7d::Zero();
  Mat27d W_yT = Mat27d::Zero();
  Mat2d jp_hat = Mat2d::Zero();
  bool jp_damped = false;
};

template <typename Scalar>
Vec2<Scalar> sync_error_delayed(const Vec2<Scalar>& p, const Vec2<Scalar>& p_hT) {
  return p_hT - p;
}

/// phi_i = 1 / (k_m,i^2 - e_i^2). Throws BarrierViolation once |e_i| >= k_m,i.
template <typename Scalar>
Vec2<Scalar> barrier_weights(const Vec2<Scalar>& e, const BarrierBounds& bb) {
  Vec2<Scalar> phi;
  for (int i = 0; i < 2; ++i) {
    const Scalar gap = Scalar(bb.k_m(i) * bb.k_m(i)) - e(i) * e(i);
    if (!(gap > Scalar(0)))
      throw BarrierViolation("barrier violated on axis " + std::to_string(i + 1) + ": |e| = " +
                                 std::to_string(std::abs(double(e(i)))) + " >= k_m = " + std::to_string(bb.k_m(i)),
                             i);
    phi(i) = Scalar(1) / gap;
  }
  return phi;
}

template <typename Scalar>
JacobianInverse<Scalar> jp_hat_inverse(const Vec2<Scalar>& theta, const KinematicParams<Scalar>& zj_hat,
                                       const InversePolicy& policy = {}) {
  return regularized_inverse(jacobian(theta, zj_hat), policy);
}

/// eta_T = J^-1 (p_hT_dot + k1 phi_T e_pT) - theta_dot. The same expression
/// with undelayed human signals gives the current-time eta (eta_current).
template <typename Scalar>
Vec2<Scalar> eta_delayed(const Vec2<Scalar>& theta_dot, const Mat2<Scalar>& jp_inv_hat, const Vec2<Scalar>& p_hT_dot,
                         const Vec2<Scalar>& phi_T, const Vec2<Scalar>& e_pT, Scalar k_1) {
  return jp_inv_hat * (p_hT_dot + k_1 * phi_T.cwiseProduct(e_pT)) - theta_dot;
}

template <typename Scalar>
Vec2<Scalar> eta_current(const Vec2<Scalar>& theta_dot, const Mat2<Scalar>& jp_inv_hat, const Vec2<Scalar>& p_h_dot,
                         const Vec2<Scalar>& phi, const Vec2<Scalar>& e_p, Scalar k_1) {
  return eta_delayed(theta_dot, jp_inv_hat, p_h_dot, phi, e_p, k_1);
}

/// tau = W_yT zeta_y_hat + k_r eta_T + k_phi J^T phi_T e_pT.
template <typename Scalar>
Vec2<Scalar> control_torque(const Mat27<Scalar>& W_yT, const Vec7<Scalar>& zeta_y_hat, const Vec2<Scalar>& eta_T,
                            const Mat2<Scalar>& jp_hat, const Vec2<Scalar>& phi_T, const Vec2<Scalar>& e_pT,
                            const Gains& g) {
  return W_yT * zeta_y_hat + Scalar(g.k_r) * eta_T + Scalar(g.k_phi) * jp_hat.transpose() * phi_T.cwiseProduct(e_pT);
}

/// Gradient law with sigma-modification leakage.
template <typename Scalar>
Vec7<Scalar> zeta_y_derivative(const Mat27<Scalar>& W_yT, const Vec2<Scalar>& eta_T, const Vec7<Scalar>& zeta_y_hat,
                               const Gains& g) {
  const Mat7<Scalar> G2 = g.Gamma2.template cast<Scalar>();
  return G2 * W_yT.transpose() * eta_T - Scalar(g.alpha_s4) * G2 * zeta_y_hat;
}

struct ControllerOptions {
  InversePolicy inverse;
  bool jdot_estimate_rate = true;
  double gravity = kStandardGravity;  // enters the gravity columns of W_yT
};

/// Everything the torque needs, evaluated at one control instant.
///   p          measured end-effector position
///   delayed    human sample at t - T
///   zj_hat_dot current kinematic-estimate rate (enters dJ/dt)
ControlOutput compute_control(const JointState<double>& js, const Vec2d& p, const TaskPoint& delayed,
                              const Vec2d& zj_hat, const Vec2d& zj_hat_dot, const Vec7d& zy_hat,
                              const BarrierBounds& bb, const Gains& g, const ControllerOptions& opt = {});

}  // namespace tsync

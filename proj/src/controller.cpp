#include "tsync/controller.hpp"

#include <Eigen/Eigenvalues>

namespace tsync {

namespace {

template <int N>
bool symmetric_pd(const Eigen::Matrix<double, N, N>& A) {
  if (!A.allFinite() || (A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + A.cwiseAbs().maxCoeff()))
    return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0.0;
}

}  // namespace

void Gains::validate() const {
  if (!(k_r >= 0)) throw ConfigError("gains.k_r must be non-negative");
  if (!(k_phi >= 0)) throw ConfigError("gains.k_phi must be non-negative");
  if (!(k_1 >= 0)) throw ConfigError("gains.k_1 must be non-negative");
  if (!(k_icl >= 0)) throw ConfigError("gains.k_icl must be non-negative");
  if (!(alpha_s4 >= 0)) throw ConfigError("gains.alpha_s4 must be non-negative");
  if (!symmetric_pd(Gamma1)) throw ConfigError("gains.gamma1 must be symmetric positive definite");
  if (!symmetric_pd(Gamma2)) throw ConfigError("gains.gamma2 must be symmetric positive definite");
  if (N < 1) throw ConfigError("gains.N must be at least 1");
  if (!(delta_t > 0)) throw ConfigError("gains.delta_t must be positive");
  if (!(T >= 0)) throw ConfigError("gains.T must be non-negative");
}

ControlOutput compute_control(const JointState<double>& js, const Vec2d& p, const TaskPoint& delayed,
                              const Vec2d& zj_hat, const Vec2d& zj_hat_dot, const Vec7d& zy_hat,
                              const BarrierBounds& bb, const Gains& g, const ControllerOptions& opt) {
  ControlOutput out;
  out.e_pT = sync_error_delayed(p, delayed.p);
  out.phi_T = barrier_weights(out.e_pT, bb);

  out.jp_hat = jacobian(js.theta, zj_hat);
  const auto ji = regularized_inverse(out.jp_hat, opt.inverse);
  out.jp_damped = ji.damped;
  out.eta_T = eta_delayed(js.theta_dot, ji.inv, delayed.p_dot, out.phi_T, out.e_pT, g.k_1);

  // End-effector velocity is not available to the controller; use J_hat theta_dot.
  const Vec2d e_pT_dot = delayed.p_dot - out.jp_hat * js.theta_dot;
  const Vec2d a_T = reference_acceleration_delayed(js, zj_hat, zj_hat_dot, delayed, out.e_pT, e_pT_dot, out.phi_T,
                                                   g.k_1, ReferenceAccelOptions{opt.inverse, opt.jdot_estimate_rate});

  out.W_yT = dynamic_regressor_delayed(js, a_T, out.eta_T, opt.gravity);
  out.tau = control_torque(out.W_yT, zy_hat, out.eta_T, out.jp_hat, out.phi_T, out.e_pT, g);
  out.zeta_y_dot = zeta_y_derivative(out.W_yT, out.eta_T, zy_hat, g);
  return out;
}

}  // namespace tsync

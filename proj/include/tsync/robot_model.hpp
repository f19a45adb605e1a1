#pragma once

// Planar 2R manipulator: point masses at the link tips, viscous joint
// friction, gravity along -y. All routines are pure and templated on the
// scalar type.
//
// Dynamic parameter basis (linear-in-parameters), gravity constant g kept in
// the regressor:
//   [0] (m1+m2) l1^2   [1] m2 l2^2   [2] m2 l1 l2
//   [3] (m1+m2) l1     [4] m2 l2     [5] fv1        [6] fv2

#include <algorithm>
#include <cmath>

#include "tsync/human_trajectory.hpp"
#include "tsync/types.hpp"

namespace tsync {

inline constexpr double kStandardGravity = 9.81;

struct RobotParams {
  double m1 = 0.558;
  double m2 = 0.291;
  double l1 = 0.85;
  double l2 = 1.3;
  double g = kStandardGravity;
  double fv1 = 0.1;
  double fv2 = 0.1;

  void validate() const {
    if (!(m1 > 0) || !(m2 > 0)) throw ConfigError("robot: masses must be positive");
    if (!(l1 > 0) || !(l2 > 0)) throw ConfigError("robot: link lengths must be positive");
    if (!(g > 0)) throw ConfigError("robot.g must be positive");
    if (!(fv1 >= 0) || !(fv2 >= 0)) throw ConfigError("robot: friction must be non-negative");
  }
};

template <typename Scalar = double>
struct JointState {
  Vec2<Scalar> theta = Vec2<Scalar>::Zero();
  Vec2<Scalar> theta_dot = Vec2<Scalar>::Zero();
  Scalar t = Scalar(0);

  bool finite() const { return theta.allFinite() && theta_dot.allFinite() && std::isfinite(t); }
};

// Kinematic parameters are the link lengths [l1, l2].
template <typename Scalar = double> using KinematicParams = Vec2<Scalar>;
template <typename Scalar = double> using DynamicParams = Vec7<Scalar>;

template <typename Scalar = double>
struct DynamicsEval {
  Mat2<Scalar> M;
  Mat2<Scalar> C;
  Vec2<Scalar> G;
  Vec2<Scalar> f;
};

enum class Elbow { positive, negative };

inline KinematicParams<double> true_kinematic_params(const RobotParams& rp) { return {rp.l1, rp.l2}; }

inline DynamicParams<double> true_dynamic_params(const RobotParams& rp) {
  const double m12 = rp.m1 + rp.m2;
  DynamicParams<double> z;
  z << m12 * rp.l1 * rp.l1, rp.m2 * rp.l2 * rp.l2, rp.m2 * rp.l1 * rp.l2, m12 * rp.l1, rp.m2 * rp.l2, rp.fv1,
      rp.fv2;
  return z;
}

template <typename Scalar>
DynamicsEval<Scalar> dynamics_eval(const JointState<Scalar>& js, const DynamicParams<Scalar>& zy,
                                   Scalar gravity = Scalar(kStandardGravity)) {
  using std::cos;
  using std::sin;
  const Scalar c1 = cos(js.theta(0));
  const Scalar c2 = cos(js.theta(1));
  const Scalar s2 = sin(js.theta(1));
  const Scalar c12 = cos(js.theta(0) + js.theta(1));
  const Scalar a1 = zy(0), a2 = zy(1), a3 = zy(2);
  const Scalar w1 = js.theta_dot(0), w2 = js.theta_dot(1);

  DynamicsEval<Scalar> d;
  d.M << a1 + a2 + Scalar(2) * a3 * c2, a2 + a3 * c2, a2 + a3 * c2, a2;
  // Christoffel construction, so Mdot - 2C is skew.
  d.C << -a3 * s2 * w2, -a3 * s2 * (w1 + w2), a3 * s2 * w1, Scalar(0);
  d.G << gravity * (zy(3) * c1 + zy(4) * c12), gravity * zy(4) * c12;
  d.f << zy(5) * w1, zy(6) * w2;
  return d;
}

/// Analytic time derivative of M(theta) along theta_dot.
template <typename Scalar>
Mat2<Scalar> mass_matrix_rate(const JointState<Scalar>& js, const DynamicParams<Scalar>& zy) {
  const Scalar k = -zy(2) * std::sin(js.theta(1)) * js.theta_dot(1);
  Mat2<Scalar> Md;
  Md << Scalar(2) * k, k, k, Scalar(0);
  return Md;
}

template <typename Scalar>
Vec2<Scalar> forward_dynamics(const JointState<Scalar>& js, const Vec2<Scalar>& tau,
                              const DynamicParams<Scalar>& zy, Scalar gravity = Scalar(kStandardGravity)) {
  if (!js.finite() || !tau.allFinite() || !zy.allFinite())
    throw NumericError("forward_dynamics: non-finite input");
  const auto d = dynamics_eval(js, zy, gravity);
  return d.M.ldlt().solve(tau - d.C * js.theta_dot - d.f - d.G);
}

template <typename Scalar>
Vec2<Scalar> forward_kinematics(const Vec2<Scalar>& theta, const KinematicParams<Scalar>& zj) {
  using std::cos;
  using std::sin;
  const Scalar q12 = theta(0) + theta(1);
  return {zj(0) * cos(theta(0)) + zj(1) * cos(q12), zj(0) * sin(theta(0)) + zj(1) * sin(q12)};
}

template <typename Scalar>
Mat2<Scalar> jacobian(const Vec2<Scalar>& theta, const KinematicParams<Scalar>& zj) {
  using std::cos;
  using std::sin;
  const Scalar s1 = sin(theta(0)), c1 = cos(theta(0));
  const Scalar s12 = sin(theta(0) + theta(1)), c12 = cos(theta(0) + theta(1));
  Mat2<Scalar> J;
  J << -zj(0) * s1 - zj(1) * s12, -zj(1) * s12, zj(0) * c1 + zj(1) * c12, zj(1) * c12;
  return J;
}

/// dJ/dt = (dJ/dtheta) theta_dot + (dJ/dzeta_j) zeta_j_dot. The second term
/// matters when J is built from an evolving length estimate; pass a zero
/// rate (or include_param_rate = false) to drop it.
template <typename Scalar>
Mat2<Scalar> jacobian_time_derivative(const JointState<Scalar>& js, const KinematicParams<Scalar>& zj,
                                      const Vec2<Scalar>& zj_dot, bool include_param_rate = true) {
  using std::cos;
  using std::sin;
  const Scalar s1 = sin(js.theta(0)), c1 = cos(js.theta(0));
  const Scalar s12 = sin(js.theta(0) + js.theta(1)), c12 = cos(js.theta(0) + js.theta(1));
  const Scalar w1 = js.theta_dot(0);
  const Scalar w12 = js.theta_dot(0) + js.theta_dot(1);

  Mat2<Scalar> Jd;
  Jd << -zj(0) * c1 * w1 - zj(1) * c12 * w12, -zj(1) * c12 * w12, -zj(0) * s1 * w1 - zj(1) * s12 * w12,
      -zj(1) * s12 * w12;
  if (include_param_rate) {
    Mat2<Scalar> dl;
    dl << -s1 * zj_dot(0) - s12 * zj_dot(1), -s12 * zj_dot(1), c1 * zj_dot(0) + c12 * zj_dot(1),
        c12 * zj_dot(1);
    Jd += dl;
  }
  return Jd;
}

/// W_j(theta, theta_dot) with W_j * [l1, l2] == J(theta) * theta_dot.
template <typename Scalar>
Mat2<Scalar> kinematic_regressor(const JointState<Scalar>& js) {
  using std::cos;
  using std::sin;
  const Scalar q12 = js.theta(0) + js.theta(1);
  const Scalar w1 = js.theta_dot(0);
  const Scalar w12 = js.theta_dot(0) + js.theta_dot(1);
  Mat2<Scalar> W;
  W << -sin(js.theta(0)) * w1, -sin(q12) * w12, cos(js.theta(0)) * w1, cos(q12) * w12;
  return W;
}

struct InversePolicy {
  double delta_sing = 0.3;  // |det| below which damping kicks in
  double lambda_d = 0.02;   // damping at det = 0
};

template <typename Scalar = double>
struct JacobianInverse {
  Mat2<Scalar> inv;
  Scalar det;
  bool damped;
};

/// Exact inverse when |det J| >= delta_sing, otherwise the damped
/// least-squares inverse J^T (J J^T + lambda I)^-1 with
/// lambda = lambda_d (1 - (det/delta_sing)^2), which is continuous at the
/// switch.
template <typename Scalar>
JacobianInverse<Scalar> regularized_inverse(const Mat2<Scalar>& J, const InversePolicy& policy) {
  using std::abs;
  const Scalar det = J.determinant();
  if (abs(det) >= Scalar(policy.delta_sing)) {
    Mat2<Scalar> adj;
    adj << J(1, 1), -J(0, 1), -J(1, 0), J(0, 0);
    return {adj / det, det, false};
  }
  const Scalar r = det / Scalar(policy.delta_sing);
  const Scalar lambda = Scalar(policy.lambda_d) * (Scalar(1) - r * r);
  const Mat2<Scalar> JJt = J * J.transpose() + lambda * Mat2<Scalar>::Identity();
  return {J.transpose() * JJt.inverse(), det, true};
}

/// d(phi_i e_i)/dt = phi_i de_i (1 + 2 e_i^2 phi_i), elementwise.
template <typename Scalar>
Vec2<Scalar> barrier_product_rate(const Vec2<Scalar>& e, const Vec2<Scalar>& e_dot, const Vec2<Scalar>& phi) {
  return (phi.array() * e_dot.array() * (Scalar(1) + Scalar(2) * e.array().square() * phi.array())).matrix();
}

struct ReferenceAccelOptions {
  InversePolicy inverse;
  bool jdot_estimate_rate = true;
};

/// a_T = d/dt[ J^-1 (p_hT_dot + k1 phi_T e_pT) ] with J the estimated
/// Jacobian. phi_T is the diagonal of the barrier weight matrix.
template <typename Scalar>
Vec2<Scalar> reference_acceleration_delayed(const JointState<Scalar>& js, const KinematicParams<Scalar>& zj_hat,
                                            const Vec2<Scalar>& zj_hat_dot, const TaskPoint& delayed,
                                            const Vec2<Scalar>& e_pT, const Vec2<Scalar>& e_pT_dot,
                                            const Vec2<Scalar>& phi_T, Scalar k1,
                                            const ReferenceAccelOptions& opt = {}) {
  const Mat2<Scalar> J = jacobian(js.theta, zj_hat);
  const auto ji = regularized_inverse(J, opt.inverse);
  if (!ji.inv.allFinite())
    throw SingularityError("reference_acceleration_delayed: estimated Jacobian not invertible");
  const Mat2<Scalar> Jd = jacobian_time_derivative(js, zj_hat, zj_hat_dot, opt.jdot_estimate_rate);

  const Vec2<Scalar> v = delayed.p_dot.cast<Scalar>() + k1 * phi_T.cwiseProduct(e_pT);
  const Vec2<Scalar> v_dot = delayed.p_ddot.cast<Scalar>() + k1 * barrier_product_rate(e_pT, e_pT_dot, phi_T);
  return -ji.inv * Jd * ji.inv * v + ji.inv * v_dot;
}

/// W_yT with W_yT * zeta_y == M a_T + C theta_dot + f + G + C eta_T.
template <typename Scalar>
Mat27<Scalar> dynamic_regressor_delayed(const JointState<Scalar>& js, const Vec2<Scalar>& a_T,
                                        const Vec2<Scalar>& eta_T, Scalar gravity = Scalar(kStandardGravity)) {
  using std::cos;
  using std::sin;
  const Scalar c1 = cos(js.theta(0));
  const Scalar c2 = cos(js.theta(1));
  const Scalar s2 = sin(js.theta(1));
  const Scalar c12 = cos(js.theta(0) + js.theta(1));
  const Scalar w1 = js.theta_dot(0), w2 = js.theta_dot(1);
  // C(theta, theta_dot) is applied to theta_dot + eta_T.
  const Vec2<Scalar> u = js.theta_dot + eta_T;

  Mat27<Scalar> W = Mat27<Scalar>::Zero();
  W(0, 0) = a_T(0);
  W(0, 1) = a_T(0) + a_T(1);
  W(1, 1) = a_T(0) + a_T(1);
  W(0, 2) = c2 * (Scalar(2) * a_T(0) + a_T(1)) - s2 * (w2 * u(0) + (w1 + w2) * u(1));
  W(1, 2) = c2 * a_T(0) + s2 * w1 * u(0);
  W(0, 3) = gravity * c1;
  W(0, 4) = gravity * c12;
  W(1, 4) = gravity * c12;
  W(0, 5) = w1;
  W(1, 6) = w2;
  return W;
}

template <typename Scalar>
Vec2<Scalar> inverse_kinematics(const Vec2<Scalar>& p, const KinematicParams<Scalar>& zj, Elbow elbow) {
  using std::abs;
  using std::acos;
  using std::atan2;
  using std::clamp;
  using std::cos;
  using std::sin;
  const Scalar l1 = zj(0), l2 = zj(1);
  const Scalar r2 = p.squaredNorm();
  const Scalar rmin = abs(l1 - l2), rmax = l1 + l2;
  // small slack so that exact boundary points survive rounding
  const Scalar tol = Scalar(1e-12) * rmax;
  if (r2 > (rmax + tol) * (rmax + tol) || r2 < (rmin - tol) * (rmin - tol) || !p.allFinite())
    throw WorkspaceError("inverse_kinematics: target outside the reachable annulus");

  const Scalar c2 = clamp((r2 - l1 * l1 - l2 * l2) / (Scalar(2) * l1 * l2), Scalar(-1), Scalar(1));
  Scalar q2 = acos(c2);
  if (elbow == Elbow::negative) q2 = -q2;
  const Scalar q1 = atan2(p(1), p(0)) - atan2(l2 * sin(q2), l1 + l2 * cos(q2));
  return {q1, q2};
}

}  // namespace tsync

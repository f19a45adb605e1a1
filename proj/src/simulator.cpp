#include "tsync/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace tsync {

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::completed:
      return "completed";
    case RunStatus::barrier_violation:
      return "barrier_violation";
    case RunStatus::numeric_failure:
      return "numeric_failure";
  }
  return "unknown";
}

void SimConfig::validate() const {
  robot.validate();
  gains.validate();
  bounds.validate();
  diagnostics.validate(gains.T);
  if (!(dt > 0)) throw ConfigError("sim.dt must be positive");
  if (!(duration >= 0)) throw ConfigError("sim.duration must be non-negative");
  if (plant_substeps < 1) throw ConfigError("sim.plant_substeps must be at least 1");
  if (!(controller.inverse.delta_sing > 0)) throw ConfigError("controller.delta_sing must be positive");
  if (!(controller.inverse.lambda_d > 0)) throw ConfigError("controller.lambda_d must be positive");
  if (!zeta_j0.allFinite()) throw ConfigError("sim.zeta_j0 must be finite");
  if (!zeta_y0.allFinite()) throw ConfigError("sim.zeta_y0 must be finite");
  if (!p0.allFinite()) throw ConfigError("sim.p0 must be finite");
  if (!(trajectory.radius.array() >= 0).all()) throw ConfigError("trajectory.radius must be non-negative");
  const Vec2d k_r = bounds.k_r();
  for (int i = 0; i < 2; ++i)
    if (!(std::abs(p0(i)) <= k_r(i)))
      throw ConfigError("sim.p0: entry " + std::to_string(i + 1) + " outside the robot bounds");
}

std::shared_ptr<const TrajectorySource> SimConfig::make_trajectory() const {
  if (!trajectory_file.empty())
    return std::make_shared<TabulatedTrajectory>(TabulatedTrajectory::load(trajectory_file));
  return std::make_shared<CircleTrajectory>(trajectory);
}

JointState<double> integrate_plant(const JointState<double>& js, const Vec2d& tau, const Vec7d& zeta_y, double dt,
                                   int substeps, double gravity) {
  using State = Eigen::Vector4d;
  auto rhs = [&](const State& x) {
    JointState<double> s;
    s.theta = x.head<2>();
    s.theta_dot = x.tail<2>();
    State dx;
    dx << x.tail<2>(), forward_dynamics(s, tau, zeta_y, gravity);
    return dx;
  };

  State x;
  x << js.theta, js.theta_dot;
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) {
    const State k1 = rhs(x);
    const State k2 = rhs(x + 0.5 * h * k1);
    const State k3 = rhs(x + 0.5 * h * k2);
    const State k4 = rhs(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  JointState<double> out;
  out.theta = x.head<2>();
  out.theta_dot = x.tail<2>();
  out.t = js.t + dt;
  return out;
}

namespace {

SimState initial_state(const SimConfig& cfg, const TrajectorySource& traj) {
  cfg.validate();
  const Vec2d zj_true = true_kinematic_params(cfg.robot);

  JointState<double> js;
  js.theta = inverse_kinematics(cfg.p0, zj_true, cfg.elbow);
  js.theta_dot.setZero();
  js.t = 0.0;

  SimState s{js, cfg.zeta_j0, cfg.zeta_y0, DelayLine(cfg.gains.T, cfg.dt),
             IclStack(cfg.gains.N, cfg.gains.delta_t), 0};
  s.delay_line.push(0.0, traj.eval(0.0));
  s.icl.push_sample(0.0, forward_kinematics(js.theta, zj_true), kinematic_regressor(js));

  const Vec2d e_pT0 = sync_error_delayed(forward_kinematics(js.theta, zj_true), s.delay_line.delayed(0.0).p);
  barrier_weights(e_pT0, cfg.bounds);  // throws when the start is already unsafe
  return s;
}

}  // namespace

Simulator::Simulator(SimConfig cfg)
    : cfg_(std::move(cfg)),
      traj_(cfg_.make_trajectory()),
      zeta_y_true_(true_dynamic_params(cfg_.robot)),
      zeta_j_true_(true_kinematic_params(cfg_.robot)),
      state_(initial_state(cfg_, *traj_)) {}

Simulator::StepResult Simulator::step() {
  StepResult res;
  const double t = time();
  auto& s = state_;
  s.js.t = t;

  if (s.delay_line.empty() || t > 0.0) s.delay_line.push(t, traj_->eval(t));
  const TaskPoint delayed = s.delay_line.delayed(t);
  const TaskPoint current = traj_->eval(t);

  const Vec2d p = forward_kinematics(s.js.theta, zeta_j_true_);
  const Vec2d e_p = current.p - p;

  // Safety monitor on the true error as well as the one the controller sees.
  for (int i = 0; i < 2; ++i) {
    if (!(std::abs(e_p(i)) < cfg_.bounds.k_m(i))) {
      res.status = RunStatus::barrier_violation;
      res.violation_axis = i;
      res.message = "e_p axis " + std::to_string(i + 1) + " left the safe set at t = " + std::to_string(t);
      return res;
    }
  }

  ControlOutput ctl;
  Vec2d zj_dot;
  try {
    const Vec2d e_pT = sync_error_delayed(p, delayed.p);
    const Vec2d phi_T = barrier_weights(e_pT, cfg_.bounds);
    const Mat2d W_j = kinematic_regressor(s.js);
    zj_dot = zeta_j_derivative(s.icl, W_j, phi_T, e_pT, s.zeta_j_hat, cfg_.gains);
    ControllerOptions copt = cfg_.controller;
    copt.gravity = cfg_.robot.g;
    ctl = compute_control(s.js, p, delayed, s.zeta_j_hat, zj_dot, s.zeta_y_hat, cfg_.bounds, cfg_.gains, copt);
  } catch (const BarrierViolation& bv) {
    res.status = RunStatus::barrier_violation;
    res.violation_axis = bv.axis;
    res.message = std::string("e_pT: ") + bv.what() + " at t = " + std::to_string(t);
    return res;
  }
  if (!ctl.tau.allFinite() || !ctl.zeta_y_dot.allFinite() || !zj_dot.allFinite()) {
    res.status = RunStatus::numeric_failure;
    res.message = "non-finite control at t = " + std::to_string(t);
    return res;
  }

  LogRecord r;
  r.t = t;
  r.theta = s.js.theta;
  r.theta_dot = s.js.theta_dot;
  r.p = p;
  r.p_h = current.p;
  r.p_hT = delayed.p;
  r.e_p = e_p;
  r.e_pT = ctl.e_pT;
  {
    const Vec2d phi = barrier_weights(e_p, cfg_.bounds);
    const auto ji = regularized_inverse(ctl.jp_hat, cfg_.controller.inverse);
    r.eta = eta_current(s.js.theta_dot, ji.inv, current.p_dot, phi, e_p, cfg_.gains.k_1);
  }
  r.eta_T = ctl.eta_T;
  r.tau = ctl.tau;
  r.zeta_j_hat = s.zeta_j_hat;
  r.zeta_y_hat = s.zeta_y_hat;
  r.norm_e_p = e_p.norm();
  r.norm_e_pT = ctl.e_pT.norm();
  r.V1 = blf_value(e_p, cfg_.bounds).value;
  r.lambda_min = excitation(s.icl, cfg_.diagnostics.lambda_threshold).lambda_min;
  r.constraint_margin = cfg_.bounds.k_m - e_p.cwiseAbs();
  r.p_dot = jacobian(s.js.theta, zeta_j_true_) * s.js.theta_dot;
  r.p_h_dot = current.p_dot;
  r.p_h_ddot = current.p_ddot;
  r.window_count = s.icl.window_count();
  r.jp_damped = ctl.jp_damped;

  JointState<double> next;
  try {
    next = integrate_plant(s.js, ctl.tau, zeta_y_true_, cfg_.dt, cfg_.plant_substeps, cfg_.robot.g);
  } catch (const NumericError& e) {
    res.status = RunStatus::numeric_failure;
    res.message = e.what();
    return res;
  }
  if (!next.finite()) {
    res.status = RunStatus::numeric_failure;
    res.message = "plant state became non-finite at t = " + std::to_string(t);
    return res;
  }

  s.js = next;
  s.zeta_j_hat += cfg_.dt * zj_dot;
  s.zeta_y_hat += cfg_.dt * ctl.zeta_y_dot;
  ++s.step_index;
  s.js.t = time();
  s.icl.push_sample(time(), forward_kinematics(s.js.theta, zeta_j_true_), kinematic_regressor(s.js));

  res.record = std::move(r);
  return res;
}

RunSummary summarize(const std::vector<LogRecord>& log, const SimConfig& cfg) {
  RunSummary sm;
  sm.steps = log.size();
  sm.min_constraint_margin = cfg.bounds.k_m;
  for (const auto& r : log) {
    sm.peak_norm_e_p = std::max(sm.peak_norm_e_p, r.norm_e_p);
    sm.peak_norm_e_pT = std::max(sm.peak_norm_e_pT, r.norm_e_pT);
    sm.max_abs_e_p = sm.max_abs_e_p.cwiseMax(r.e_p.cwiseAbs());
    sm.min_constraint_margin = sm.min_constraint_margin.cwiseMin(r.constraint_margin);
    if (r.jp_damped) ++sm.damped_steps;
  }
  if (!log.empty()) {
    const auto& last = log.back();
    sm.t_end = last.t;
    sm.final_norm_e_p = last.norm_e_p;
    sm.final_norm_e_pT = last.norm_e_pT;
    sm.zeta_j_final = last.zeta_j_hat;
    sm.zeta_y_final = last.zeta_y_hat;
    sm.lambda_min_final = last.lambda_min;
  }
  return sm;
}

RunResult run(const SimConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Simulator sim(cfg);
  RunResult out;
  const auto n_steps = static_cast<long>(std::llround(cfg.duration / cfg.dt));
  out.log.reserve(static_cast<std::size_t>(n_steps));

  RunStatus status = RunStatus::completed;
  std::string message;
  int axis = -1;
  for (long k = 0; k < n_steps; ++k) {
    auto res = sim.step();
    if (res.record) out.log.push_back(std::move(*res.record));
    if (res.status != RunStatus::completed) {
      status = res.status;
      message = res.message;
      axis = res.violation_axis;
      break;
    }
  }

  out.summary = summarize(out.log, cfg);
  if (out.log.empty()) {
    // Summary of the initial state.
    const auto& st = sim.state();
    out.summary.zeta_j_final = st.zeta_j_hat;
    out.summary.zeta_y_final = st.zeta_y_hat;
  }
  out.summary.status = status;
  out.summary.message = message;
  out.summary.violation_axis = axis;
  out.summary.t_first_excited = excitation(sim.state().icl, cfg.diagnostics.lambda_threshold).t_first_excited;
  out.summary.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<LkSample> lk_samples_from_log(const std::vector<LogRecord>& log, const BarrierBounds& bb) {
  std::vector<LkSample> out;
  out.reserve(log.size());
  for (const auto& r : log) {
    const Vec2d phi = barrier_weights(r.e_p, bb);
    const Vec2d e_dot = r.p_h_dot - r.p_dot;
    out.push_back({r.t, r.p_h_ddot.squaredNorm(), barrier_product_rate(r.e_p, e_dot, phi).squaredNorm(),
                   r.p_h_dot.squaredNorm()});
  }
  return out;
}

std::vector<DiagnosticsRecord> compute_diagnostics(const std::vector<LogRecord>& log, const SimConfig& cfg) {
  std::vector<DiagnosticsRecord> out;
  out.reserve(log.size());
  const auto samples = lk_samples_from_log(log, cfg.bounds);
  const Vec7d zy_true = true_dynamic_params(cfg.robot);
  const double V0 = log.empty() ? 0.0 : log.front().V1;
  const double T = cfg.gains.T;
  const auto window_len = static_cast<std::size_t>(std::ceil(T / cfg.dt - 1e-9)) + 2;

  for (std::size_t k = 0; k < log.size(); ++k) {
    const auto& r = log[k];
    DiagnosticsRecord d;
    d.V1 = r.V1;
    const std::size_t lo = k + 1 > window_len ? k + 1 - window_len : 0;
    const auto lk = lk_functionals(std::span<const LkSample>(samples.data() + lo, k + 1 - lo), T, cfg.diagnostics);
    d.P1 = lk.P1;
    d.P2 = lk.P2;
    d.P3 = lk.P3;
    JointState<double> js;
    js.theta = r.theta;
    js.theta_dot = r.theta_dot;
    d.skew_residual = skew_residual(js, zy_true, r.eta);
    d.safe_radius =
        safe_radius(V0, cfg.diagnostics.safe_epsilon1, cfg.diagnostics.safe_beta1, r.t, cfg.bounds).radius;
    out.push_back(d);
  }
  return out;
}

}  // namespace tsync

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsync/controller.hpp"
#include "tsync/diagnostics.hpp"
#include "tsync/human_trajectory.hpp"
#include "tsync/icl_estimator.hpp"
#include "tsync/robot_model.hpp"

namespace tsync {

struct SimConfig {
  RobotParams robot;
  Gains gains;
  BarrierBounds bounds;
  CircleTrajectory trajectory;
  std::string trajectory_file;  // when set, replaces the circle
  ControllerOptions controller;
  DiagnosticsConfig diagnostics;

  double duration = 50.0;
  double dt = 0.01;
  int plant_substeps = 4;
  Vec2d zeta_j0{0.5, 0.25};
  Vec7d zeta_y0 = (Vec7d() << 0.502, 0.082, 0.158, 9.5 / kStandardGravity, 2.78 / kStandardGravity, 0.0185, 0.0185).finished();
  Vec2d p0{0.78, 0.23};
  Elbow elbow = Elbow::positive;
  std::uint64_t seed = 0;  // reserved; nothing in the loop is random

  void validate() const;
  std::shared_ptr<const TrajectorySource> make_trajectory() const;
};

struct SimState {
  JointState<double> js;
  Vec2d zeta_j_hat = Vec2d::Zero();
  Vec7d zeta_y_hat = Vec7d::Zero();
  DelayLine delay_line;
  IclStack icl;
  long step_index = 0;
};

struct LogRecord {
  double t = 0;
  Vec2d theta, theta_dot, p, p_h, p_hT, e_p, e_pT, eta, eta_T, tau, zeta_j_hat;
  Vec7d zeta_y_hat;
  double norm_e_p = 0, norm_e_pT = 0, V1 = 0, lambda_min = 0;
  Vec2d constraint_margin;
  // Ground-truth and bookkeeping signals used by diagnostics.
  Vec2d p_dot, p_h_dot, p_h_ddot;
  std::size_t window_count = 0;
  bool jp_damped = false;
};

enum class RunStatus { completed, barrier_violation, numeric_failure };
std::string to_string(RunStatus s);

struct RunSummary {
  RunStatus status = RunStatus::completed;
  std::string message;
  std::size_t steps = 0;
  double t_end = 0;
  double final_norm_e_p = 0, final_norm_e_pT = 0;
  double peak_norm_e_p = 0, peak_norm_e_pT = 0;
  Vec2d max_abs_e_p = Vec2d::Zero();
  Vec2d min_constraint_margin = Vec2d::Zero();
  Vec2d zeta_j_final = Vec2d::Zero();
  Vec7d zeta_y_final = Vec7d::Zero();
  double lambda_min_final = 0;
  std::optional<double> t_first_excited;
  std::size_t damped_steps = 0;
  int violation_axis = -1;
  double wall_clock_s = 0;
};

struct RunResult {
  std::vector<LogRecord> log;
  RunSummary summary;
};

/// Classical RK4 over `substeps` equal sub-intervals of [0, dt] with the
/// torque held constant.
JointState<double> integrate_plant(const JointState<double>& js, const Vec2d& tau, const Vec7d& zeta_y, double dt,
                                   int substeps, double gravity = kStandardGravity);

class Simulator {
 public:
  /// Throws WorkspaceError for an unreachable p0 and BarrierViolation if the
  /// initial delayed error is already outside the bounds.
  explicit Simulator(SimConfig cfg);

  struct StepResult {
    std::optional<LogRecord> record;
    RunStatus status = RunStatus::completed;
    std::string message;
    int violation_axis = -1;
  };

  /// Computes the control at the current time, advances plant and estimates
  /// by one control period and returns the record of the pre-step instant.
  StepResult step();

  const SimState& state() const { return state_; }
  const SimConfig& config() const { return cfg_; }
  double time() const { return static_cast<double>(state_.step_index) * cfg_.dt; }

 private:
  SimConfig cfg_;
  std::shared_ptr<const TrajectorySource> traj_;
  Vec7d zeta_y_true_;
  Vec2d zeta_j_true_;
  SimState state_;
};

RunResult run(const SimConfig& cfg);
RunSummary summarize(const std::vector<LogRecord>& log, const SimConfig& cfg);

/// Delay-functional integrands rebuilt from a log. The phi(e_p) e_p rate
/// uses the logged true end-effector velocity.
std::vector<LkSample> lk_samples_from_log(const std::vector<LogRecord>& log, const BarrierBounds& bb);

/// One DiagnosticsRecord per log record.
std::vector<DiagnosticsRecord> compute_diagnostics(const std::vector<LogRecord>& log, const SimConfig& cfg);

}  // namespace tsync

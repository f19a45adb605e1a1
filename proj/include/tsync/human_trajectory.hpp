#pragma once

#include <cstddef>
#include <deque>
#include <filesystem>
#include <memory>
#include <vector>

#include "tsync/types.hpp"

namespace tsync {

/// Human hand position, velocity and acceleration at one instant.
struct TaskPoint {
  Vec2d p = Vec2d::Zero();
  Vec2d p_dot = Vec2d::Zero();
  Vec2d p_ddot = Vec2d::Zero();
};

class TrajectorySource {
 public:
  virtual ~TrajectorySource() = default;
  virtual TaskPoint eval(double t) const = 0;
};

/// p(t) = center + [rx cos(w t), ry sin(w t)].
struct CircleTrajectory final : TrajectorySource {
  Vec2d center{0.55, 0.25};
  Vec2d radius{0.2, 0.2};
  double omega = 0.5;

  CircleTrajectory() = default;
  CircleTrajectory(Vec2d c, Vec2d r, double w) : center(c), radius(r), omega(w) {}

  TaskPoint eval(double t) const override;
};

/// Replays a table of (t, px, py, vx, vy, ax, ay) rows with linear
/// interpolation; holds the end samples outside the table range.
class TabulatedTrajectory final : public TrajectorySource {
 public:
  struct Row {
    double t;
    TaskPoint tp;
  };

  explicit TabulatedTrajectory(std::vector<Row> rows);
  static TabulatedTrajectory load(const std::filesystem::path& path);

  TaskPoint eval(double t) const override;
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::vector<Row> rows_;
};

TaskPoint lerp(const TaskPoint& a, const TaskPoint& b, double s);

/// Fixed-delay buffer of human samples. Queries at time t return the sample
/// at max(t - T, 0), linearly interpolated between stored samples; before
/// T has elapsed the first sample is held.
class DelayLine {
 public:
  DelayLine(double delay, double dt);

  void push(double t, const TaskPoint& tp);
  TaskPoint delayed(double t) const;

  double delay() const { return delay_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

 private:
  struct Sample {
    double t;
    TaskPoint tp;
  };

  double delay_;
  std::size_t capacity_;
  std::deque<Sample> samples_;
  // Kept separately so the pre-history clamp survives eviction.
  Sample first_{};
};

/// Per-axis margin k_h,i - |p_i|. Zero margin counts as inside.
struct BoundsCheck {
  Vec2d margin;
  bool violated;
};
BoundsCheck verify_bounds(const TaskPoint& tp, const Vec2d& k_h);

}  // namespace tsync

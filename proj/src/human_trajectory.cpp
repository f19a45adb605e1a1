#include "tsync/human_trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace tsync {

TaskPoint CircleTrajectory::eval(double t) const {
  const double c = std::cos(omega * t);
  const double s = std::sin(omega * t);
  TaskPoint tp;
  tp.p = center + Vec2d(radius(0) * c, radius(1) * s);
  tp.p_dot = omega * Vec2d(-radius(0) * s, radius(1) * c);
  tp.p_ddot = -omega * omega * Vec2d(radius(0) * c, radius(1) * s);
  return tp;
}

TaskPoint lerp(const TaskPoint& a, const TaskPoint& b, double s) {
  TaskPoint out;
  out.p = a.p + s * (b.p - a.p);
  out.p_dot = a.p_dot + s * (b.p_dot - a.p_dot);
  out.p_ddot = a.p_ddot + s * (b.p_ddot - a.p_ddot);
  return out;
}

TabulatedTrajectory::TabulatedTrajectory(std::vector<Row> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw ConfigError("trajectory table is empty");
  for (std::size_t i = 1; i < rows_.size(); ++i)
    if (!(rows_[i].t > rows_[i - 1].t))
      throw ConfigError("trajectory table: time column must be strictly increasing (row " +
                        std::to_string(i + 1) + ")");
}

TabulatedTrajectory TabulatedTrajectory::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory table " + path.string());
  std::vector<Row> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double v[7];
    for (double& x : v)
      if (!(ss >> x))
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 7 numeric columns");
    Row r;
    r.t = v[0];
    r.tp.p = {v[1], v[2]};
    r.tp.p_dot = {v[3], v[4]};
    r.tp.p_ddot = {v[5], v[6]};
    rows.push_back(r);
  }
  return TabulatedTrajectory(std::move(rows));
}

TaskPoint TabulatedTrajectory::eval(double t) const {
  if (t <= rows_.front().t) return rows_.front().tp;
  if (t >= rows_.back().t) return rows_.back().tp;
  auto hi = std::upper_bound(rows_.begin(), rows_.end(), t, [](double x, const Row& r) { return x < r.t; });
  auto lo = hi - 1;
  return lerp(lo->tp, hi->tp, (t - lo->t) / (hi->t - lo->t));
}

DelayLine::DelayLine(double delay, double dt)
    : delay_(delay), capacity_(static_cast<std::size_t>(std::ceil(delay / dt - 1e-9)) + 2) {
  if (!(delay >= 0)) throw ConfigError("delay must be non-negative");
  if (!(dt > 0)) throw ConfigError("dt must be positive");
}

void DelayLine::push(double t, const TaskPoint& tp) {
  if (samples_.empty()) {
    first_ = {t, tp};
  } else if (!(t > samples_.back().t)) {
    throw OrderingError("DelayLine::push: timestamps must be strictly increasing");
  }
  samples_.push_back({t, tp});
  while (samples_.size() > capacity_) samples_.pop_front();
}

TaskPoint DelayLine::delayed(double t) const {
  if (samples_.empty()) throw EmptyBufferError("DelayLine::delayed: no samples");
  const double tq = std::max(t - delay_, first_.t);
  if (tq <= first_.t) return first_.tp;
  if (tq >= samples_.back().t) return samples_.back().tp;
  if (tq < samples_.front().t) throw EmptyBufferError("DelayLine::delayed: sample evicted");

  auto hi = std::upper_bound(samples_.begin(), samples_.end(), tq,
                             [](double x, const Sample& s) { return x < s.t; });
  auto lo = hi - 1;
  if (lo->t == tq) return lo->tp;
  return lerp(lo->tp, hi->tp, (tq - lo->t) / (hi->t - lo->t));
}

BoundsCheck verify_bounds(const TaskPoint& tp, const Vec2d& k_h) {
  const Vec2d margin = k_h - tp.p.cwiseAbs();
  return {margin, (margin.array() < 0.0).any()};
}

}  // namespace tsync

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "tsync/human_trajectory.hpp"

using namespace tsync;

namespace {

DelayLine fill(const TrajectorySource& src, double delay, double dt, double t_end) {
  DelayLine dl(delay, dt);
  const long n = std::lround(t_end / dt);
  for (long k = 0; k <= n; ++k) dl.push(static_cast<double>(k) * dt, src.eval(static_cast<double>(k) * dt));
  return dl;
}

}  // namespace

TEST_CASE("reference circle") {
  const CircleTrajectory c;
  const auto t0 = c.eval(0.0);
  CHECK((t0.p - Vec2d(0.75, 0.25)).norm() < 1e-15);
  CHECK((t0.p_dot - Vec2d(0.0, 0.1)).norm() < 1e-15);
  CHECK((t0.p_ddot - Vec2d(-0.05, 0.0)).norm() < 1e-15);
  CHECK((c.eval(std::numbers::pi).p - Vec2d(0.55, 0.45)).norm() < 1e-15);

  // Derivatives are consistent with the position by central differences.
  const double h = 1e-4;
  for (double t : {0.3, 7.0, 31.4}) {
    const auto a = c.eval(t - h), b = c.eval(t + h), m = c.eval(t);
    CHECK(((b.p - a.p) / (2 * h) - m.p_dot).norm() < 1e-9);
    CHECK(((b.p_dot - a.p_dot) / (2 * h) - m.p_ddot).norm() < 1e-9);
  }
}

TEST_CASE("delay line clamps to the first sample before the delay has elapsed") {
  const CircleTrajectory c;
  const auto dl = fill(c, 0.45, 0.01, 0.2);
  const auto d = dl.delayed(0.2);
  const auto first = c.eval(0.0);
  CHECK(d.p == first.p);
  CHECK(d.p_dot == first.p_dot);
  CHECK(d.p_ddot == first.p_ddot);
}

TEST_CASE("delay line reproduces the delayed analytic signal") {
  const CircleTrajectory c;
  SUBCASE("grid-aligned delay") {
    const auto dl = fill(c, 0.45, 0.01, 10.0);
    CHECK((dl.delayed(10.0).p - c.eval(9.55).p).norm() < 1e-12);
  }
  SUBCASE("off-grid delay converges at second order in dt") {
    // Worst case over sub-sample offsets, so the ratio is not skewed by
    // where the query lands inside an interval.
    auto worst = [&](double dt) {
      double w = 0.0;
      for (int j = 1; j < 100; ++j) {
        const double T = 0.45 + j * 1e-4;
        const auto dl = fill(c, T, dt, 10.0);
        w = std::max(w, (dl.delayed(10.0).p - c.eval(10.0 - T).p).norm());
      }
      return w;
    };
    const double e1 = worst(0.01), e2 = worst(0.005);
    CHECK(e1 <= 0.05 * 0.01 * 0.01 / 8 * 1.01);  // |p_ddot| dt^2 / 8
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  }
  SUBCASE("zero delay is a pass-through at sample instants") {
    DelayLine dl(0.0, 0.01);
    for (int k = 0; k <= 500; ++k) {
      const double t = k * 0.01;
      dl.push(t, c.eval(t));
      const auto d = dl.delayed(t);
      REQUIRE(d.p == c.eval(t).p);
      REQUIRE(d.p_dot == c.eval(t).p_dot);
    }
  }
}

TEST_CASE("delay line storage stays bounded and rejects misuse") {
  const CircleTrajectory c;
  const auto dl = fill(c, 0.45, 0.01, 50.0);
  CHECK(dl.size() <= dl.capacity());
  CHECK(dl.capacity() == 47);

  DelayLine empty(0.45, 0.01);
  CHECK_THROWS_AS(empty.delayed(1.0), EmptyBufferError);

  DelayLine ordered(0.45, 0.01);
  ordered.push(0.0, c.eval(0.0));
  ordered.push(0.01, c.eval(0.01));
  CHECK_THROWS_AS(ordered.push(0.01, c.eval(0.01)), OrderingError);
  CHECK_THROWS_AS(ordered.push(0.005, c.eval(0.005)), OrderingError);

  CHECK_THROWS_AS(DelayLine(-0.1, 0.01), ConfigError);
  CHECK_THROWS_AS(DelayLine(0.45, 0.0), ConfigError);
}

TEST_CASE("human position bounds") {
  const CircleTrajectory c;
  const Vec2d k_h{0.75, 0.45};
  Vec2d min_margin = k_h;
  double t_at_min = -1;
  for (int k = 0; k <= 5000; ++k) {
    const double t = k * 0.01;
    const auto bc = verify_bounds(c.eval(t), k_h);
    CHECK_FALSE(bc.violated);
    if (bc.margin(0) < min_margin(0)) t_at_min = t;
    min_margin = min_margin.cwiseMin(bc.margin);
  }
  CHECK(min_margin(0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(t_at_min == 0.0);
  CHECK(min_margin(1) > 0.0);

  TaskPoint origin;
  CHECK(verify_bounds(origin, k_h).margin == k_h);
  TaskPoint far;
  far.p = {1.0, 0.0};
  const auto bc = verify_bounds(far, k_h);
  CHECK(bc.violated);
  CHECK(bc.margin(0) < 0.0);
  CHECK(bc.margin(1) > 0.0);
}

TEST_CASE("delayed and current human positions stay within the speed-times-delay bound") {
  const CircleTrajectory c;
  double worst = 0.0;
  for (int k = 45; k <= 5000; ++k) {
    const double t = k * 0.01;
    worst = std::max(worst, (c.eval(t).p - c.eval(t - 0.45).p).norm());
  }
  CHECK(worst <= 0.1 * 0.45);
}

TEST_CASE("tabulated trajectory") {
  const auto path = std::filesystem::temp_directory_path() / "tsync_tabulated_test.csv";
  {
    std::ofstream f(path);
    f << "# t px py vx vy ax ay\n"
      << "0, 0.5, 0.2, 0.1, 0, 0, 0\n"
      << "1 0.6 0.2 0.1 0 0 0\n"
      << "\n"
      << "2, 0.6, 0.4, 0, 0.2, 0, 0\n";
  }
  const auto tab = TabulatedTrajectory::load(path);
  CHECK(tab.rows().size() == 3);
  CHECK((tab.eval(0.5).p - Vec2d(0.55, 0.2)).norm() < 1e-15);
  CHECK((tab.eval(1.5).p_dot - Vec2d(0.05, 0.1)).norm() < 1e-15);
  CHECK(tab.eval(-3.0).p == Vec2d(0.5, 0.2));
  CHECK(tab.eval(9.0).p == Vec2d(0.6, 0.4));

  {
    std::ofstream f(path);
    f << "0 0 0 0 0 0 0\n1 0 0 0 0 0\n";
  }
  CHECK_THROWS_AS(TabulatedTrajectory::load(path), ConfigError);
  {
    std::ofstream f(path);
    f << "0 0 0 0 0 0 0\n0 1 1 0 0 0 0\n";
  }
  CHECK_THROWS_AS(TabulatedTrajectory::load(path), ConfigError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(TabulatedTrajectory::load(path), ConfigError);
}

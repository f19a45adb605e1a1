#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tsync/icl_estimator.hpp"

using namespace tsync;

namespace {

const Vec2d kTrue{0.85, 1.3};

// Arm turning at constant joint rate qd from q = 0, sampled every dt.
IclStack constant_rate_stack(const Vec2d& qd, double dt, double t_end, int capacity = 25, double window = 0.2) {
  IclStack s(capacity, window);
  const long n = std::lround(t_end / dt);
  for (long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    JointState<double> js;
    js.theta = qd * t;
    js.theta_dot = qd;
    s.push_sample(t, forward_kinematics(js.theta, kTrue), kinematic_regressor(js));
  }
  return s;
}

// Window with Y = I and U = u: unit regressor held for one time unit.
IclStack identity_window(const Vec2d& u) {
  IclStack s(25, 1.0);
  s.push_sample(0.0, Vec2d::Zero(), Mat2d::Identity());
  s.push_sample(0.5, 0.5 * u, Mat2d::Identity());
  s.push_sample(1.0, u, Mat2d::Identity());
  return s;
}

}  // namespace

TEST_CASE("a motionless window carries no information") {
  IclStack s(25, 0.2);
  for (int k = 0; k <= 20; ++k) s.push_sample(k * 0.01, Vec2d(0.4, 0.3), Mat2d::Zero());
  REQUIRE(s.window_count() == 1);
  CHECK(s.windows().front().U.isZero(0.0));
  CHECK(s.windows().front().Y.isZero(0.0));
  CHECK(excitation(s, 1e-4).lambda_min == 0.0);
}

TEST_CASE("window integral of the regressor") {
  // theta_dot = [1, 0]: first column of int W_j over [0, 0.2] is [cos 0.2 - 1, sin 0.2].
  const Vec2d exact{std::cos(0.2) - 1.0, std::sin(0.2)};
  CHECK(exact(0) == doctest::Approx(-0.019933).epsilon(1e-4));
  CHECK(exact(1) == doctest::Approx(0.198669).epsilon(1e-5));

  auto err = [&](double dt) {
    const auto s = constant_rate_stack(Vec2d(1, 0), dt, 0.2);
    REQUIRE(s.window_count() == 1);
    return (s.windows().front().Y.col(0) - exact).norm();
  };
  const double e1 = err(0.01), e2 = err(0.005);
  CHECK(e1 < 0.2 * 0.01 * 0.01 / 12 * 1.01);  // trapezoid bound, |W''| <= 1
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.01));

  // U is the exact endpoint displacement.
  const auto s = constant_rate_stack(Vec2d(1, 0), 0.01, 0.2);
  JointState<double> end;
  end.theta = Vec2d(0.2, 0.0);
  CHECK((s.windows().front().U - (forward_kinematics(end.theta, kTrue) - forward_kinematics(Vec2d(0, 0), kTrue)))
            .norm() < 1e-15);
}

TEST_CASE("windows are consecutive and the stack keeps the newest N") {
  const auto s = constant_rate_stack(Vec2d(0.3, -0.5), 0.01, 5.0);
  CHECK(s.window_count() == 25);
  CHECK(s.finalized_total() == 25);
  for (std::size_t i = 1; i < s.windows().size(); ++i)
    CHECK(s.windows()[i].t_start == s.windows()[i - 1].t_end);

  const auto longer = constant_rate_stack(Vec2d(0.3, -0.5), 0.01, 12.0);
  CHECK(longer.window_count() == 25);
  CHECK(longer.finalized_total() == 60);
  CHECK(longer.windows().front().t_start == doctest::Approx(7.0));

  Mat2d info = Mat2d::Zero();
  Vec2d cross = Vec2d::Zero();
  for (const auto& w : longer.windows()) {
    info += w.Y.transpose() * w.Y;
    cross += w.Y.transpose() * w.U;
  }
  CHECK((info - longer.information()).norm() < 1e-15);
  CHECK((cross - longer.cross_term()).norm() < 1e-15);
}

TEST_CASE("window identity U = Y zeta_j holds to quadrature accuracy") {
  const auto s = constant_rate_stack(Vec2d(0.7, -0.4), 0.01, 5.0);
  double worst = 0.0;
  for (const auto& w : s.windows()) worst = std::max(worst, (w.U - w.Y * kTrue).norm());
  CHECK(worst < 1e-5);
  CHECK(icl_correction(s, kTrue).norm() < 1e-4);
}

TEST_CASE("correction term") {
  IclStack empty(25, 0.2);
  CHECK(icl_correction(empty, Vec2d(0.5, 0.25)).isZero(0.0));

  const auto unit = identity_window(kTrue);
  const Vec2d zhat{0.5, 0.25};
  CHECK((icl_correction(unit, zhat) - (kTrue - zhat)).norm() < 1e-15);

  // Affine in the estimate with slope -sum Y^T Y.
  const auto s = constant_rate_stack(Vec2d(0.7, -0.4), 0.01, 5.0);
  const Vec2d a{0.4, 0.9}, b{1.1, 0.2};
  CHECK(((icl_correction(s, a) - icl_correction(s, b)) + s.information() * (a - b)).norm() < 1e-12);
}

TEST_CASE("kinematic parameter update") {
  Gains g;
  IclStack empty(25, 0.2);
  const Vec2d rate = zeta_j_derivative(empty, Mat2d::Identity(), Vec2d(1, 1), Vec2d(0.01, 0), Vec2d(0.5, 0.25), g);
  CHECK((rate - Vec2d(-0.01, 0.0)).norm() < 1e-15);

  const auto s = constant_rate_stack(Vec2d(0.7, -0.4), 0.01, 5.0);
  CHECK(zeta_j_derivative(s, Mat2d::Identity(), Vec2d(1, 1), Vec2d::Zero(), kTrue, g).norm() < 1e-2);

  // With rich data and no tracking error the estimate error norm decreases.
  REQUIRE(min_eigenvalue_sym2(s.information()) > 0.0);
  oracle::Rng rng(31);
  for (int n = 0; n < 100; ++n) {
    const Vec2d zhat = kTrue + rng.vec2(-0.5, 0.5);
    const Vec2d err = zhat - kTrue;
    const Vec2d zd = zeta_j_derivative(s, Mat2d::Identity(), Vec2d(1, 1), Vec2d::Zero(), zhat, g);
    const double d_norm_sq = 2.0 * err.dot(zd);
    // Matches -2 k err^T Gamma1 (sum Y^T Y) err up to the quadrature residual.
    CHECK(d_norm_sq == doctest::Approx(-2.0 * g.k_icl * err.dot(g.Gamma1 * s.information() * err)).epsilon(1e-3));
    CHECK(d_norm_sq < 0.0);
  }
}

TEST_CASE("excitation report") {
  IclStack empty(25, 0.2);
  const auto r0 = excitation(empty, 1e-4);
  CHECK(r0.lambda_min == 0.0);
  CHECK(r0.window_count == 0);
  CHECK_FALSE(r0.t_first_excited.has_value());

  const auto unit = excitation(identity_window(kTrue), 1e-4);
  CHECK(unit.lambda_min == doctest::Approx(1.0).epsilon(1e-15));
  REQUIRE(unit.t_first_excited.has_value());
  CHECK(*unit.t_first_excited == 1.0);

  Mat2d A;
  A << 2.0, 1.0, 1.0, 2.0;
  CHECK(min_eigenvalue_sym2(A) == doctest::Approx(1.0).epsilon(1e-15));

  // One joint moving gives rank-deficient data until the other one moves too.
  const auto single = constant_rate_stack(Vec2d(0.0, 0.5), 0.01, 1.0);
  CHECK(excitation(single, 1e-4).lambda_min < 1e-4);
}

TEST_CASE("stack misuse") {
  CHECK_THROWS_AS(IclStack(0, 0.2), ConfigError);
  CHECK_THROWS_AS(IclStack(25, 0.0), ConfigError);
  IclStack s(25, 0.2);
  s.push_sample(1.0, Vec2d::Zero(), Mat2d::Zero());
  CHECK_THROWS_AS(s.push_sample(0.5, Vec2d::Zero(), Mat2d::Zero()), OrderingError);
}

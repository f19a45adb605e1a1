#include <doctest.h>

#include <cmath>
#include <cstring>

#include <Eigen/SVD>

#include "tsync/simulator.hpp"

using namespace tsync;

namespace {

Vec7d frictionless(const RobotParams& rp) {
  Vec7d z = true_dynamic_params(rp);
  z(5) = z(6) = 0.0;
  return z;
}

double kinetic_energy(const JointState<double>& js, const Vec7d& zy) {
  return 0.5 * js.theta_dot.dot(dynamics_eval(js, zy).M * js.theta_dot);
}

JointState<double> integrate(JointState<double> js, const Vec2d& tau, const Vec7d& zy, double dt, int substeps,
                             double t_end, double gravity) {
  const long n = std::lround(t_end / dt);
  for (long k = 0; k < n; ++k) js = integrate_plant(js, tau, zy, dt, substeps, gravity);
  return js;
}

bool same_record(const LogRecord& a, const LogRecord& b) {
  auto eq = [](const auto& x, const auto& y) { return std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0; };
  return a.t == b.t && eq(a.theta, b.theta) && eq(a.theta_dot, b.theta_dot) && eq(a.tau, b.tau) &&
         eq(a.zeta_j_hat, b.zeta_j_hat) && eq(a.zeta_y_hat, b.zeta_y_hat) && eq(a.e_p, b.e_p) &&
         a.lambda_min == b.lambda_min;
}

}  // namespace

TEST_CASE("plant integrator") {
  const RobotParams rp;
  const Vec7d zy = frictionless(rp);

  SUBCASE("unforced arm at rest without gravity stays put") {
    JointState<double> js;
    js.theta = {0.3, 1.1};
    const auto end = integrate(js, Vec2d::Zero(), zy, 0.01, 4, 1.0, 0.0);
    CHECK(end.theta == js.theta);
    CHECK(end.theta_dot.isZero(0.0));
    CHECK(end.t == doctest::Approx(1.0));
  }

  SUBCASE("kinetic energy is conserved without friction, gravity or torque") {
    JointState<double> js;
    js.theta = {0.3, 1.1};
    js.theta_dot = {1.0, -0.5};
    const double e0 = kinetic_energy(js, zy);
    const auto end = integrate(js, Vec2d::Zero(), zy, 0.01, 4, 50.0, 0.0);
    CHECK(std::abs(kinetic_energy(end, zy) - e0) / e0 < 1e-6);
  }

  SUBCASE("fourth order under step halving") {
    JointState<double> js;
    js.theta = {0.2, 0.9};
    js.theta_dot = {0.5, -0.3};
    const Vec2d tau{1.0, 0.5};
    const Vec7d z = true_dynamic_params(rp);
    auto theta_at = [&](int substeps) { return integrate(js, tau, z, 0.05, substeps, 1.0, rp.g).theta; };
    const Vec2d a = theta_at(1), b = theta_at(2), c = theta_at(4);
    const double slope = std::log2((a - b).norm() / (b - c).norm());
    CHECK(slope == doctest::Approx(4.0).epsilon(0.075));
  }
}

TEST_CASE("initial state") {
  SimConfig cfg;
  cfg.duration = 0.01;
  const auto res = run(cfg);
  REQUIRE(res.log.size() == 1);
  CHECK((res.log[0].e_p - Vec2d(-0.03, 0.02)).norm() < 1e-12);
  CHECK((res.log[0].e_pT - Vec2d(-0.03, 0.02)).norm() < 1e-12);
  CHECK((res.log[0].p - Vec2d(0.78, 0.23)).norm() < 1e-12);

  SimConfig unreachable;
  unreachable.p0 = {0.1, 0.1};  // inside the hole of the reachable annulus
  CHECK_THROWS_AS(Simulator{unreachable}, WorkspaceError);
  unreachable.p0 = {3.0, 0.0};  // beyond the robot bounds, caught by validation
  CHECK_THROWS_AS(Simulator{unreachable}, ConfigError);

  SimConfig on_target;
  on_target.p0 = CircleTrajectory{}.eval(0.0).p;
  on_target.duration = 0.01;
  CHECK(run(on_target).log[0].e_p.norm() < 1e-12);

  SimConfig outside;
  outside.p0 = {0.3, 0.6};  // 0.45 m from the human along x, bound is 0.4
  try {
    Simulator sim(outside);
    FAIL("expected the start to be rejected");
  } catch (const BarrierViolation& bv) {
    CHECK(bv.axis == 0);
  }
}

TEST_CASE("empty run reports the initial estimates") {
  SimConfig cfg;
  cfg.duration = 0.0;
  const auto res = run(cfg);
  CHECK(res.log.empty());
  CHECK(res.summary.status == RunStatus::completed);
  CHECK(res.summary.steps == 0);
  CHECK(res.summary.zeta_j_final == cfg.zeta_j0);
  CHECK(res.summary.zeta_y_final == cfg.zeta_y0);
}

TEST_CASE("reference run") {
  const SimConfig cfg;
  const auto res = run(cfg);
  REQUIRE(res.summary.status == RunStatus::completed);
  CHECK(res.log.size() == 5000);
  CHECK(res.log.back().t == doctest::Approx(49.99));

  double zy_norm_max = 0.0;
  for (const auto& r : res.log) {
    REQUIRE(r.tau.allFinite());
    CHECK(std::abs(r.e_p(0)) < cfg.bounds.k_m(0));
    CHECK(std::abs(r.e_p(1)) < cfg.bounds.k_m(1));
    zy_norm_max = std::max(zy_norm_max, r.zeta_y_hat.norm());
  }
  CHECK(zy_norm_max < 10.0);
  CHECK(res.summary.t_first_excited.has_value());

  SUBCASE("same inputs, same outputs") {
    const auto again = run(cfg);
    REQUIRE(again.log.size() == res.log.size());
    bool identical = true;
    for (std::size_t k = 0; k < res.log.size(); ++k) identical = identical && same_record(res.log[k], again.log[k]);
    CHECK(identical);
  }

  SUBCASE("current and delayed auxiliary errors differ by no more than the delay mismatch allows") {
    // |eta - eta_T| <= 2 ||J^-1|| (|p_h_dot - p_hT_dot| + k1 |phi e_p - phi_T e_pT|)
    const CircleTrajectory human = cfg.trajectory;
    double worst = 0.0;
    for (const auto& r : res.log) {
      const auto ji = regularized_inverse(jacobian(r.theta, r.zeta_j_hat), cfg.controller.inverse);
      const double inv_norm = Eigen::JacobiSVD<Mat2d>(ji.inv).singularValues()(0);
      const Vec2d pdT = human.eval(std::max(r.t - cfg.gains.T, 0.0)).p_dot;
      const Vec2d phi = barrier_weights(r.e_p, cfg.bounds), phiT = barrier_weights(r.e_pT, cfg.bounds);
      const double bound =
          2 * inv_norm * ((r.p_h_dot - pdT).norm() + cfg.gains.k_1 * (phi.cwiseProduct(r.e_p) - phiT.cwiseProduct(r.e_pT)).norm());
      worst = std::max(worst, (r.eta - r.eta_T).norm() - bound);
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("zero-delay variant") {
  SimConfig cfg;
  cfg.gains.T = 0.0;
  const auto res = run(cfg);
  CHECK(res.summary.status == RunStatus::completed);
  for (const auto& r : res.log) REQUIRE((r.e_p - r.e_pT).norm() == 0.0);
  const auto delayed = run(SimConfig{});
  MESSAGE("terminal |e_pT|: no delay " << res.summary.final_norm_e_pT << ", delayed "
                                      << delayed.summary.final_norm_e_pT);
}

TEST_CASE("a controller with no authority lets the error leave the safe set") {
  SimConfig cfg;
  cfg.gains.k_1 = 0.0;
  cfg.gains.k_r = 0.0;
  cfg.gains.k_phi = 0.0;
  cfg.zeta_y0.setZero();
  const auto res = run(cfg);
  CHECK(res.summary.status == RunStatus::barrier_violation);
  CHECK(res.summary.violation_axis >= 0);
  CHECK(res.log.size() < 5000);
  CHECK_FALSE(res.summary.message.empty());
}

TEST_CASE("stepping by hand matches run()") {
  SimConfig cfg;
  cfg.duration = 1.0;
  const auto ref = run(cfg);
  Simulator sim(cfg);
  for (std::size_t k = 0; k < ref.log.size(); ++k) {
    const auto st = sim.step();
    REQUIRE(st.record.has_value());
    REQUIRE(same_record(*st.record, ref.log[k]));
  }
  CHECK(sim.time() == doctest::Approx(1.0));
  CHECK(sim.state().step_index == 100);
}

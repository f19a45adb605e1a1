#include "tsync/diagnostics.hpp"

#include <algorithm>
#include <string>

namespace tsync {

void DiagnosticsConfig::validate(double delay) const {
  for (int i = 0; i < 3; ++i) {
    if (!(K_LK(i) > 0)) throw ConfigError("diagnostics.k_lk: entry " + std::to_string(i + 1) + " must be positive");
    if (!(omega(i) > delay))
      throw ConfigError("diagnostics.omega: entry " + std::to_string(i + 1) + " must exceed the delay T");
  }
  if (!(lambda_threshold >= 0)) throw ConfigError("diagnostics.lambda_threshold must be non-negative");
  if (!(safe_beta1 > 0)) throw ConfigError("diagnostics.safe_beta1 must be positive");
}

LkValues lk_functionals(std::span<const LkSample> history, double delay, const DiagnosticsConfig& dc) {
  LkValues out;
  if (history.size() < 2 || delay <= 0) return out;

  const double t_now = history.back().t;
  const double t_lo = std::max(t_now - delay, history.front().t);
  // eps admits grid points that land a rounding error below t - T
  const double eps = 1e-9 * std::max(1.0, delay);
  auto first = std::find_if(history.begin(), history.end(), [&](const LkSample& s) { return s.t >= t_lo - eps; });
  const auto window = std::span<const LkSample>(first, history.end());
  const std::size_t n = window.size();
  if (n < 2) return out;

  // Inner integral I(s_k) = int_{s_k}^{t} f, accumulated backward, then the
  // outer trapezoid over s.
  auto nested = [&](auto f) {
    double inner = 0.0;
    double outer = 0.0;
    double prev_inner = 0.0;
    for (std::size_t k = n - 1; k-- > 0;) {
      const double h = window[k + 1].t - window[k].t;
      inner += 0.5 * h * (f(window[k]) + f(window[k + 1]));
      outer += 0.5 * h * (prev_inner + inner);
      prev_inner = inner;
    }
    return outer;
  };

  out.P1 = 0.5 * dc.K_LK(0) * dc.omega(0) * nested([](const LkSample& s) { return s.p_h_ddot_sq; });
  out.P2 = 0.5 * dc.K_LK(1) * dc.omega(1) * nested([](const LkSample& s) { return s.phi_e_rate_sq; });
  out.P3 = 0.5 * dc.K_LK(2) * dc.omega(2) * nested([](const LkSample& s) { return s.p_h_dot_sq; });
  return out;
}

SafeRadius safe_radius_from_exponent(double rho, const BarrierBounds& bb) {
  const double arg = 1.0 - std::exp(-rho);
  if (!(arg >= 0.0)) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {Vec2d(nan, nan), rho, false};
  }
  return {bb.k_m * std::sqrt(arg), rho, true};
}

SafeRadius safe_radius(double V0, double epsilon1, double beta1, double t, const BarrierBounds& bb) {
  const double decay = std::exp(-beta1 * t);
  const double rho = -2.0 * (V0 * decay + (epsilon1 / beta1) * (1.0 - decay));
  return safe_radius_from_exponent(rho, bb);
}

}  // namespace tsync

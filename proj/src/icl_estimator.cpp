#include "tsync/icl_estimator.hpp"

#include <algorithm>
#include <cmath>

namespace tsync {

double min_eigenvalue_sym2(const Mat2d& A) {
  const double mean = 0.5 * (A(0, 0) + A(1, 1));
  const double half_diff = 0.5 * (A(0, 0) - A(1, 1));
  const double off = 0.5 * (A(0, 1) + A(1, 0));
  return mean - std::hypot(half_diff, off);
}

IclStack::IclStack(int capacity, double window_length) : capacity_(capacity), window_length_(window_length) {
  if (capacity < 1) throw ConfigError("ICL stack capacity must be at least 1");
  if (!(window_length > 0)) throw ConfigError("ICL window length must be positive");
}

void IclStack::push_sample(double t, const Vec2d& p, const Mat2d& W_j) {
  if (!started_) {
    started_ = true;
    t_last_ = t_start_ = t;
    p_start_ = p;
    W_last_ = W_j;
    Y_acc_.setZero();
    return;
  }
  if (t < t_last_) throw OrderingError("IclStack::push_sample: time went backwards");

  Y_acc_ += 0.5 * (t - t_last_) * (W_last_ + W_j);
  t_last_ = t;
  W_last_ = W_j;

  // Relative tolerance absorbs accumulated rounding in t.
  if (t - t_start_ < window_length_ * (1.0 - 1e-9)) return;

  IclWindow w{p - p_start_, Y_acc_, t_start_, t};
  windows_.push_back(w);
  while (static_cast<int>(windows_.size()) > capacity_) windows_.pop_front();
  recompute_sums();
  ++finalized_total_;
  lambda_history_.emplace_back(t, std::max(0.0, min_eigenvalue_sym2(info_)));

  t_start_ = t;
  p_start_ = p;
  Y_acc_.setZero();
}

void IclStack::recompute_sums() {
  // Recomputed rather than updated incrementally so eviction never leaves
  // cancellation residue behind.
  info_.setZero();
  cross_.setZero();
  for (const auto& w : windows_) {
    info_ += w.Y.transpose() * w.Y;
    cross_ += w.Y.transpose() * w.U;
  }
}

Vec2d icl_correction(const IclStack& stack, const Vec2d& zeta_j_hat) {
  return stack.cross_term() - stack.information() * zeta_j_hat;
}

Vec2d zeta_j_derivative(const IclStack& stack, const Mat2d& W_j, const Vec2d& phi_T, const Vec2d& e_pT,
                        const Vec2d& zeta_j_hat, const Gains& g) {
  return -g.Gamma1 * W_j.transpose() * phi_T.cwiseProduct(e_pT) +
         g.k_icl * g.Gamma1 * icl_correction(stack, zeta_j_hat);
}

ExcitationReport excitation(const IclStack& stack, double lambda_threshold) {
  ExcitationReport r;
  r.window_count = stack.window_count();
  r.lambda_min = stack.window_count() == 0 ? 0.0 : std::max(0.0, min_eigenvalue_sym2(stack.information()));
  for (const auto& [t, lam] : stack.lambda_history()) {
    if (lam >= lambda_threshold) {
      r.t_first_excited = t;
      break;
    }
  }
  return r;
}

}  // namespace tsync

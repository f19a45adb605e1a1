#pragma once

// Integral concurrent learning for the kinematic parameters.
//
// Each finalized window stores U = p(t_end) - p(t_start) and
// Y = int W_j dt over the same interval, so that U = Y zeta_j for the true
// link lengths. Windows are consecutive, non-overlapping and FIFO-evicted
// beyond N.

#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

#include "tsync/controller.hpp"
#include "tsync/types.hpp"

namespace tsync {

struct IclWindow {
  Vec2d U = Vec2d::Zero();
  Mat2d Y = Mat2d::Zero();
  double t_start = 0.0;
  double t_end = 0.0;
};

struct ExcitationReport {
  double lambda_min = 0.0;
  std::size_t window_count = 0;
  std::optional<double> t_first_excited;
};

/// Smallest eigenvalue of a symmetric 2x2 matrix, closed form.
double min_eigenvalue_sym2(const Mat2d& A);

class IclStack {
 public:
  IclStack(int capacity, double window_length);

  /// Adds one sample of the measured position and regressor. Finalizes a
  /// window once window_length has elapsed since the window start.
  void push_sample(double t, const Vec2d& p, const Mat2d& W_j);

  const std::deque<IclWindow>& windows() const { return windows_; }
  std::size_t window_count() const { return windows_.size(); }
  int capacity() const { return capacity_; }
  double window_length() const { return window_length_; }

  /// Sum of Y_i^T Y_i over stored windows.
  const Mat2d& information() const { return info_; }
  /// Sum of Y_i^T U_i over stored windows.
  const Vec2d& cross_term() const { return cross_; }

  /// (t_end, lambda_min) recorded each time a window is finalized.
  const std::vector<std::pair<double, double>>& lambda_history() const { return lambda_history_; }

  /// Total windows finalized since construction, including evicted ones.
  std::size_t finalized_total() const { return finalized_total_; }

 private:
  void recompute_sums();

  int capacity_;
  double window_length_;
  std::deque<IclWindow> windows_;
  Mat2d info_ = Mat2d::Zero();
  Vec2d cross_ = Vec2d::Zero();

  bool started_ = false;
  double t_last_ = 0.0;
  double t_start_ = 0.0;
  Vec2d p_start_ = Vec2d::Zero();
  Mat2d W_last_ = Mat2d::Zero();
  Mat2d Y_acc_ = Mat2d::Zero();

  std::vector<std::pair<double, double>> lambda_history_;
  std::size_t finalized_total_ = 0;
};

/// sum_i Y_i^T (U_i - Y_i zeta_j_hat).
Vec2d icl_correction(const IclStack& stack, const Vec2d& zeta_j_hat);

/// -Gamma1 W_j^T phi_T e_pT + k Gamma1 icl_correction(stack, zeta_j_hat).
Vec2d zeta_j_derivative(const IclStack& stack, const Mat2d& W_j, const Vec2d& phi_T, const Vec2d& e_pT,
                        const Vec2d& zeta_j_hat, const Gains& g);

ExcitationReport excitation(const IclStack& stack, double lambda_threshold);

}  // namespace tsync

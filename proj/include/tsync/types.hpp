#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tsync {

template <typename Scalar> using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar> using Vec7 = Eigen::Matrix<Scalar, 7, 1>;
template <typename Scalar> using Mat7 = Eigen::Matrix<Scalar, 7, 7>;
template <typename Scalar> using Mat27 = Eigen::Matrix<Scalar, 2, 7>;

using Vec2d = Vec2<double>;
using Mat2d = Mat2<double>;
using Vec7d = Vec7<double>;
using Mat7d = Mat7<double>;
using Mat27d = Mat27<double>;

// Error taxonomy. Everything derives from std::runtime_error so callers that
// don't care can catch one type.
struct WorkspaceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BarrierViolation : std::runtime_error {
  BarrierViolation(const std::string& what, int axis_index)
      : std::runtime_error(what), axis(axis_index) {}
  int axis;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyBufferError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OrderingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tsync

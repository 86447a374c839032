#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ssgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Input has the wrong shape for the operation (vector length, tensor order).
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Projection onto the feasible set is not unique (a sphere block is ~0).
class DegenerateProjection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Constraint gradients are (numerically) linearly dependent at the point.
class RlicqFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An evaluation produced NaN or Inf.
class NonFiniteValue : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw DimensionMismatch(std::string(what) + ": expected dimension " +
                            std::to_string(want) + ", got " +
                            std::to_string(got));
  }
}

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
template <typename A, typename B>
double relative_error(const A& a, const B& b) {
  const double scale = std::max(a.norm(), b.norm());
  if (scale == 0.0) return 0.0;
  return (a - b).norm() / scale;
}

}  // namespace ssgd

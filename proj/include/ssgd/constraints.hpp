#pragma once

#include "ssgd/common.hpp"

namespace ssgd {

inline constexpr double kFeasibilityTolerance = 1e-10;

/// Equality constraints c_i(w) = 0, i = 1..m, on R^n.
class ConstraintSet {
 public:
  virtual ~ConstraintSet() = default;

  virtual int ambient_dim() const = 0;
  virtual int count() const = 0;
  virtual double value(int i, const Vector& w) const = 0;
  virtual Vector gradient(int i, const Vector& w) const = 0;
  virtual Matrix hessian(int i, const Vector& w) const = 0;
  /// Closest feasible point. Throws DegenerateProjection when not unique.
  virtual Vector project(const Vector& v) const = 0;

  /// C(w) = (∇c_1(w), ..., ∇c_m(w)), an n x m matrix.
  virtual Matrix jacobian(const Vector& w) const;
  virtual bool is_sphere_product() const { return false; }

  bool is_feasible(const Vector& w, double tol = kFeasibilityTolerance) const;
};

/// Product of `blocks` unit spheres in R^{block_dim}: c_i(w) = ‖w_i‖² − 1,
/// where w_i is the i-th contiguous block of w.
class SphereProduct final : public ConstraintSet {
 public:
  /// Blocks with norm below this make the projection non-unique.
  static constexpr double kMinBlockNorm = 1e-12;

  SphereProduct(int blocks, int block_dim);

  int blocks() const { return blocks_; }
  int block_dim() const { return block_dim_; }

  int ambient_dim() const override { return blocks_ * block_dim_; }
  int count() const override { return blocks_; }
  double value(int i, const Vector& w) const override;
  Vector gradient(int i, const Vector& w) const override;
  Matrix hessian(int i, const Vector& w) const override;
  Vector project(const Vector& v) const override;
  Matrix jacobian(const Vector& w) const override;
  bool is_sphere_product() const override { return true; }

  auto block(const Vector& w, int i) const { return w.segment(i * block_dim_, block_dim_); }

 private:
  int blocks_;
  int block_dim_;
};

}  // namespace ssgd

#include "ssgd/constraints.hpp"

#include <cmath>

namespace ssgd {

Matrix ConstraintSet::jacobian(const Vector& w) const {
  Matrix c(ambient_dim(), count());
  for (int i = 0; i < count(); ++i) c.col(i) = gradient(i, w);
  return c;
}

bool ConstraintSet::is_feasible(const Vector& w, double tol) const {
  if (w.size() != ambient_dim()) return false;
  for (int i = 0; i < count(); ++i) {
    if (!(std::abs(value(i, w)) <= tol)) return false;
  }
  return true;
}

SphereProduct::SphereProduct(int blocks, int block_dim) : blocks_(blocks), block_dim_(block_dim) {
  if (blocks < 1 || block_dim < 1) {
    throw std::invalid_argument("SphereProduct: blocks and block_dim must be positive");
  }
}

double SphereProduct::value(int i, const Vector& w) const {
  require_dim(w.size(), ambient_dim(), "SphereProduct::value");
  return block(w, i).squaredNorm() - 1.0;
}

Vector SphereProduct::gradient(int i, const Vector& w) const {
  require_dim(w.size(), ambient_dim(), "SphereProduct::gradient");
  Vector g = Vector::Zero(ambient_dim());
  g.segment(i * block_dim_, block_dim_) = 2.0 * block(w, i);
  return g;
}

Matrix SphereProduct::hessian(int i, const Vector& w) const {
  require_dim(w.size(), ambient_dim(), "SphereProduct::hessian");
  Matrix h = Matrix::Zero(ambient_dim(), ambient_dim());
  h.block(i * block_dim_, i * block_dim_, block_dim_, block_dim_).diagonal().setConstant(2.0);
  return h;
}

Vector SphereProduct::project(const Vector& v) const {
  require_dim(v.size(), ambient_dim(), "SphereProduct::project");
  Vector out(v.size());
  for (int i = 0; i < blocks_; ++i) {
    const double n = block(v, i).norm();
    if (!std::isfinite(n)) throw NonFiniteValue("SphereProduct::project: non-finite block");
    if (n < kMinBlockNorm) {
      throw DegenerateProjection("SphereProduct::project: block " + std::to_string(i) +
                                 " has norm below 1e-12, projection is not unique");
    }
    out.segment(i * block_dim_, block_dim_) = block(v, i) / n;
  }
  return out;
}

Matrix SphereProduct::jacobian(const Vector& w) const {
  require_dim(w.size(), ambient_dim(), "SphereProduct::jacobian");
  Matrix c = Matrix::Zero(ambient_dim(), blocks_);
  for (int i = 0; i < blocks_; ++i) {
    c.block(i * block_dim_, i, block_dim_, 1) = 2.0 * block(w, i);
  }
  return c;
}

}  // namespace ssgd

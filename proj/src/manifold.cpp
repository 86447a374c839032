#include "ssgd/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ssgd {

namespace {

const ConstraintSet& require_constraints(const ConstrainedProblem& problem) {
  if (!problem.constraints) throw std::invalid_argument("problem has no constraints");
  return *problem.constraints;
}

void require_rlicq(const ConstraintSet& constraints, const Vector& w, const char* what) {
  const double s = rlicq_sigma_min(constraints, w);
  if (!(s >= kRlicqFloor)) {
    throw RlicqFailure(std::string(what) + ": constraint gradients are linearly dependent (σ_min = " +
                       std::to_string(s) + ")");
  }
}

Vector multipliers_for(const ConstraintSet& constraints, const Vector& w, const Vector& grad) {
  require_dim(w.size(), constraints.ambient_dim(), "lagrange_multipliers");
  require_dim(grad.size(), constraints.ambient_dim(), "lagrange_multipliers gradient");
  require_rlicq(constraints, w, "lagrange_multipliers");
  const Matrix c = constraints.jacobian(w);
  // CᵀC is well conditioned once RLICQ holds; solve the normal equations.
  return (c.transpose() * c).ldlt().solve(c.transpose() * grad);
}

}  // namespace

void SaddleParams::validate() const {
  for (double v : {alpha, gamma, epsilon, delta}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("SaddleParams: all thresholds must be positive and finite");
    }
  }
}

Vector lagrange_multipliers(const ConstrainedProblem& problem, const Vector& w) {
  return multipliers_for(require_constraints(problem), w, problem.objective->gradient(w));
}

Vector chi(const ConstraintSet& constraints, const Vector& w, const Vector& grad) {
  const Vector lambda = multipliers_for(constraints, w, grad);
  return grad - constraints.jacobian(w) * lambda;
}

Vector chi(const ConstrainedProblem& problem, const Vector& w) {
  return chi(require_constraints(problem), w, problem.objective->gradient(w));
}

Matrix lagrangian_hessian(const ConstrainedProblem& problem, const Vector& w,
                          const Vector& lambda) {
  const ConstraintSet& cs = require_constraints(problem);
  require_dim(lambda.size(), cs.count(), "lagrangian_hessian multipliers");
  Matrix m = problem.objective->hessian(w);
  if (const auto* sp = dynamic_cast<const SphereProduct*>(&cs)) {
    // ∇²c_i = 2I on block i
    const int b = sp->block_dim();
    for (int i = 0; i < sp->blocks(); ++i) {
      m.diagonal().segment(i * b, b).array() -= 2.0 * lambda(i);
    }
  } else {
    for (int i = 0; i < cs.count(); ++i) m -= lambda(i) * cs.hessian(i, w);
  }
  return 0.5 * (m + m.transpose());
}

Matrix lagrangian_hessian(const ConstrainedProblem& problem, const Vector& w) {
  return lagrangian_hessian(problem, w, lagrange_multipliers(problem, w));
}

TangentFrame tangent_frame(const ConstraintSet& constraints, const Vector& w) {
  require_dim(w.size(), constraints.ambient_dim(), "tangent_frame");
  require_rlicq(constraints, w, "tangent_frame");
  const Matrix c = constraints.jacobian(w);
  const Eigen::Index n = c.rows();
  const Eigen::Index m = c.cols();
  Eigen::HouseholderQR<Matrix> qr(c);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);

  TangentFrame f;
  f.point = w;
  f.normal = q.leftCols(m);
  f.tangent = q.rightCols(n - m);
  f.p_tangent = f.tangent * f.tangent.transpose();
  f.p_normal = f.normal * f.normal.transpose();
  return f;
}

Vector tangent_spectrum(const Matrix& lagrangian_hessian, const TangentFrame& frame) {
  require_dim(lagrangian_hessian.rows(), frame.tangent.rows(), "tangent_spectrum");
  if (frame.tangent.cols() == 0) return Vector(0);
  const Matrix reduced = frame.tangent.transpose() * lagrangian_hessian * frame.tangent;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (reduced + reduced.transpose()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

TangentEig min_tangent_eig(const Matrix& lagrangian_hessian, const TangentFrame& frame) {
  require_dim(lagrangian_hessian.rows(), frame.tangent.rows(), "min_tangent_eig");
  if (frame.tangent.cols() == 0) {
    throw std::invalid_argument("min_tangent_eig: tangent space is zero-dimensional");
  }
  const Matrix reduced = frame.tangent.transpose() * lagrangian_hessian * frame.tangent;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (reduced + reduced.transpose()));
  TangentEig out;
  out.value = es.eigenvalues()(0);
  out.direction = frame.tangent * es.eigenvectors().col(0);
  out.direction.normalize();
  return out;
}

TangentEig min_tangent_eig(const ConstrainedProblem& problem, const Vector& w) {
  return min_tangent_eig(lagrangian_hessian(problem, w),
                         tangent_frame(require_constraints(problem), w));
}

double rlicq_sigma_min(const ConstraintSet& constraints, const Vector& w) {
  if (const auto* sp = dynamic_cast<const SphereProduct*>(&constraints)) {
    require_dim(w.size(), sp->ambient_dim(), "rlicq_sigma_min");
    // C has one nonzero block 2w_i per column, so CᵀC = diag(4‖w_i‖²).
    double smallest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < sp->blocks(); ++i) smallest = std::min(smallest, sp->block(w, i).norm());
    return 2.0 * smallest;
  }
  return rlicq_sigma_min_svd(constraints, w);
}

double rlicq_sigma_min_svd(const ConstraintSet& constraints, const Vector& w) {
  const Matrix c = constraints.jacobian(w);
  if (c.cols() == 0) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Matrix> svd(c);
  const Vector s = svd.singularValues();
  // Fewer singular values than constraints means C has more columns than rows.
  if (s.size() < c.cols()) return 0.0;
  return s(s.size() - 1);
}

namespace closed_form {

double maxeig_lambda(const Vector& x) { return -2.0 * x.array().square().square().sum(); }

Vector maxeig_chi(const Vector& x) {
  const double q = x.array().square().square().sum();
  return -4.0 * ((x.array().square() - q) * x.array()).matrix();
}

Matrix maxeig_lagrangian_hessian(const Vector& x) {
  const double q = x.array().square().square().sum();
  Matrix m = 4.0 * q * Matrix::Identity(x.size(), x.size());
  m.diagonal() -= 12.0 * x.array().square().matrix();
  return m;
}

Vector correlation_lambda(const Matrix& u_rows) {
  const Eigen::ArrayXXd sq = u_rows.array().square();
  const Eigen::ArrayXd total = sq.colwise().sum().transpose();
  // Σ_{j≠i} Σ_k U_jk² U_ik²
  Vector out(u_rows.rows());
  for (Eigen::Index i = 0; i < u_rows.rows(); ++i) {
    out(i) = (sq.row(i).transpose() * (total - sq.row(i).transpose())).sum();
  }
  return out;
}

Matrix correlation_psi(const Matrix& u_rows) {
  const Eigen::ArrayXXd sq = u_rows.array().square();
  const Vector lambda = correlation_lambda(u_rows);
  Eigen::ArrayXXd psi = (-sq).rowwise() + sq.colwise().sum();
  psi.colwise() -= lambda.array();
  return psi.matrix();
}

Vector correlation_chi(const Matrix& u_rows) {
  const Matrix c = 2.0 * (u_rows.array() * correlation_psi(u_rows).array()).matrix();
  Vector out(c.size());
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index k = 0; k < c.cols(); ++k) out(i * c.cols() + k) = c(i, k);
  return out;
}

Matrix correlation_lagrangian_hessian(const Matrix& u_rows) {
  const Eigen::Index d = u_rows.rows();
  const Eigen::Index n = u_rows.cols();
  const Matrix psi = correlation_psi(u_rows);
  Matrix m = Matrix::Zero(d * n, d * n);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index ip = 0; ip < d; ++ip)
      for (Eigen::Index k = 0; k < n; ++k) {
        m(i * n + k, ip * n + k) = i == ip ? 2.0 * psi(i, k) : 4.0 * u_rows(ip, k) * u_rows(i, k);
      }
  return m;
}

}  // namespace closed_form

}  // namespace ssgd

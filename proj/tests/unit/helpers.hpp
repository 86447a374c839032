#pragma once

#include "ssgd/rng.hpp"
#include "ssgd/tensor4.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <vector>

namespace testing_helpers {

using ssgd::Matrix;
using ssgd::Vector;

inline Matrix random_orthonormal(int d, ssgd::Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(rng.gaussian(d, d));
  return qr.householderQ() * Matrix::Identity(d, d);
}

inline std::shared_ptr<const ssgd::Tensor4> tensor_from(const Matrix& a) {
  return std::make_shared<const ssgd::Tensor4>(ssgd::make_orthogonal_tensor(ssgd::OrthoBasis(a)));
}

inline Vector unit(int n, int i) { return Vector::Unit(n, i); }

inline Vector flatten_rows(const Matrix& u) {
  Vector w(u.size());
  for (Eigen::Index i = 0; i < u.rows(); ++i) w.segment(i * u.cols(), u.cols()) = u.row(i).transpose();
  return w;
}

inline Matrix unflatten(const Vector& w, int d) {
  Matrix u(d, d);
  for (int i = 0; i < d; ++i) u.row(i) = w.segment(i * d, d).transpose();
  return u;
}

// Brute-force Σ_{ijkl} T_ijkl u_i v_j w_k z_l straight from the entries.
inline double brute_form(const ssgd::Tensor4& t, const Vector& u, const Vector& v, const Vector& w,
                         const Vector& z) {
  const int d = t.dim();
  double s = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) s += t(i, j, k, l) * u(i) * v(j) * w(k) * z(l);
  return s;
}

inline Vector central_diff(const std::function<double(const Vector&)>& f, const Vector& w, double h = 1e-6) {
  Vector g(w.size());
  Vector p = w;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    p(i) = w(i) + h;
    const double fp = f(p);
    p(i) = w(i) - h;
    const double fm = f(p);
    p(i) = w(i);
    g(i) = (fp - fm) / (2 * h);
  }
  return g;
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  const double s = std::max(a.norm(), b.norm());
  return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

}  // namespace testing_helpers

#pragma once

#include "ssgd/common.hpp"
#include "ssgd/rng.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace ssgd {

inline constexpr double kOrthonormalTolerance = 1e-10;

/// d orthonormal vectors a_1..a_d, stored as the columns of a d x d matrix.
class OrthoBasis {
 public:
  /// Validates orthonormality to `tol` (max-entry deviation of AᵀA from I).
  explicit OrthoBasis(Matrix columns, double tol = kOrthonormalTolerance);

  static OrthoBasis identity(int d);
  /// QR of a Gaussian matrix with R's diagonal made positive (Haar measure).
  static OrthoBasis random(int d, Rng& rng);

  int dim() const { return static_cast<int>(columns_.cols()); }
  const Matrix& matrix() const { return columns_; }
  Vector vector(int i) const { return columns_.col(i); }

 private:
  Matrix columns_;
};

/// Dense 4th-order tensor with d⁴ entries, row-major in (i1,i2,i3,i4).
///
/// A tensor made by make_orthogonal_tensor remembers its basis; the
/// multilinear forms below then contract in O(d) per component instead of
/// touching all d⁴ entries. The dense:: functions always use the entries.
class Tensor4 {
 public:
  Tensor4(int d, std::vector<double> entries);

  int dim() const { return d_; }
  double operator()(int i, int j, int k, int l) const {
    return entries_[((static_cast<std::size_t>(i) * d_ + j) * d_ + k) * d_ + l];
  }
  const std::vector<double>& entries() const { return entries_; }
  const std::optional<OrthoBasis>& basis() const { return basis_; }

  double frobenius_norm_squared() const;
  /// Max deviation over all 24 index permutations of every entry.
  double max_asymmetry() const;

 private:
  friend Tensor4 make_orthogonal_tensor(const OrthoBasis&);

  int d_;
  std::vector<double> entries_;
  std::optional<OrthoBasis> basis_;
};

/// T = Σ_i a_i^{⊗4}.
Tensor4 make_orthogonal_tensor(const OrthoBasis& basis);

/// T(u, v, w, z) = Σ T_{j1 j2 j3 j4} u_{j1} v_{j2} w_{j3} z_{j4}.
double form_scalar(const Tensor4& t, const Vector& u, const Vector& v,
                   const Vector& w, const Vector& z);
/// T(I, u, u, u).
Vector form_vector(const Tensor4& t, const Vector& u);
/// T(I, u, v, w).
Vector form_vector(const Tensor4& t, const Vector& u, const Vector& v,
                   const Vector& w);
/// T(I, I, u, u).
Matrix form_matrix(const Tensor4& t, const Vector& u);
/// T(I, I, u, v).
Matrix form_matrix(const Tensor4& t, const Vector& u, const Vector& v);

namespace dense {
double form_scalar(const Tensor4& t, const Vector& u, const Vector& v,
                   const Vector& w, const Vector& z);
Vector form_vector(const Tensor4& t, const Vector& u, const Vector& v,
                   const Vector& w);
Matrix form_matrix(const Tensor4& t, const Vector& u, const Vector& v);
}  // namespace dense

/// d x d matrix whose rows u^{(1)}..u^{(d)} are the candidate components.
/// The flat view is the d²-vector with U_{ij} = u^{(i)}_j (row-major).
class ComponentMatrix {
 public:
  explicit ComponentMatrix(Matrix rows);
  static ComponentMatrix from_flat(int d, const Vector& flat);
  /// Rows drawn uniformly from the unit sphere.
  static ComponentMatrix random_feasible(int d, Rng& rng);

  int dim() const { return static_cast<int>(rows_.rows()); }
  const Matrix& rows() const { return rows_; }
  Vector row(int i) const { return rows_.row(i).transpose(); }
  Vector flat() const;
  bool is_feasible(double tol = 1e-10) const;

 private:
  Matrix rows_;
};

/// ‖T − Σ_i u_i^{⊗4}‖_F² / ‖T‖_F².
double reconstruction_error(const Tensor4& t, const ComponentMatrix& u);

namespace dense {
double reconstruction_error(const Tensor4& t, const ComponentMatrix& u);
}

/// Text fixture format: a `d=<n>` header line, then d⁴ reals row-major.
void write_tensor(std::ostream& os, const Tensor4& t);
Tensor4 read_tensor(std::istream& is);

}  // namespace ssgd

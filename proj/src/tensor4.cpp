#include "ssgd/tensor4.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace ssgd {

OrthoBasis::OrthoBasis(Matrix columns, double tol) : columns_(std::move(columns)) {
  if (columns_.rows() != columns_.cols() || columns_.rows() == 0) {
    throw DimensionMismatch("OrthoBasis: expected a nonempty square matrix");
  }
  const Matrix gram = columns_.transpose() * columns_;
  const double dev =
      (gram - Matrix::Identity(columns_.cols(), columns_.cols())).cwiseAbs().maxCoeff();
  if (!(dev <= tol)) {
    throw std::invalid_argument("OrthoBasis: vectors are not orthonormal (deviation " +
                                std::to_string(dev) + ")");
  }
}

OrthoBasis OrthoBasis::identity(int d) { return OrthoBasis(Matrix::Identity(d, d)); }

OrthoBasis OrthoBasis::random(int d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("OrthoBasis::random: d must be positive");
  const Matrix g = rng.gaussian(d, d);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i) {
    if (r(i, i) < 0) q.col(i) *= -1.0;
  }
  return OrthoBasis(std::move(q));
}

Tensor4::Tensor4(int d, std::vector<double> entries) : d_(d), entries_(std::move(entries)) {
  if (d < 1) throw std::invalid_argument("Tensor4: d must be positive");
  const std::size_t n = static_cast<std::size_t>(d) * d * d * d;
  if (entries_.size() != n) {
    throw DimensionMismatch("Tensor4: expected " + std::to_string(n) + " entries, got " +
                            std::to_string(entries_.size()));
  }
}

double Tensor4::frobenius_norm_squared() const {
  double s = 0.0;
  for (double e : entries_) s += e * e;
  return s;
}

double Tensor4::max_asymmetry() const {
  std::array<int, 4> perm{0, 1, 2, 3};
  std::vector<std::array<int, 4>> perms;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  double worst = 0.0;
  std::array<int, 4> idx{};
  for (idx[0] = 0; idx[0] < d_; ++idx[0])
    for (idx[1] = 0; idx[1] < d_; ++idx[1])
      for (idx[2] = 0; idx[2] < d_; ++idx[2])
        for (idx[3] = 0; idx[3] < d_; ++idx[3]) {
          const double base = (*this)(idx[0], idx[1], idx[2], idx[3]);
          for (const auto& p : perms) {
            const double other = (*this)(idx[p[0]], idx[p[1]], idx[p[2]], idx[p[3]]);
            worst = std::max(worst, std::abs(base - other));
          }
        }
  return worst;
}

Tensor4 make_orthogonal_tensor(const OrthoBasis& basis) {
  const int d = basis.dim();
  const Matrix& a = basis.matrix();
  std::vector<double> e(static_cast<std::size_t>(d) * d * d * d, 0.0);
  for (int c = 0; c < d; ++c) {
    std::size_t n = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double aij = a(i, c) * a(j, c);
        for (int k = 0; k < d; ++k) {
          const double aijk = aij * a(k, c);
          for (int l = 0; l < d; ++l) e[n++] += aijk * a(l, c);
        }
      }
  }
  Tensor4 t(d, std::move(e));
  t.basis_ = basis;
  return t;
}

namespace {

void check_vectors(const Tensor4& t, std::initializer_list<const Vector*> vs) {
  for (const Vector* v : vs) require_dim(v->size(), t.dim(), "Tensor4 form");
}

}  // namespace

namespace dense {

double form_scalar(const Tensor4& t, const Vector& u, const Vector& v, const Vector& w,
                   const Vector& z) {
  check_vectors(t, {&u, &v, &w, &z});
  const int d = t.dim();
  double s = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) s += t(i, j, k, l) * u(i) * v(j) * w(k) * z(l);
  return s;
}

Vector form_vector(const Tensor4& t, const Vector& u, const Vector& v, const Vector& w) {
  check_vectors(t, {&u, &v, &w});
  const int d = t.dim();
  Vector out = Vector::Zero(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) out(i) += t(i, j, k, l) * u(j) * v(k) * w(l);
  return out;
}

Matrix form_matrix(const Tensor4& t, const Vector& u, const Vector& v) {
  check_vectors(t, {&u, &v});
  const int d = t.dim();
  Matrix out = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) out(i, j) += t(i, j, k, l) * u(k) * v(l);
  return out;
}

}  // namespace dense

double form_scalar(const Tensor4& t, const Vector& u, const Vector& v, const Vector& w,
                   const Vector& z) {
  if (!t.basis()) return dense::form_scalar(t, u, v, w, z);
  check_vectors(t, {&u, &v, &w, &z});
  const Matrix& a = t.basis()->matrix();
  const Vector pu = a.transpose() * u, pv = a.transpose() * v;
  const Vector pw = a.transpose() * w, pz = a.transpose() * z;
  return (pu.array() * pv.array() * pw.array() * pz.array()).sum();
}

Vector form_vector(const Tensor4& t, const Vector& u, const Vector& v, const Vector& w) {
  if (!t.basis()) return dense::form_vector(t, u, v, w);
  check_vectors(t, {&u, &v, &w});
  const Matrix& a = t.basis()->matrix();
  const Vector coef = ((a.transpose() * u).array() * (a.transpose() * v).array() *
                       (a.transpose() * w).array())
                          .matrix();
  return a * coef;
}

Vector form_vector(const Tensor4& t, const Vector& u) { return form_vector(t, u, u, u); }

Matrix form_matrix(const Tensor4& t, const Vector& u, const Vector& v) {
  if (!t.basis()) return dense::form_matrix(t, u, v);
  check_vectors(t, {&u, &v});
  const Matrix& a = t.basis()->matrix();
  const Vector coef = ((a.transpose() * u).array() * (a.transpose() * v).array()).matrix();
  return a * coef.asDiagonal() * a.transpose();
}

Matrix form_matrix(const Tensor4& t, const Vector& u) { return form_matrix(t, u, u); }

ComponentMatrix::ComponentMatrix(Matrix rows) : rows_(std::move(rows)) {
  if (rows_.rows() != rows_.cols() || rows_.rows() == 0) {
    throw DimensionMismatch("ComponentMatrix: expected a nonempty square matrix");
  }
}

ComponentMatrix ComponentMatrix::from_flat(int d, const Vector& flat) {
  require_dim(flat.size(), static_cast<Eigen::Index>(d) * d, "ComponentMatrix::from_flat");
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = flat(i * d + j);
  return ComponentMatrix(std::move(m));
}

ComponentMatrix ComponentMatrix::random_feasible(int d, Rng& rng) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    Vector r = rng.gaussian(d);
    m.row(i) = (r / r.norm()).transpose();
  }
  return ComponentMatrix(std::move(m));
}

Vector ComponentMatrix::flat() const {
  const int d = dim();
  Vector v(static_cast<Eigen::Index>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) v(i * d + j) = rows_(i, j);
  return v;
}

bool ComponentMatrix::is_feasible(double tol) const {
  for (int i = 0; i < dim(); ++i) {
    if (std::abs(rows_.row(i).norm() - 1.0) > tol) return false;
  }
  return true;
}

double reconstruction_error(const Tensor4& t, const ComponentMatrix& u) {
  require_dim(u.dim(), t.dim(), "reconstruction_error");
  const double tn = t.frobenius_norm_squared();
  if (!(tn > 0.0)) throw std::invalid_argument("reconstruction_error: T has zero norm");
  // ‖T‖² − 2 Σ_i T(u_i,u_i,u_i,u_i) + Σ_{i,j} ⟨u_i,u_j⟩⁴
  double cross = 0.0;
  for (int i = 0; i < u.dim(); ++i) {
    const Vector ui = u.row(i);
    cross += form_scalar(t, ui, ui, ui, ui);
  }
  const Matrix gram = u.rows() * u.rows().transpose();
  const double self = gram.array().square().square().sum();
  return std::max(0.0, (tn - 2.0 * cross + self) / tn);
}

namespace dense {

double reconstruction_error(const Tensor4& t, const ComponentMatrix& u) {
  require_dim(u.dim(), t.dim(), "reconstruction_error");
  const double tn = t.frobenius_norm_squared();
  if (!(tn > 0.0)) throw std::invalid_argument("reconstruction_error: T has zero norm");
  const int d = t.dim();
  const Matrix& r = u.rows();
  double s = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          double approx = 0.0;
          for (int c = 0; c < d; ++c) approx += r(c, i) * r(c, j) * r(c, k) * r(c, l);
          const double diff = t(i, j, k, l) - approx;
          s += diff * diff;
        }
  return s / tn;
}

}  // namespace dense

void write_tensor(std::ostream& os, const Tensor4& t) {
  os << "d=" << t.dim() << '\n';
  os << std::setprecision(17);
  for (double e : t.entries()) os << e << '\n';
}

Tensor4 read_tensor(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("d=", 0) != 0) {
    throw std::invalid_argument("read_tensor: missing 'd=<n>' header");
  }
  int d = 0;
  try {
    std::size_t used = 0;
    d = std::stoi(header.substr(2), &used);
    if (used != header.size() - 2) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("read_tensor: malformed header '" + header + "'");
  }
  if (d < 1) throw std::invalid_argument("read_tensor: d must be positive");
  const std::size_t n = static_cast<std::size_t>(d) * d * d * d;
  std::vector<double> entries;
  entries.reserve(n);
  double x = 0.0;
  while (is >> x) entries.push_back(x);
  if (!is.eof()) throw std::invalid_argument("read_tensor: non-numeric entry");
  if (entries.size() != n) {
    throw DimensionMismatch("read_tensor: expected " + std::to_string(n) + " entries, got " +
                            std::to_string(entries.size()));
  }
  return Tensor4(d, std::move(entries));
}

}  // namespace ssgd

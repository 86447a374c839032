#include "ssgd/ica.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace ssgd::ica {

namespace {

Vector flatten_rows(const Matrix& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r = m;
  return Eigen::Map<const Vector>(r.data(), r.size());
}

void check_rows(const Matrix& u_rows, Eigen::Index d, const char* what) {
  if (u_rows.rows() != u_rows.cols()) throw DimensionMismatch(std::string(what) + ": U must be square");
  require_dim(u_rows.cols(), d, what);
}

}  // namespace

IcaModel::IcaModel(Matrix mixing, double tol) : mixing_(std::move(mixing)) {
  // Reuse the basis validation; it checks squareness and orthonormality.
  OrthoBasis check(mixing_, tol);
  (void)check;
}

IcaModel IcaModel::random(int d, Rng& rng) { return IcaModel(OrthoBasis::random(d, rng).matrix()); }

ZTensor::ZTensor(int d) : d_(d) {
  if (d < 1) throw std::invalid_argument("ZTensor: d must be positive");
}

double ZTensor::operator()(int i, int j, int k, int l) const {
  if (i == j && k == l && i == k) return 3.0;
  if ((i == j && k == l) || (i == k && j == l) || (i == l && j == k)) return 1.0;
  return 0.0;
}

double ZTensor::form(const Vector& u, const Vector& v, const Vector& w, const Vector& z) const {
  for (const Vector* x : {&u, &v, &w, &z}) require_dim(x->size(), d_, "ZTensor::form");
  return u.dot(v) * w.dot(z) + u.dot(w) * v.dot(z) + u.dot(z) * v.dot(w);
}

Vector ZTensor::form_vector(const Vector& u, const Vector& v, const Vector& w) const {
  for (const Vector* x : {&u, &v, &w}) require_dim(x->size(), d_, "ZTensor::form_vector");
  return v.dot(w) * u + u.dot(w) * v + u.dot(v) * w;
}

Vector gen_ica_sample(const IcaModel& model, Rng& rng) {
  Vector x(model.dim());
  for (int i = 0; i < model.dim(); ++i) x(i) = rng.sign();
  return model.mixing() * x;
}

double z_minus_y4_form(const Vector& y, const Vector& u, const Vector& v, const Vector& w,
                       const Vector& z) {
  const ZTensor zt(static_cast<int>(y.size()));
  return 0.5 * (zt.form(u, v, w, z) - y.dot(u) * y.dot(v) * y.dot(w) * y.dot(z));
}

double z_minus_y4_form(const Vector& y, const Vector& ui, const Vector& uj) {
  return z_minus_y4_form(y, ui, ui, uj, uj);
}

Vector ica_stochastic_gradient(const Matrix& u_rows, const Vector& y) {
  check_rows(u_rows, y.size(), "ica_stochastic_gradient");
  const int d = static_cast<int>(y.size());
  Matrix out = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const Vector ui = u_rows.row(i).transpose();
    const double yi = y.dot(ui);
    Vector block = Vector::Zero(d);
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      const Vector uj = u_rows.row(j).transpose();
      const double yj = y.dot(uj);
      block += uj.squaredNorm() * ui + 2.0 * ui.dot(uj) * uj - yj * yj * yi * y;
    }
    out.row(i) = block.transpose();
  }
  return flatten_rows(out);
}

Vector minibatch_gradient(const Matrix& u_rows, const Matrix& samples) {
  if (samples.cols() < 1) throw std::invalid_argument("minibatch_gradient: empty batch");
  check_rows(u_rows, samples.rows(), "minibatch_gradient");
  const Eigen::Index k = samples.cols();

  const Matrix gram = u_rows * u_rows.transpose();
  const Vector sq = gram.diagonal();
  const double total = sq.sum();
  // Σ_{j≠i} ‖u_j‖² u_i + 2 ⟨u_i,u_j⟩ u_j, for all i at once.
  Matrix fixed = (gram * u_rows) * 2.0;
  for (Eigen::Index i = 0; i < u_rows.rows(); ++i) {
    fixed.row(i) += (total - sq(i) - 2.0 * sq(i)) * u_rows.row(i);
  }

  const Matrix p = u_rows * samples;  // p(i, s) = ⟨u_i, y_s⟩
  const Eigen::ArrayXXd p2 = p.array().square();
  const Eigen::RowVectorXd colsum = p2.colwise().sum().matrix();
  Eigen::ArrayXXd q = (-p2).rowwise() + colsum.array();  // Σ_{j≠i} ⟨u_j, y_s⟩²
  const Matrix weighted = (p.array() * q).matrix();
  const Matrix random_part = weighted * samples.transpose() / static_cast<double>(k);
  return flatten_rows(fixed - random_part);
}

Vector gen_simple_sample(const OrthoBasis& basis, Rng& rng) {
  const int d = basis.dim();
  return std::pow(static_cast<double>(d), 0.25) * basis.vector(rng.index(d));
}

std::vector<Vector> all_sign_vectors(int d) {
  if (d < 0 || d > 24) throw std::invalid_argument("all_sign_vectors: d must be in [0, 24]");
  std::vector<Vector> out;
  out.reserve(std::size_t{1} << d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    Vector x(d);
    for (int i = 0; i < d; ++i) x(i) = ((mask >> i) & 1U) ? -1.0 : 1.0;
    out.push_back(std::move(x));
  }
  return out;
}

void write_samples_csv(std::ostream& os, const Matrix& samples) {
  os << std::setprecision(17);
  for (Eigen::Index s = 0; s < samples.cols(); ++s) {
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
      if (i) os << ',';
      os << samples(i, s);
    }
    os << '\n';
  }
}

}  // namespace ssgd::ica

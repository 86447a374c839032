#include "ssgd/objectives.hpp"

#include "ssgd/ica.hpp"

#include <algorithm>
#include <cmath>

namespace ssgd {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Vector flatten_rows(const Matrix& m) {
  const RowMajor r = m;
  return Eigen::Map<const Vector>(r.data(), r.size());
}

Vector to_col(const Matrix& u_rows, int i) { return u_rows.row(i).transpose(); }

Eigen::ArrayXXd cube(const Matrix& m) { return m.array().cube(); }

}  // namespace

void StochasticObjective::set_oracle_bound(double q) {
  if (!(q >= 0.0)) throw std::invalid_argument("oracle bound must be nonnegative");
  oracle_bound_ = q;
}

void SmoothnessBudget::validate() const {
  for (double v : {B, beta, rho}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("SmoothnessBudget: entries must be finite and nonnegative");
    }
  }
}

double pair_scale(PairConvention c) { return c == PairConvention::OrderedPairs ? 1.0 : 0.5; }

TensorObjective::TensorObjective(TensorObjectiveKind kind, std::shared_ptr<const Tensor4> tensor,
                                 SampleModel model, PairConvention convention)
    : kind_(kind), tensor_(std::move(tensor)), model_(model), convention_(convention) {
  if (!tensor_) throw std::invalid_argument("TensorObjective: null tensor");
  d_ = tensor_->dim();
  norm2_ = tensor_->frobenius_norm_squared();
}

int TensorObjective::dim() const { return kind_ == TensorObjectiveKind::MaxEig ? d_ : d_ * d_; }

Matrix TensorObjective::rows(const Vector& w) const {
  require_dim(w.size(), dim(), "TensorObjective");
  return Eigen::Map<const RowMajor>(w.data(), d_, d_);
}

double TensorObjective::value(const Vector& w) const {
  const Tensor4& t = *tensor_;
  const auto& basis = t.basis();
  if (kind_ == TensorObjectiveKind::MaxEig) {
    require_dim(w.size(), d_, "TensorObjective::value");
    if (basis) return closed_form::maxeig_value(closed_form::to_basis(*basis, w));
    return -form_scalar(t, w, w, w, w);
  }
  const Matrix u = rows(w);
  if (kind_ == TensorObjectiveKind::Correlation) {
    if (basis) return closed_form::correlation_value(closed_form::rows_to_basis(*basis, u), convention_);
    double s = 0.0;
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) {
        if (i == j) continue;
        s += form_scalar(t, to_col(u, i), to_col(u, i), to_col(u, j), to_col(u, j));
      }
    return pair_scale(convention_) * s;
  }
  // ‖T‖² − 2 Σ_i T(u_i,u_i,u_i,u_i) + Σ_{i,j} ⟨u_i,u_j⟩⁴
  double cross = 0.0;
  if (basis) {
    cross = closed_form::rows_to_basis(*basis, u).array().square().square().sum();
  } else {
    for (int i = 0; i < d_; ++i) {
      const Vector ui = to_col(u, i);
      cross += form_scalar(t, ui, ui, ui, ui);
    }
  }
  const Matrix gram = u * u.transpose();
  return norm2_ - 2.0 * cross + gram.array().square().square().sum();
}

Vector TensorObjective::gradient(const Vector& w) const {
  const Tensor4& t = *tensor_;
  const auto& basis = t.basis();
  if (kind_ == TensorObjectiveKind::MaxEig) {
    require_dim(w.size(), d_, "TensorObjective::gradient");
    return -4.0 * form_vector(t, w);
  }
  const Matrix u = rows(w);
  Matrix g(d_, d_);
  if (kind_ == TensorObjectiveKind::Correlation) {
    const double s = pair_scale(convention_);
    if (basis) {
      const Matrix& a = basis->matrix();
      const Matrix z = u * a;
      const Eigen::ArrayXXd z2 = z.array().square();
      const Eigen::ArrayXXd others = (-z2).rowwise() + z2.colwise().sum();
      g = 4.0 * s * (z.array() * others).matrix() * a.transpose();
    } else {
      for (int i = 0; i < d_; ++i) {
        Vector gi = Vector::Zero(d_);
        for (int j = 0; j < d_; ++j) {
          if (j != i) gi += form_vector(t, to_col(u, i), to_col(u, j), to_col(u, j));
        }
        g.row(i) = 4.0 * s * gi.transpose();
      }
    }
    return flatten_rows(g);
  }
  // Reconstruction: block i is 8[Σ_j ⟨u_i,u_j⟩³ u_j − T(I,u_i,u_i,u_i)].
  const Matrix gram = u * u.transpose();
  g = cube(gram).matrix() * u;
  if (basis) {
    const Matrix& a = basis->matrix();
    g -= cube(u * a).matrix() * a.transpose();
  } else {
    for (int i = 0; i < d_; ++i) g.row(i) -= form_vector(t, to_col(u, i)).transpose();
  }
  return flatten_rows(8.0 * g);
}

Matrix TensorObjective::hessian(const Vector& w) const {
  const Tensor4& t = *tensor_;
  if (kind_ == TensorObjectiveKind::MaxEig) {
    require_dim(w.size(), d_, "TensorObjective::hessian");
    return -12.0 * form_matrix(t, w);
  }
  const Matrix u = rows(w);
  const int n = d_ * d_;
  Matrix h = Matrix::Zero(n, n);
  auto blk = [&](int i, int k) { return h.block(i * d_, k * d_, d_, d_); };
  const Matrix id = Matrix::Identity(d_, d_);

  if (kind_ == TensorObjectiveKind::Correlation) {
    const double s = pair_scale(convention_);
    std::vector<Matrix> self(d_);
    Matrix self_sum = Matrix::Zero(d_, d_);
    for (int j = 0; j < d_; ++j) {
      self[j] = form_matrix(t, to_col(u, j));
      self_sum += self[j];
    }
    for (int i = 0; i < d_; ++i) {
      blk(i, i) = 4.0 * s * (self_sum - self[i]);
      for (int k = i + 1; k < d_; ++k) {
        const Matrix m = 8.0 * s * form_matrix(t, to_col(u, i), to_col(u, k));
        blk(i, k) = m;
        blk(k, i) = m.transpose();
      }
    }
    return h;
  }

  const Matrix gram = u * u.transpose();
  for (int i = 0; i < d_; ++i) {
    const Vector ui = to_col(u, i);
    const double n2 = gram(i, i);
    Matrix diag = n2 * n2 * n2 * id + 6.0 * n2 * n2 * ui * ui.transpose() - 3.0 * form_matrix(t, ui);
    for (int j = 0; j < d_; ++j) {
      if (j == i) continue;
      const Vector uj = to_col(u, j);
      diag += 3.0 * gram(i, j) * gram(i, j) * uj * uj.transpose();
      const double c = gram(i, j);
      blk(i, j) = 8.0 * (3.0 * c * c * uj * ui.transpose() + c * c * c * id);
    }
    blk(i, i) = 8.0 * diag;
  }
  return h;
}

Vector TensorObjective::stochastic_gradient(const Vector& w, const Matrix& samples) const {
  if (samples.cols() < 1) throw std::invalid_argument("stochastic_gradient: empty batch");
  require_dim(samples.rows(), d_, "stochastic_gradient samples");
  const double k = static_cast<double>(samples.cols());
  const bool ica = model_ == SampleModel::IcaCumulant;

  if (kind_ == TensorObjectiveKind::MaxEig) {
    require_dim(w.size(), d_, "stochastic_gradient");
    const Vector p = samples.transpose() * w;
    const Vector empirical = samples * p.array().cube().matrix() / k;
    if (!ica) return -4.0 * empirical;
    // G(I,u,u,u) = ½(3‖u‖²u − ⟨y,u⟩³y)
    return -2.0 * (3.0 * w.squaredNorm() * w - empirical);
  }

  const Matrix u = rows(w);
  if (kind_ == TensorObjectiveKind::Correlation) {
    const double s = pair_scale(convention_);
    // The ICA oracle's mean is half the ordered-pairs gradient.
    if (ica) return 2.0 * s * ica::minibatch_gradient(u, samples);
    const Matrix p = u * samples;
    const Eigen::ArrayXXd p2 = p.array().square();
    const Eigen::ArrayXXd others = (-p2).rowwise() + p2.colwise().sum();
    return flatten_rows(4.0 * s * (p.array() * others).matrix() * samples.transpose() / k);
  }

  const Matrix gram = u * u.transpose();
  Matrix g = cube(gram).matrix() * u;
  const Matrix empirical = cube(u * samples).matrix() * samples.transpose() / k;
  if (!ica) {
    g -= empirical;
  } else {
    g -= 0.5 * (3.0 * gram.diagonal().asDiagonal() * u - empirical);
  }
  return flatten_rows(8.0 * g);
}

QuadraticObjective::QuadraticObjective(Vector w0, Vector g, Matrix h, double f0,
                                       double symmetry_tol)
    : w0_(std::move(w0)), g_(std::move(g)), h_(std::move(h)), f0_(f0) {
  require_dim(g_.size(), w0_.size(), "QuadraticObjective gradient");
  if (h_.rows() != w0_.size() || h_.cols() != w0_.size()) {
    throw DimensionMismatch("QuadraticObjective: H must be n x n");
  }
  const double asym = (h_ - h_.transpose()).cwiseAbs().maxCoeff();
  if (asym > symmetry_tol) {
    throw std::invalid_argument("QuadraticObjective: H is not symmetric (max |H - Hᵀ| = " +
                                std::to_string(asym) + ")");
  }
  set_oracle_bound(0.0);
}

double QuadraticObjective::value(const Vector& w) const {
  require_dim(w.size(), dim(), "QuadraticObjective::value");
  const Vector dw = w - w0_;
  return f0_ + g_.dot(dw) + 0.5 * dw.dot(h_ * dw);
}

Vector QuadraticObjective::gradient(const Vector& w) const {
  require_dim(w.size(), dim(), "QuadraticObjective::gradient");
  return g_ + h_ * (w - w0_);
}

Vector QuadraticObjective::stochastic_gradient(const Vector& w, const Matrix& samples) const {
  if (samples.cols() < 1) throw std::invalid_argument("stochastic_gradient: empty batch");
  require_dim(samples.rows(), dim(), "QuadraticObjective samples");
  return gradient(w) + samples.rowwise().mean();
}

const StochasticObjective* ConstrainedProblem::stochastic() const {
  return dynamic_cast<const StochasticObjective*>(objective.get());
}

std::optional<double> ConstrainedProblem::metric(const Vector& w) const {
  if (!tensor) return std::nullopt;
  const int d = tensor->dim();
  if (w.size() != static_cast<Eigen::Index>(d) * d) return std::nullopt;
  return reconstruction_error(*tensor, ComponentMatrix::from_flat(d, w));
}

Vector ConstrainedProblem::random_feasible(Rng& rng) const {
  const Vector g = rng.gaussian(dim());
  return constraints ? constraints->project(g) : g;
}

double estimate_oracle_bound(const StochasticObjective& objective, const Sampler& sampler,
                             const PointGenerator& points, Rng& rng, int probes, double margin) {
  if (probes < 1) throw std::invalid_argument("estimate_oracle_bound: probes must be positive");
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    const Vector w = points(rng);
    const Matrix x = sampler.draw(rng);
    const double dev = (objective.stochastic_gradient(w, x) - objective.gradient(w)).norm();
    if (!std::isfinite(dev)) throw NonFiniteValue("estimate_oracle_bound: non-finite deviation");
    worst = std::max(worst, dev);
  }
  return margin * worst;
}

SmoothnessBudget estimate_smoothness(const Objective& objective, const PointGenerator& points,
                                     Rng& rng, int pairs) {
  SmoothnessBudget b;
  for (int p = 0; p < pairs; ++p) {
    const Vector w = points(rng);
    const Vector v = points(rng);
    const double dist = (w - v).norm();
    b.B = std::max({b.B, std::abs(objective.value(w)), std::abs(objective.value(v))});
    if (dist < 1e-12) continue;
    b.beta = std::max(b.beta, (objective.gradient(w) - objective.gradient(v)).norm() / dist);
    const Matrix dh = objective.hessian(w) - objective.hessian(v);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (dh + dh.transpose()), Eigen::EigenvaluesOnly);
    b.rho = std::max(b.rho, es.eigenvalues().cwiseAbs().maxCoeff() / dist);
  }
  return b;
}

std::unique_ptr<Sampler> make_sampler(SampleModel model, const OrthoBasis& basis) {
  if (model == SampleModel::FourthMoment) return std::make_unique<ica::SimpleSampler>(basis);
  return std::make_unique<ica::IcaSampler>(ica::IcaModel(basis.matrix()));
}

namespace {

/// Random feasible points and, every other probe, points whose rows sit near
/// m randomly chosen basis directions (m uniform in [1, d], so rows often
/// coincide). The oracle deviation peaks when all rows collapse together.
PointGenerator probe_points(const ConstrainedProblem& problem, const OrthoBasis& basis) {
  const int d = basis.dim();
  const int rows = problem.dim() / d;
  auto counter = std::make_shared<int>(0);
  return [&problem, basis, d, rows, counter](Rng& rng) -> Vector {
    if ((*counter)++ % 2 == 0) return problem.random_feasible(rng);
    const int m = 1 + rng.index(d);
    std::vector<int> dirs(m);
    for (int& k : dirs) k = rng.index(d);
    Vector w(rows * d);
    for (int i = 0; i < rows; ++i) {
      w.segment(i * d, d) = rng.sign() * basis.vector(dirs[rng.index(m)]) + 0.05 * rng.gaussian(d);
    }
    return problem.constraints->project(w);
  };
}

ConstrainedProblem finish(std::string name, std::shared_ptr<TensorObjective> obj, int blocks,
                          int block_dim) {
  ConstrainedProblem p;
  p.name = std::move(name);
  p.tensor = obj->tensor_ptr();
  p.constraints = std::make_shared<SphereProduct>(blocks, block_dim);
  p.objective = obj;
  Rng rng(kCalibrationSeed);
  const PointGenerator random_points = [&p](Rng& r) { return p.random_feasible(r); };
  p.smoothness = estimate_smoothness(*obj, random_points, rng);
  if (const auto& basis = p.tensor->basis()) {
    const auto sampler = make_sampler(obj->sample_model(), *basis);
    obj->set_oracle_bound(estimate_oracle_bound(*obj, *sampler, probe_points(p, *basis), rng));
  }
  return p;
}

}  // namespace

ConstrainedProblem maxeig_objective(std::shared_ptr<const Tensor4> t, SampleModel model) {
  auto obj = std::make_shared<TensorObjective>(TensorObjectiveKind::MaxEig, t, model);
  return finish("maxeig", obj, 1, t->dim());
}

ConstrainedProblem reconstruction_objective(std::shared_ptr<const Tensor4> t, SampleModel model) {
  auto obj = std::make_shared<TensorObjective>(TensorObjectiveKind::Reconstruction, t, model);
  return finish("reconstruction", obj, t->dim(), t->dim());
}

ConstrainedProblem correlation_objective(std::shared_ptr<const Tensor4> t,
                                         PairConvention convention, SampleModel model) {
  auto obj =
      std::make_shared<TensorObjective>(TensorObjectiveKind::Correlation, t, model, convention);
  return finish("correlation", obj, t->dim(), t->dim());
}

std::shared_ptr<QuadraticObjective> quadratic_objective(const Vector& w0, const Vector& g,
                                                        const Matrix& h, double f0) {
  return std::make_shared<QuadraticObjective>(w0, g, h, f0);
}

namespace closed_form {

Vector to_basis(const OrthoBasis& basis, const Vector& u) {
  require_dim(u.size(), basis.dim(), "to_basis");
  return basis.matrix().transpose() * u;
}

Matrix rows_to_basis(const OrthoBasis& basis, const Matrix& u_rows) {
  require_dim(u_rows.cols(), basis.dim(), "rows_to_basis");
  return u_rows * basis.matrix();
}

double maxeig_value(const Vector& x) { return -x.array().square().square().sum(); }

double pair_h(const Vector& u, const Vector& v) {
  require_dim(v.size(), u.size(), "pair_h");
  return (u.array() * v.array()).square().sum();
}

double correlation_value(const Matrix& u_rows, PairConvention convention) {
  // Σ_k [(Σ_i U_ik²)² − Σ_i U_ik⁴] = Σ_{i≠j} h(u_i, u_j)
  const Eigen::ArrayXXd sq = u_rows.array().square();
  const double total = sq.colwise().sum().square().sum() - sq.square().sum();
  return pair_scale(convention) * total;
}

}  // namespace closed_form

}  // namespace ssgd

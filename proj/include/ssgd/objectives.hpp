#pragma once

#include "ssgd/common.hpp"
#include "ssgd/constraints.hpp"
#include "ssgd/rng.hpp"
#include "ssgd/sampler.hpp"
#include "ssgd/tensor4.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>

namespace ssgd {

class Objective {
 public:
  virtual ~Objective() = default;
  virtual int dim() const = 0;
  virtual double value(const Vector& w) const = 0;
  virtual Vector gradient(const Vector& w) const = 0;
  virtual Matrix hessian(const Vector& w) const = 0;
};

/// f(w) = E_x[φ(w, x)] together with an unbiased gradient oracle.
///
/// The oracle takes the samples as an argument (one per column of `samples`)
/// and returns the mean of the per-sample gradients, so an objective holds no
/// random state. oracle_bound() is Q with ‖SG(w) − ∇f(w)‖ ≤ Q.
class StochasticObjective : public Objective {
 public:
  virtual Vector stochastic_gradient(const Vector& w, const Matrix& samples) const = 0;
  double oracle_bound() const { return oracle_bound_; }
  void set_oracle_bound(double q);

 private:
  double oracle_bound_ = std::numeric_limits<double>::infinity();
};

/// B ≥ |f|, β bounds the gradient Lipschitz constant, ρ the Hessian's.
struct SmoothnessBudget {
  double B = 0.0;
  double beta = 0.0;
  double rho = 0.0;

  /// Throws std::invalid_argument on negative or non-finite entries.
  void validate() const;
};

/// Which tensor a single stochastic sample stands for.
///   FourthMoment: sample x, G = x^{⊗4} (the simple sampler).
///   IcaCumulant:  sample y, G = ½(Z − y^{⊗4}) (the ICA model).
enum class SampleModel { FourthMoment, IcaCumulant };

/// Scale of the correlation objective.
///   OrderedPairs: Σ_{i≠j} T(u_i,u_i,u_j,u_j), the headline objective.
///   HalfOrderedPairs: half of that, i.e. each unordered pair once. The
///   closed forms for multipliers, χ and 𝔐 in basis coordinates, and the ICA
///   single-sample oracle, are stated for this view.
enum class PairConvention { OrderedPairs, HalfOrderedPairs };

double pair_scale(PairConvention c);

enum class TensorObjectiveKind { MaxEig, Reconstruction, Correlation };

/// Objectives built from a 4th-order tensor. MaxEig lives on R^d; the other
/// two act on the flat d²-vector of a ComponentMatrix.
class TensorObjective final : public StochasticObjective {
 public:
  TensorObjective(TensorObjectiveKind kind, std::shared_ptr<const Tensor4> tensor,
                  SampleModel model = SampleModel::FourthMoment,
                  PairConvention convention = PairConvention::OrderedPairs);

  TensorObjectiveKind kind() const { return kind_; }
  SampleModel sample_model() const { return model_; }
  PairConvention convention() const { return convention_; }
  const Tensor4& tensor() const { return *tensor_; }
  std::shared_ptr<const Tensor4> tensor_ptr() const { return tensor_; }

  int dim() const override;
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  Matrix hessian(const Vector& w) const override;
  Vector stochastic_gradient(const Vector& w, const Matrix& samples) const override;

 private:
  Matrix rows(const Vector& w) const;

  TensorObjectiveKind kind_;
  std::shared_ptr<const Tensor4> tensor_;
  SampleModel model_;
  PairConvention convention_;
  int d_;
  double norm2_;
};

/// f̃(w) = f₀ + gᵀ(w−w₀) + ½(w−w₀)ᵀH(w−w₀). Each sample is an additive
/// gradient perturbation: SG(w) = ∇f̃(w) + mean of the sample columns.
class QuadraticObjective final : public StochasticObjective {
 public:
  QuadraticObjective(Vector w0, Vector g, Matrix h, double f0 = 0.0, double symmetry_tol = 1e-12);

  const Vector& center() const { return w0_; }
  const Vector& linear() const { return g_; }
  const Matrix& curvature() const { return h_; }

  int dim() const override { return static_cast<int>(w0_.size()); }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  Matrix hessian(const Vector&) const override { return h_; }
  Vector stochastic_gradient(const Vector& w, const Matrix& samples) const override;

 private:
  Vector w0_;
  Vector g_;
  Matrix h_;
  double f0_;
};

/// An objective with equality constraints and the metadata the optimizer and
/// the analysis code need.
struct ConstrainedProblem {
  std::string name;
  std::shared_ptr<const Objective> objective;
  std::shared_ptr<const ConstraintSet> constraints;
  /// Set for tensor problems.
  std::shared_ptr<const Tensor4> tensor;
  SmoothnessBudget smoothness;

  int dim() const { return objective->dim(); }
  /// The objective as a stochastic objective, or nullptr.
  const StochasticObjective* stochastic() const;
  /// Normalized reconstruction error for component problems (d² variables).
  std::optional<double> metric(const Vector& w) const;
  /// project(standard Gaussian).
  Vector random_feasible(Rng& rng) const;
};

inline constexpr int kOracleProbes = 1000;
inline constexpr double kOracleMargin = 1.5;
inline constexpr std::uint64_t kCalibrationSeed = 0x5eed0f0acull;

using PointGenerator = std::function<Vector(Rng&)>;

/// Max over `probes` (point, sample) pairs of ‖SG(w) − ∇f(w)‖, times margin.
double estimate_oracle_bound(const StochasticObjective& objective, const Sampler& sampler,
                             const PointGenerator& points, Rng& rng, int probes = kOracleProbes,
                             double margin = kOracleMargin);

/// Sampled lower estimates of (B, β, ρ) over `pairs` random point pairs.
SmoothnessBudget estimate_smoothness(const Objective& objective, const PointGenerator& points,
                                     Rng& rng, int pairs = 32);

/// The sampler whose draws match `model` for an orthogonal tensor with
/// this basis: SimpleSampler for FourthMoment, IcaSampler for IcaCumulant.
std::unique_ptr<Sampler> make_sampler(SampleModel model, const OrthoBasis& basis);

/// f(u) = −T(u,u,u,u) on the unit sphere.
ConstrainedProblem maxeig_objective(std::shared_ptr<const Tensor4> t,
                                    SampleModel model = SampleModel::FourthMoment);
/// f(U) = ‖T − Σ u_i^{⊗4}‖_F² with each row on the unit sphere.
ConstrainedProblem reconstruction_objective(std::shared_ptr<const Tensor4> t,
                                            SampleModel model = SampleModel::FourthMoment);
/// f(U) = Σ_{i≠j} T(u_i,u_i,u_j,u_j) (scaled per `convention`), rows on spheres.
ConstrainedProblem correlation_objective(
    std::shared_ptr<const Tensor4> t, PairConvention convention = PairConvention::OrderedPairs,
    SampleModel model = SampleModel::FourthMoment);

std::shared_ptr<QuadraticObjective> quadratic_objective(const Vector& w0, const Vector& g,
                                                        const Matrix& h, double f0 = 0.0);

/// Evaluations in the coordinates of the decomposition basis.
namespace closed_form {
/// x = Aᵀu.
Vector to_basis(const OrthoBasis& basis, const Vector& u);
/// Rows of U expressed in the basis: (UA)_{ik} = ⟨u_i, a_k⟩.
Matrix rows_to_basis(const OrthoBasis& basis, const Matrix& u_rows);

/// −‖x‖₄⁴.
double maxeig_value(const Vector& x);
/// h(u, v) = Σ_k (u_k v_k)².
double pair_h(const Vector& u, const Vector& v);
/// Σ_{i≠j} h(u_i, u_j), scaled per `convention`.
double correlation_value(const Matrix& u_rows, PairConvention convention);
}  // namespace closed_form

}  // namespace ssgd

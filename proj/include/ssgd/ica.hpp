#pragma once

#include "ssgd/common.hpp"
#include "ssgd/rng.hpp"
#include "ssgd/sampler.hpp"
#include "ssgd/tensor4.hpp"

#include <iosfwd>
#include <vector>

namespace ssgd::ica {

/// y = A x with x uniform on {±1}^d and A orthonormal.
class IcaModel {
 public:
  explicit IcaModel(Matrix mixing, double tol = kOrthonormalTolerance);
  static IcaModel random(int d, Rng& rng);

  int dim() const { return static_cast<int>(mixing_.rows()); }
  const Matrix& mixing() const { return mixing_; }
  /// The columns of A, i.e. the components a_i of the cumulant tensor.
  OrthoBasis basis() const { return OrthoBasis(mixing_); }

 private:
  Matrix mixing_;
};

/// Z(i,i,i,i) = 3, Z(i,i,j,j) = Z(i,j,i,j) = Z(i,j,j,i) = 1 for i != j,
/// zero elsewhere. This is E[x^{⊗4}] for a standard Gaussian x; it is never
/// stored, entries and contractions are computed on demand.
class ZTensor {
 public:
  explicit ZTensor(int d);
  int dim() const { return d_; }
  double operator()(int i, int j, int k, int l) const;
  /// Z(u,v,w,z) = (u·v)(w·z) + (u·w)(v·z) + (u·z)(v·w).
  double form(const Vector& u, const Vector& v, const Vector& w, const Vector& z) const;
  /// Z(I,u,v,w) = (v·w)u + (u·w)v + (u·v)w.
  Vector form_vector(const Vector& u, const Vector& v, const Vector& w) const;

 private:
  int d_;
};

Vector gen_ica_sample(const IcaModel& model, Rng& rng);

/// ½(Z − y^{⊗4})(u, v, w, z).
double z_minus_y4_form(const Vector& y, const Vector& u, const Vector& v, const Vector& w,
                       const Vector& z);
/// ½(Z − y^{⊗4})(u_i, u_i, u_j, u_j).
double z_minus_y4_form(const Vector& y, const Vector& ui, const Vector& uj);

/// Single-sample gradient oracle for the correlation objective. `u_rows`
/// holds u_1..u_d as rows; the result is the flat d² vector whose block i is
///   Σ_{j≠i} (⟨u_j,u_j⟩u_i + 2⟨u_i,u_j⟩u_j − ⟨u_j,y⟩²⟨u_i,y⟩y).
/// Straight O(d³) evaluation, kept as the reference for minibatch_gradient.
Vector ica_stochastic_gradient(const Matrix& u_rows, const Vector& y);

/// Mean of ica_stochastic_gradient over the columns of `samples`, with the
/// sample-independent part computed once: O(d³ + d²k).
Vector minibatch_gradient(const Matrix& u_rows, const Matrix& samples);

/// d^{1/4} a_i with i uniform, so that E[x^{⊗4}] = Σ a_i^{⊗4}.
Vector gen_simple_sample(const OrthoBasis& basis, Rng& rng);

class SimpleSampler final : public Sampler {
 public:
  explicit SimpleSampler(OrthoBasis basis) : basis_(std::move(basis)) {}
  int dim() const override { return basis_.dim(); }
  Vector draw(Rng& rng) const override { return gen_simple_sample(basis_, rng); }

 private:
  OrthoBasis basis_;
};

class IcaSampler final : public Sampler {
 public:
  explicit IcaSampler(IcaModel model) : model_(std::move(model)) {}
  int dim() const override { return model_.dim(); }
  Vector draw(Rng& rng) const override { return gen_ica_sample(model_, rng); }
  const IcaModel& model() const { return model_; }

 private:
  IcaModel model_;
};

/// All 2^d vectors in {±1}^d, for exhaustive expectations at small d.
std::vector<Vector> all_sign_vectors(int d);

/// One sample per row, comma separated, full precision.
void write_samples_csv(std::ostream& os, const Matrix& samples);

}  // namespace ssgd::ica

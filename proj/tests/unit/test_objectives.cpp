#include "helpers.hpp"

#include "ssgd/ica.hpp"
#include "ssgd/objectives.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ssgd;
using namespace testing_helpers;

namespace {

struct Fixture {
  Matrix a;
  std::shared_ptr<const Tensor4> t;
  Fixture(int d, std::uint64_t seed) {
    Rng rng(seed);
    a = random_orthonormal(d, rng);
    t = tensor_from(a);
  }
};

}  // namespace

TEST(MaxEig, ValuesAtBasisAndBalancedPoint) {
  Fixture fx(5, 1);
  const auto p = maxeig_objective(fx.t);
  EXPECT_NEAR(p.objective->value(fx.a.col(0)), -1.0, 1e-14);
  EXPECT_NEAR(p.objective->value((fx.a.col(0) + fx.a.col(1)) / std::sqrt(2.0)), -0.5, 1e-14);
}

TEST(MaxEig, GradientAndHessianMatchFiniteDifferences) {
  Fixture fx(4, 2);
  const auto p = maxeig_objective(fx.t);
  Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    const Vector x = p.random_feasible(rng);
    auto f = [&](const Vector& v) { return p.objective->value(v); };
    EXPECT_LE(rel_err(p.objective->gradient(x), central_diff(f, x)), 1e-6);
    Matrix h(4, 4);
    for (int i = 0; i < 4; ++i) {
      auto gi = [&](const Vector& v) { return p.objective->gradient(v)(i); };
      h.row(i) = central_diff(gi, x).transpose();
    }
    EXPECT_LE(rel_err(p.objective->hessian(x), h), 1e-6);
  }
}

TEST(Reconstruction, ZeroAtGroundTruth) {
  Fixture fx(4, 4);
  const auto p = reconstruction_objective(fx.t);
  EXPECT_NEAR(p.objective->value(flatten_rows(fx.a.transpose())), 0.0, 1e-12);
  EXPECT_NEAR(*p.metric(flatten_rows(fx.a.transpose())), 0.0, 1e-12);
}

TEST(Reconstruction, SingleComponentSignSymmetry) {
  Fixture fx(1, 5);
  const auto p = reconstruction_objective(fx.t);
  Vector u(1);
  u << -fx.a(0, 0);
  EXPECT_NEAR(p.objective->value(u), 0.0, 1e-15);
}

TEST(Reconstruction, GradientAndHessianMatchFiniteDifferences) {
  Fixture fx(3, 6);
  const auto p = reconstruction_objective(fx.t);
  Rng rng(7);
  for (int k = 0; k < 5; ++k) {
    const Vector w = p.random_feasible(rng);
    auto f = [&](const Vector& v) { return p.objective->value(v); };
    EXPECT_LE(rel_err(p.objective->gradient(w), central_diff(f, w)), 1e-6);
    Matrix h(9, 9);
    for (int i = 0; i < 9; ++i) {
      auto gi = [&](const Vector& v) { return p.objective->gradient(v)(i); };
      h.row(i) = central_diff(gi, w).transpose();
    }
    EXPECT_LE(rel_err(p.objective->hessian(w), h), 1e-6);
  }
}

TEST(Reconstruction, ValueMatchesDenseFrobeniusNorm) {
  Fixture fx(3, 8);
  const auto p = reconstruction_objective(fx.t);
  Rng rng(9);
  const Vector w = p.random_feasible(rng);
  const ComponentMatrix u = ComponentMatrix::from_flat(3, w);
  const double norm2 = fx.t->frobenius_norm_squared();
  EXPECT_NEAR(p.objective->value(w), norm2 * dense::reconstruction_error(*fx.t, u), 1e-10);
}

TEST(Correlation, ZeroAtSignedPermutation) {
  Fixture fx(4, 10);
  const auto p = correlation_objective(fx.t);
  Matrix u(4, 4);
  u.row(0) = fx.a.col(3).transpose();
  u.row(1) = -fx.a.col(1).transpose();
  u.row(2) = fx.a.col(0).transpose();
  u.row(3) = -fx.a.col(2).transpose();
  EXPECT_NEAR(p.objective->value(flatten_rows(u)), 0.0, 1e-14);
}

TEST(Correlation, RepeatedComponentCountsBothOrderedPairs) {
  Fixture fx(2, 11);
  Matrix u(2, 2);
  u.row(0) = fx.a.col(0).transpose();
  u.row(1) = fx.a.col(0).transpose();
  const Vector w = flatten_rows(u);
  EXPECT_NEAR(correlation_objective(fx.t, PairConvention::OrderedPairs).objective->value(w), 2.0, 1e-14);
  EXPECT_NEAR(correlation_objective(fx.t, PairConvention::HalfOrderedPairs).objective->value(w), 1.0, 1e-14);
}

TEST(Correlation, NonNegativeAndDifferentiable) {
  Fixture fx(3, 12);
  for (auto conv : {PairConvention::OrderedPairs, PairConvention::HalfOrderedPairs}) {
    const auto p = correlation_objective(fx.t, conv);
    Rng rng(13);
    for (int k = 0; k < 20; ++k) {
      const Vector w = p.random_feasible(rng);
      EXPECT_GE(p.objective->value(w), 0.0);
      auto f = [&](const Vector& v) { return p.objective->value(v); };
      EXPECT_LE(rel_err(p.objective->gradient(w), central_diff(f, w)), 1e-6);
    }
  }
}

TEST(Correlation, ValueMatchesBruteForcePairSum) {
  Fixture fx(3, 14);
  const auto p = correlation_objective(fx.t);
  Rng rng(15);
  const Vector w = p.random_feasible(rng);
  const Matrix u = unflatten(w, 3);
  double s = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) s += brute_form(*fx.t, u.row(i), u.row(i), u.row(j), u.row(j));
  EXPECT_NEAR(p.objective->value(w), s, 1e-12);
}

TEST(PairConvention, Scales) {
  EXPECT_EQ(pair_scale(PairConvention::OrderedPairs), 1.0);
  EXPECT_EQ(pair_scale(PairConvention::HalfOrderedPairs), 0.5);
}

TEST(StochasticGradient, FourthMomentSamplerIsUnbiasedExactly) {
  // The simple sampler takes 2d values (±d^{1/4} a_i); enumerate them all.
  Fixture fx(3, 16);
  for (const auto& p : {maxeig_objective(fx.t), correlation_objective(fx.t), reconstruction_objective(fx.t)}) {
    const auto* so = p.stochastic();
    ASSERT_NE(so, nullptr);
    Rng rng(17);
    const Vector w = p.random_feasible(rng);
    Matrix samples(3, 6);
    const double s = std::pow(3.0, 0.25);
    for (int i = 0; i < 3; ++i) {
      samples.col(2 * i) = s * fx.a.col(i);
      samples.col(2 * i + 1) = -s * fx.a.col(i);
    }
    EXPECT_LE(rel_err(so->stochastic_gradient(w, samples), p.objective->gradient(w)), 1e-12);
  }
}

TEST(StochasticGradient, IcaModelIsUnbiasedInTheHalvedView) {
  Fixture fx(3, 18);
  const auto p = correlation_objective(fx.t, PairConvention::HalfOrderedPairs, SampleModel::IcaCumulant);
  Rng rng(19);
  const Vector w = p.random_feasible(rng);
  const auto signs = ica::all_sign_vectors(3);
  Matrix ys(3, static_cast<Eigen::Index>(signs.size()));
  for (std::size_t k = 0; k < signs.size(); ++k) ys.col(static_cast<Eigen::Index>(k)) = fx.a * signs[k];
  EXPECT_LE(rel_err(p.stochastic()->stochastic_gradient(w, ys), p.objective->gradient(w)), 1e-12);
}

TEST(StochasticGradient, EmptyBatchRejected) {
  Fixture fx(2, 20);
  const auto p = maxeig_objective(fx.t);
  EXPECT_THROW(p.stochastic()->stochastic_gradient(fx.a.col(0), Matrix(2, 0)), std::invalid_argument);
}

TEST(OracleBound, CalibratedBoundCoversFreshDraws) {
  Fixture fx(4, 21);
  const auto p = correlation_objective(fx.t);
  const auto* so = p.stochastic();
  const double q = so->oracle_bound();
  ASSERT_TRUE(std::isfinite(q));
  EXPECT_GT(q, 0.0);
  const auto sampler = make_sampler(SampleModel::FourthMoment, OrthoBasis(fx.a));
  Rng rng(22);
  for (int k = 0; k < 300; ++k) {
    const Vector w = p.random_feasible(rng);
    const Matrix y = sampler->draw_batch(rng, 1);
    EXPECT_LE((so->stochastic_gradient(w, y) - p.objective->gradient(w)).norm(), q);
  }
}

TEST(OracleBound, RejectsNegative) {
  const auto q = quadratic_objective(Vector::Zero(2), Vector::Zero(2), Matrix::Identity(2, 2));
  EXPECT_THROW(q->set_oracle_bound(-1.0), std::invalid_argument);
}

TEST(Smoothness, BudgetIsPositiveAndValidated) {
  Fixture fx(3, 23);
  const auto p = maxeig_objective(fx.t);
  EXPECT_GT(p.smoothness.B, 0.0);
  EXPECT_GT(p.smoothness.beta, 0.0);
  EXPECT_GT(p.smoothness.rho, 0.0);
  SmoothnessBudget bad;
  bad.beta = -1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Quadratic, Examples) {
  const Vector w0 = (Vector(2) << 0.5, -1.0).finished();
  const auto flat = quadratic_objective(w0, Vector::Zero(2), Matrix::Identity(2, 2));
  EXPECT_EQ(flat->gradient(w0).norm(), 0.0);

  const Vector g = (Vector(2) << 0.25, 2.0).finished();
  const Matrix h = (Vector(2) << 1.0, -1.0).finished().asDiagonal();
  const auto q = quadratic_objective(w0, g, h, 3.0);
  const Vector w = w0 + Vector::Ones(2);
  EXPECT_LE((q->gradient(w) - (g + (Vector(2) << 1.0, -1.0).finished())).norm(), 1e-15);
  EXPECT_NEAR(q->value(w), 3.0 + g.sum() + 0.5 * (1.0 - 1.0), 1e-15);
  EXPECT_EQ(q->hessian(w), h);
}

TEST(Quadratic, RejectsNonSymmetricCurvature) {
  Matrix h = Matrix::Identity(2, 2);
  h(0, 1) = 1.0;
  EXPECT_THROW(quadratic_objective(Vector::Zero(2), Vector::Zero(2), h), std::invalid_argument);
  EXPECT_THROW(quadratic_objective(Vector::Zero(2), Vector::Zero(3), Matrix::Identity(2, 2)), DimensionMismatch);
}

TEST(ClosedForm, PairFunctionAndCorrelationValue) {
  const Vector u = (Vector(2) << 1.0, 2.0).finished();
  const Vector v = (Vector(2) << 3.0, -1.0).finished();
  EXPECT_DOUBLE_EQ(closed_form::pair_h(u, v), 9.0 + 4.0);
  Matrix rows(2, 2);
  rows << 1.0, 2.0, 3.0, -1.0;
  EXPECT_DOUBLE_EQ(closed_form::correlation_value(rows, PairConvention::OrderedPairs), 26.0);
  EXPECT_DOUBLE_EQ(closed_form::correlation_value(rows, PairConvention::HalfOrderedPairs), 13.0);
}

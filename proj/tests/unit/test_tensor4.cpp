#include "helpers.hpp"

#include "ssgd/tensor4.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

using namespace ssgd;
using namespace testing_helpers;

TEST(Tensor4, EntryCountIsDToTheFourth) {
  Rng rng(1);
  for (int d : {1, 2, 3, 5}) {
    const Tensor4 t = make_orthogonal_tensor(OrthoBasis::random(d, rng));
    EXPECT_EQ(t.entries().size(), static_cast<std::size_t>(d * d * d * d));
  }
  EXPECT_THROW(Tensor4(2, std::vector<double>(15, 0.0)), DimensionMismatch);
  EXPECT_THROW(Tensor4(0, {}), std::invalid_argument);
}

TEST(Tensor4, SymmetricUnderAllIndexPermutations) {
  Rng rng(2);
  const int d = 3;
  const Tensor4 t = make_orthogonal_tensor(OrthoBasis::random(d, rng));
  std::array<int, 4> perm{0, 1, 2, 3};
  int perms = 0;
  double worst = 0.0;
  do {
    ++perms;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) {
            const std::array<int, 4> idx{i, j, k, l};
            const double p = t(idx[perm[0]], idx[perm[1]], idx[perm[2]], idx[perm[3]]);
            worst = std::max(worst, std::abs(p - t(i, j, k, l)));
          }
  } while (std::next_permutation(perm.begin(), perm.end()));
  EXPECT_EQ(perms, 24);
  EXPECT_LE(worst, 1e-15);
  EXPECT_LE(t.max_asymmetry(), 1e-15);
}

TEST(OrthoBasis, RandomBasisIsOrthonormal) {
  Rng rng(3);
  const OrthoBasis b = OrthoBasis::random(6, rng);
  const Matrix g = b.matrix().transpose() * b.matrix();
  EXPECT_LE((g - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(OrthoBasis, RejectsNonOrthonormal) {
  Matrix m = Matrix::Identity(3, 3);
  m(0, 1) = 1e-6;
  EXPECT_THROW(OrthoBasis{m}, std::invalid_argument);
  EXPECT_THROW(OrthoBasis(Matrix::Identity(2, 3)), DimensionMismatch);
  Matrix scaled = 2.0 * Matrix::Identity(2, 2);
  EXPECT_THROW(OrthoBasis{scaled}, std::invalid_argument);
}

TEST(MakeOrthogonalTensor, StandardBasisIsDiagonal) {
  const int d = 3;
  const Tensor4 t = make_orthogonal_tensor(OrthoBasis::identity(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          const bool diag = i == j && j == k && k == l;
          EXPECT_EQ(t(i, j, k, l), diag ? 1.0 : 0.0);
        }
}

TEST(MakeOrthogonalTensor, ScalarCase) {
  const Tensor4 t = make_orthogonal_tensor(OrthoBasis::identity(1));
  ASSERT_EQ(t.entries().size(), 1u);
  EXPECT_EQ(t(0, 0, 0, 0), 1.0);
}

TEST(MakeOrthogonalTensor, FormsAgainstItsOwnBasis) {
  Rng rng(4);
  const Matrix a = random_orthonormal(3, rng);
  const auto t = tensor_from(a);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double v = brute_form(*t, a.col(i), a.col(i), a.col(j), a.col(j));
      EXPECT_NEAR(v, i == j ? 1.0 : 0.0, 1e-12);
    }
}

TEST(FormScalar, StandardBasisExamples) {
  const Tensor4 t = make_orthogonal_tensor(OrthoBasis::identity(4));
  const Vector e1 = unit(4, 0), e2 = unit(4, 1);
  EXPECT_DOUBLE_EQ(form_scalar(t, e1, e1, e1, e1), 1.0);
  EXPECT_DOUBLE_EQ(form_scalar(t, e1, e1, e2, e2), 0.0);
}

TEST(FormScalar, SumOfFourthPowersOfCoordinates) {
  Rng rng(5);
  const Matrix a = random_orthonormal(5, rng);
  const auto t = tensor_from(a);
  const Vector x = rng.gaussian(5);
  const Vector u = a * x;
  EXPECT_NEAR(form_scalar(*t, u, u, u, u), x.array().pow(4).sum(), 1e-12);
  EXPECT_NEAR(dense::form_scalar(*t, u, u, u, u), x.array().pow(4).sum(), 1e-11);
}

TEST(FormScalar, MatchesBruteForceAndRejectsBadDimensions) {
  Rng rng(6);
  const auto t = tensor_from(random_orthonormal(4, rng));
  const Vector u = rng.gaussian(4), v = rng.gaussian(4), w = rng.gaussian(4), z = rng.gaussian(4);
  EXPECT_NEAR(form_scalar(*t, u, v, w, z), brute_form(*t, u, v, w, z), 1e-12);
  EXPECT_THROW(form_scalar(*t, u, v, w, rng.gaussian(3)), DimensionMismatch);
  EXPECT_THROW(form_vector(*t, rng.gaussian(5)), DimensionMismatch);
  EXPECT_THROW(form_matrix(*t, rng.gaussian(2)), DimensionMismatch);
}

TEST(FormVector, StandardBasisExamples) {
  const Tensor4 t = make_orthogonal_tensor(OrthoBasis::identity(4));
  EXPECT_LE((form_vector(t, unit(4, 0)) - unit(4, 0)).norm(), 1e-15);
  const Vector u = (unit(4, 0) + unit(4, 1)) / std::sqrt(2.0);
  Vector want = Vector::Zero(4);
  want(0) = want(1) = std::pow(2.0, -1.5);
  EXPECT_LE((form_vector(t, u) - want).norm(), 1e-15);
}

TEST(FormVector, MatchesBruteForce) {
  Rng rng(7);
  const int d = 4;
  const auto t = tensor_from(random_orthonormal(d, rng));
  const Vector u = rng.gaussian(d);
  Vector want = Vector::Zero(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) want(i) += (*t)(i, j, k, l) * u(j) * u(k) * u(l);
  EXPECT_LE(rel_err(form_vector(*t, u), want), 1e-12);
  EXPECT_LE(rel_err(dense::form_vector(*t, u, u, u), want), 1e-12);
}

TEST(FormMatrix, Examples) {
  const Tensor4 t = make_orthogonal_tensor(OrthoBasis::identity(3));
  Matrix want = Matrix::Zero(3, 3);
  want(0, 0) = 1.0;
  EXPECT_LE((form_matrix(t, unit(3, 0)) - want).norm(), 1e-15);
  EXPECT_EQ(form_matrix(t, Vector::Zero(3)).norm(), 0.0);
}

TEST(FormMatrix, MatchesBruteForce) {
  Rng rng(8);
  const int d = 4;
  const auto t = tensor_from(random_orthonormal(d, rng));
  const Vector u = rng.gaussian(d);
  Matrix want = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) want(i, j) += (*t)(i, j, k, l) * u(k) * u(l);
  EXPECT_LE(rel_err(form_matrix(*t, u), want), 1e-12);
  EXPECT_LE(rel_err(dense::form_matrix(*t, u, u), want), 1e-12);
}

TEST(ComponentMatrix, FeasibilityAndFlattening) {
  Rng rng(9);
  const ComponentMatrix u = ComponentMatrix::random_feasible(4, rng);
  EXPECT_TRUE(u.is_feasible());
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(u.row(i).norm(), 1.0, 1e-10);
  const ComponentMatrix back = ComponentMatrix::from_flat(4, u.flat());
  EXPECT_EQ((back.rows() - u.rows()).norm(), 0.0);
  EXPECT_EQ(u.flat().segment(4, 4), u.row(1));
  EXPECT_FALSE(ComponentMatrix(2.0 * Matrix::Identity(3, 3)).is_feasible());
  EXPECT_THROW(ComponentMatrix(Matrix::Zero(2, 3)), DimensionMismatch);
}

TEST(ReconstructionError, ZeroAtGroundTruthAndSignedPermutations) {
  Rng rng(10);
  const Matrix a = random_orthonormal(4, rng);
  const auto t = tensor_from(a);
  EXPECT_LE(reconstruction_error(*t, ComponentMatrix(a.transpose())), 1e-12);
  Matrix perm(4, 4);
  perm.row(0) = -a.col(2).transpose();
  perm.row(1) = a.col(0).transpose();
  perm.row(2) = -a.col(3).transpose();
  perm.row(3) = a.col(1).transpose();
  EXPECT_LE(reconstruction_error(*t, ComponentMatrix(perm)), 1e-12);
  EXPECT_LE(dense::reconstruction_error(*t, ComponentMatrix(perm)), 1e-12);
}

TEST(ReconstructionError, MatchesDirectSum) {
  Rng rng(11);
  const int d = 3;
  const auto t = tensor_from(random_orthonormal(d, rng));
  const ComponentMatrix u = ComponentMatrix::random_feasible(d, rng);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          double r = (*t)(i, j, k, l);
          den += r * r;
          for (int c = 0; c < d; ++c) r -= u.rows()(c, i) * u.rows()(c, j) * u.rows()(c, k) * u.rows()(c, l);
          num += r * r;
        }
  EXPECT_NEAR(reconstruction_error(*t, u), num / den, 1e-12);
  EXPECT_NEAR(dense::reconstruction_error(*t, u), num / den, 1e-12);
}

TEST(ReconstructionError, IdentityComponentsInTwoDimensions) {
  const Tensor4 t = make_orthogonal_tensor(OrthoBasis::identity(2));
  EXPECT_NEAR(reconstruction_error(t, ComponentMatrix(Matrix::Identity(2, 2))), 0.0, 1e-15);
  Matrix u(2, 2);
  u << 1.0, 0.0, 1.0, 0.0;
  // T − 2 e1⊗4 − 0 leaves −e1⊗4 + e2⊗4: squared norm 2 over ‖T‖² = 2.
  EXPECT_NEAR(reconstruction_error(t, ComponentMatrix(u)), 1.0, 1e-15);
}

TEST(ReconstructionError, RejectsZeroTensor) {
  const Tensor4 zero(2, std::vector<double>(16, 0.0));
  EXPECT_THROW(reconstruction_error(zero, ComponentMatrix(Matrix::Identity(2, 2))), std::invalid_argument);
}

TEST(TensorIo, RoundTripKeepsEveryEntry) {
  Rng rng(12);
  const Tensor4 t = make_orthogonal_tensor(OrthoBasis::random(3, rng));
  std::stringstream ss;
  write_tensor(ss, t);
  const Tensor4 back = read_tensor(ss);
  ASSERT_EQ(back.dim(), 3);
  EXPECT_EQ(back.entries(), t.entries());
}

TEST(TensorIo, RejectsMalformedInput) {
  std::stringstream no_header("1 2 3");
  EXPECT_THROW(read_tensor(no_header), std::invalid_argument);
  std::stringstream short_body("d=2\n1 2 3\n");
  EXPECT_THROW(read_tensor(short_body), DimensionMismatch);
  std::stringstream junk("d=1\nabc\n");
  EXPECT_THROW(read_tensor(junk), std::invalid_argument);
}

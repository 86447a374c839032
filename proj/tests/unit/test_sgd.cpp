#include "helpers.hpp"

#include "ssgd/analysis.hpp"
#include "ssgd/ica.hpp"
#include "ssgd/sgd.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace ssgd;
using namespace testing_helpers;

namespace {

class ZeroObjective final : public Objective {
 public:
  explicit ZeroObjective(int d) : d_(d) {}
  int dim() const override { return d_; }
  double value(const Vector&) const override { return 0.0; }
  Vector gradient(const Vector& w) const override { return Vector::Zero(w.size()); }
  Matrix hessian(const Vector& w) const override { return Matrix::Zero(w.size(), w.size()); }

 private:
  int d_;
};

SgdConfig quiet(double eta, long iters) {
  SgdConfig c;
  c.eta = eta;
  c.iterations = iters;
  c.noise_scale = 0.0;
  c.record_timing = false;
  return c;
}

}  // namespace

TEST(UnitSphereNoise, AlwaysUnitNorm) {
  Rng rng(1);
  for (int k = 0; k < 100; ++k) EXPECT_NEAR(unit_sphere_noise(4, rng).norm(), 1.0, 1e-14);
}

TEST(UnitSphereNoise, OneDimensionalSignsAreBalanced) {
  Rng rng(2);
  int plus = 0;
  for (int k = 0; k < 10000; ++k) {
    const Vector n = unit_sphere_noise(1, rng);
    ASSERT_EQ(std::abs(n(0)), 1.0);
    plus += n(0) > 0;
  }
  EXPECT_NEAR(plus / 10000.0, 0.5, 0.05);
}

TEST(UnitSphereNoise, CoordinateMeansNearZero) {
  Rng rng(3);
  Vector sum = Vector::Zero(3);
  for (int k = 0; k < 100000; ++k) sum += unit_sphere_noise(3, rng);
  EXPECT_LE((sum / 100000.0).cwiseAbs().maxCoeff(), 0.01);
}

TEST(LrSchedule, Examples) {
  SgdConfig c;
  c.eta = 0.05;
  EXPECT_EQ(lr_schedule(c, 999), 0.05);
  c.schedule = Schedule::InverseT;
  EXPECT_EQ(lr_schedule(c, 0), 0.05);
  EXPECT_DOUBLE_EQ(lr_schedule(c, 9), 0.005);
  c.decay_offset = 100.0;
  EXPECT_EQ(lr_schedule(c, 50), 0.05);
  EXPECT_DOUBLE_EQ(lr_schedule(c, 199), 0.025);
}

TEST(SgdConfig, Validation) {
  EXPECT_NO_THROW(SgdConfig{}.validate());
  SgdConfig c;
  c.iterations = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SgdConfig{};
  c.eta = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SgdConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SgdConfig{};
  c.decay_offset = 0.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = SgdConfig{};
  c.noise_scale = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(NoisySgd, ZeroObjectiveWithoutNoiseStaysPut) {
  ZeroObjective z(3);
  const Vector w0 = (Vector(3) << 1.0, -2.0, 0.5).finished();
  SgdConfig c = quiet(0.05, 50);
  c.record_iterates = true;
  Rng rng(4);
  const RunRecord r = noisy_sgd(z, nullptr, w0, c, rng);
  ASSERT_TRUE(r.ok());
  for (const auto& w : r.iterates) EXPECT_EQ(w, w0);
  EXPECT_EQ(r.final_point, w0);
}

TEST(NoisySgd, HalfSquaredNormContractsGeometrically) {
  const auto q = quadratic_objective(Vector::Zero(3), Vector::Zero(3), Matrix::Identity(3, 3));
  const Vector w0 = (Vector(3) << 1.0, 2.0, -3.0).finished();
  const double eta = 0.03;
  Rng rng(5);
  const RunRecord r = noisy_sgd(*q, nullptr, w0, quiet(eta, 200), rng);
  ASSERT_EQ(r.steps, 200);
  EXPECT_LE((r.final_point - std::pow(1.0 - eta, 200) * w0).norm(), 1e-14);
}

TEST(NoisySgd, QuadraticWithRecordedNoiseMatchesCouplingForm) {
  Rng setup(6);
  const int d = 4;
  const Matrix b = setup.gaussian(d, d);
  const Matrix h = 0.5 * (b + b.transpose());
  const Vector w0 = setup.gaussian(d);
  const Vector g = setup.gaussian(d);
  const auto q = quadratic_objective(w0, g, h);
  SgdConfig c = quiet(0.01, 300);
  c.noise_scale = 1.0;
  c.record_perturbations = true;
  Rng rng(7);
  const RunRecord r = noisy_sgd(*q, nullptr, w0, c, rng);
  ASSERT_EQ(static_cast<long>(r.perturbations.size()), 300);
  const CouplingState s = coupling_closed_form(g, h, r.perturbations, c.eta, 300);
  // H is indefinite, so the iterates grow; compare relative to their size.
  EXPECT_LE(rel_err(s.displacement, r.final_point - w0), 1e-12);
  EXPECT_LE(rel_err(s.gradient, q->gradient(r.final_point)), 1e-12);
}

TEST(NoisySgd, DeterministicForFixedSeed) {
  Rng setup(8);
  const Matrix a = random_orthonormal(3, setup);
  const auto p = correlation_objective(tensor_from(a));
  const auto sampler = make_sampler(SampleModel::FourthMoment, OrthoBasis(a));
  SgdConfig c;
  c.iterations = 500;
  c.record_timing = false;
  c.seed = 42;
  Rng s1(c.seed), s2(c.seed);
  const Vector w0 = p.random_feasible(setup);
  const RunRecord r1 = projected_noisy_sgd(p, sampler.get(), w0, c, s1);
  const RunRecord r2 = projected_noisy_sgd(p, sampler.get(), w0, c, s2);
  EXPECT_EQ(r1.final_point, r2.final_point);
  EXPECT_EQ(r1.f, r2.f);
  EXPECT_EQ(r1.grad_norm, r2.grad_norm);
  std::ostringstream o1, o2;
  write_run_csv(o1, r1);
  write_run_csv(o2, r2);
  EXPECT_EQ(o1.str(), o2.str());
}

TEST(NoisySgd, ObserverCanStopEarly) {
  const auto q = quadratic_objective(Vector::Zero(2), Vector::Zero(2), Matrix::Identity(2, 2));
  Rng rng(9);
  const RunRecord r = noisy_sgd(*q, nullptr, Vector::Ones(2), quiet(0.01, 100), rng,
                                [](long step, const Vector&) { return step < 10; });
  EXPECT_EQ(r.status, RunStatus::Stopped);
  EXPECT_EQ(r.steps, 10);
  EXPECT_TRUE(r.ok());
}

TEST(NoisySgd, DivergenceIsReportedNotThrown) {
  const auto q = quadratic_objective(Vector::Zero(1), Vector::Zero(1), Matrix::Constant(1, 1, -1000.0));
  SgdConfig c = quiet(0.1, 10000);
  c.divergence_bound = 1e6;
  Rng rng(10);
  const RunRecord r = noisy_sgd(*q, nullptr, Vector::Ones(1), c, rng);
  EXPECT_EQ(r.status, RunStatus::Diverged);
  EXPECT_FALSE(r.ok());
  EXPECT_FALSE(r.diagnostic.empty());
}

TEST(ProjectedSgd, StaysAtExactMinimumWithoutNoise) {
  Rng setup(11);
  const Matrix a = random_orthonormal(4, setup);
  const auto p = correlation_objective(tensor_from(a));
  Matrix u(4, 4);
  u.row(0) = -a.col(2).transpose();
  u.row(1) = a.col(0).transpose();
  u.row(2) = a.col(3).transpose();
  u.row(3) = -a.col(1).transpose();
  const Vector w0 = flatten_rows(u);
  Rng rng(12);
  const RunRecord r = projected_noisy_sgd(p, nullptr, w0, quiet(0.05, 100), rng);
  EXPECT_LE((r.final_point - w0).norm(), 1e-14);
}

TEST(ProjectedSgd, IteratesRemainFeasible) {
  Rng setup(13);
  const Matrix a = random_orthonormal(5, setup);
  const auto p = correlation_objective(tensor_from(a));
  const auto sampler = make_sampler(SampleModel::FourthMoment, OrthoBasis(a));
  SgdConfig c;
  c.eta = 0.01;
  c.iterations = 300;
  c.record_iterates = true;
  Rng rng(14);
  const RunRecord r = projected_noisy_sgd(p, sampler.get(), p.random_feasible(rng), c, rng);
  ASSERT_TRUE(r.ok());
  for (const auto& w : r.iterates)
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(w.segment(i * 5, 5).norm(), 1.0, 1e-10);
}

TEST(ProjectedSgd, InfeasibleStartRejected) {
  const auto p = maxeig_objective(tensor_from(Matrix::Identity(2, 2)));
  Rng rng(15);
  EXPECT_THROW(projected_noisy_sgd(p, nullptr, Vector::Ones(2), quiet(0.01, 10), rng), std::invalid_argument);
}

TEST(ProjectedSgd, CorrelationConvergesNearAMinimum) {
  Rng setup(16);
  const Matrix a = random_orthonormal(4, setup);
  const auto p = correlation_objective(tensor_from(a));
  const auto sampler = make_sampler(SampleModel::FourthMoment, OrthoBasis(a));
  SgdConfig c;
  c.eta = 0.005;
  c.iterations = 10000;
  c.record_every = 100;
  c.record_timing = false;
  Rng rng(17);
  const RunRecord r = projected_noisy_sgd(p, sampler.get(), p.random_feasible(rng), c, rng);
  ASSERT_TRUE(r.ok());
  ASSERT_TRUE(r.recon_error.back().has_value());
  EXPECT_LT(*r.recon_error.back(), 1e-2);
  EXPECT_EQ(r.noise_bound_violations, 0);
}

TEST(ProjectedSgd, RecordEveryThinsTheTrace) {
  const auto p = maxeig_objective(tensor_from(Matrix::Identity(3, 3)));
  SgdConfig c = quiet(0.01, 100);
  c.record_every = 25;
  Rng rng(18);
  const RunRecord r = projected_noisy_sgd(p, nullptr, p.random_feasible(rng), c, rng);
  ASSERT_FALSE(r.iter.empty());
  EXPECT_EQ(r.iter.front(), 0);
  EXPECT_EQ(r.iter.back(), 100);
  EXPECT_EQ(r.iter.size(), r.f.size());
  EXPECT_EQ(r.iter.size(), r.grad_norm.size());
}

TEST(RunCsv, HeaderAndEmptyMetricColumn) {
  const auto p = maxeig_objective(tensor_from(Matrix::Identity(2, 2)));
  Rng rng(19);
  const RunRecord r = projected_noisy_sgd(p, nullptr, p.random_feasible(rng), quiet(0.01, 2), rng);
  std::ostringstream os;
  write_run_csv(os, r);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "iter,f,grad_norm,recon_error,elapsed_ms");
  std::getline(is, line);
  EXPECT_NE(line.find(",,"), std::string::npos);
}

TEST(RunStatus, Names) {
  EXPECT_STREQ(to_string(RunStatus::Completed), "completed");
  EXPECT_STREQ(to_string(RunStatus::Diverged), "diverged");
}

#include "ssgd/ica.hpp"
#include "ssgd/verify.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace ssgd;

namespace {

const CheckResult* find(const std::vector<CheckResult>& rs, const std::string& name) {
  auto it = std::find_if(rs.begin(), rs.end(), [&](const CheckResult& r) { return r.name == name; });
  return it == rs.end() ? nullptr : &*it;
}

}  // namespace

TEST(Verify, DefaultBatteryPasses) {
  const auto rs = run_verification(VerifyOptions{});
  ASSERT_FALSE(rs.empty());
  for (const auto& r : rs) EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
}

TEST(Verify, SmallerDimensionRunsTheSameChecks) {
  VerifyOptions small;
  small.d = 3;
  small.points = 5;
  const auto a = run_verification(small);
  const auto b = run_verification(VerifyOptions{});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_TRUE(a[i].passed) << a[i].name << ": " << a[i].detail;
  }
}

TEST(Verify, InjectedSignErrorFailsUnbiasedness) {
  VerifyOptions o;
  o.d = 3;
  o.fault = Fault::IcaSignFlip;
  const auto rs = run_verification(o);
  const CheckResult* r = find(rs, "ica_gradient_unbiased");
  ASSERT_NE(r, nullptr);
  EXPECT_FALSE(r->passed);
}

TEST(Verify, CustomOracleOverridesFault) {
  VerifyOptions o;
  o.d = 3;
  o.fault = Fault::IcaSignFlip;
  o.ica_gradient = [](const Matrix& u, const Vector& y) { return ica::ica_stochastic_gradient(u, y); };
  const CheckResult* r = find(run_verification(o), "ica_gradient_unbiased");
  ASSERT_NE(r, nullptr);
  EXPECT_TRUE(r->passed) << r->detail;
}

TEST(Verify, FaultyOracleDiffersOnlyInTheSampleTerm) {
  Rng rng(1);
  const Matrix u = rng.gaussian(3, 3);
  EXPECT_EQ(faulty_ica_gradient(u, Vector::Zero(3)), ica::ica_stochastic_gradient(u, Vector::Zero(3)));
  const Vector y = rng.gaussian(3);
  EXPECT_GT((faulty_ica_gradient(u, y) - ica::ica_stochastic_gradient(u, y)).norm(), 1e-6);
}

TEST(Verify, DeterministicForSeed) {
  VerifyOptions o;
  o.d = 3;
  o.seed = 9;
  const auto a = run_verification(o);
  const auto b = run_verification(o);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].detail, b[i].detail);
}

TEST(Verify, RejectsBadOptions) {
  VerifyOptions o;
  o.d = 0;
  EXPECT_THROW(run_verification(o), std::invalid_argument);
  o.d = 3;
  o.points = 0;
  EXPECT_THROW(run_verification(o), std::invalid_argument);
}

#pragma once

#include "ssgd/common.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ssgd {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Single-sample ICA gradient oracle: (U rows, y) -> flat d² gradient.
using IcaGradientFn = std::function<Vector(const Matrix&, const Vector&)>;

/// Deliberate defects for exercising the battery itself.
enum class Fault { None, IcaSignFlip };

/// The ICA oracle with the sign of its ⟨u_j,y⟩²⟨u_i,y⟩y term flipped.
Vector faulty_ica_gradient(const Matrix& u_rows, const Vector& y);

struct VerifyOptions {
  int d = 5;
  std::uint64_t seed = 0;
  int points = 20;
  Fault fault = Fault::None;
  /// Overrides the ICA oracle under test when set (takes precedence over fault).
  IcaGradientFn ica_gradient;
};

/// Runs the invariant battery: tensor symmetry and form consistency,
/// derivative checks against finite differences, closed-form multipliers,
/// ICA expectation and unbiasedness, sampler unbiasedness, RLICQ, geometry
/// inequalities, maxeig eigenvalue claims, the d = 2 minima count and the
/// coupling closed form.
std::vector<CheckResult> run_verification(const VerifyOptions& options);

}  // namespace ssgd

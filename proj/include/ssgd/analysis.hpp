#pragma once

#include "ssgd/common.hpp"
#include "ssgd/manifold.hpp"
#include "ssgd/objectives.hpp"
#include "ssgd/sgd.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ssgd {

using ScalarFn = std::function<double(const Vector&)>;

/// 1e-5 · max(1, ‖w‖).
double default_fd_step(const Vector& w);
/// 1e-3 · max(1, ‖w‖). Larger than the gradient step because fd_hessian
/// divides by h² but cancels the O(h²) error by extrapolation.
double default_fd_hessian_step(const Vector& w);

/// Central differences. Throws NonFiniteValue if any evaluation is not finite.
Vector fd_gradient(const ScalarFn& f, const Vector& w, double h);
Vector fd_gradient(const ScalarFn& f, const Vector& w);
/// Central second differences at steps h and 2h combined by Richardson
/// extrapolation (error O(h⁴)), then symmetrized.
Matrix fd_hessian(const ScalarFn& f, const Vector& w, double h);
Matrix fd_hessian(const ScalarFn& f, const Vector& w);

/// w ↦ f(w) − Σ λ_i c_i(w) with λ held fixed.
ScalarFn lagrangian_at(const ConstrainedProblem& problem, const Vector& lambda);

enum class PointClass { LargeGradient, NegativeCurvature, NearLocalMinimum, Unclassified };

const char* to_string(PointClass c);

struct SaddleReport {
  Vector point;
  PointClass classification = PointClass::Unclassified;
  SaddleParams params;
  double chi_norm = 0.0;
  /// The gradient threshold actually applied: max(ε, rounding floor).
  double effective_epsilon = 0.0;
  /// Set from the second branch on.
  std::optional<double> min_tangent_eig;
  Vector witness;
  /// Set when a candidate minimum was located (even if too far away).
  std::optional<Vector> matched_minimum;
  double minimum_distance = 0.0;
  std::string minimum_source;
  /// Smallest tangent eigenvalue of 𝔐 over the sampled 2δ neighborhood.
  std::optional<double> neighborhood_min_eig;
  int neighborhood_samples = 0;
};

struct MinimaEntry {
  Vector point;
  double f = 0.0;
  double min_tangent_eig = 0.0;
  int hits = 0;
};

struct MinimaCatalog {
  std::vector<MinimaEntry> entries;
  double dedup_threshold = 1e-3;
  int starts = 0;
  /// Starts whose polished endpoint was not a strict local minimum.
  int rejected = 0;

  /// Nearest entry and its distance, or nullopt for an empty catalog.
  std::optional<std::pair<const MinimaEntry*, double>> nearest(const Vector& w) const;
};

/// ‖χ‖ below this many ulps of max(1, ‖∇f‖) is treated as rounding noise.
inline constexpr double kChiRoundingUlps = 64.0;

struct ClassifyOptions {
  /// Used first when given; otherwise known analytic minima; otherwise polish.
  const MinimaCatalog* catalog = nullptr;
  int neighborhood_samples = 16;
  std::uint64_t seed = 0;
};

/// Assigns the first branch of the strict-saddle definition that holds:
/// ‖χ‖ ≥ ε (floored at the rounding level), then λ_min ≤ −γ on 𝒯(w), then a local minimum within δ whose
/// 2δ neighborhood (sampled) has tangent curvature ≥ α.
SaddleReport classify_point(const ConstrainedProblem& problem, const Vector& w,
                            const SaddleParams& params, const ClassifyOptions& options = {});

/// Nearest minimum among those known in closed form (±a_i for maxeig,
/// signed permutations of the basis for component problems), if the problem
/// carries a tensor with a known basis.
std::optional<Vector> nearest_known_minimum(const ConstrainedProblem& problem, const Vector& w);

struct PolishResult {
  Vector point;
  double chi_norm = 0.0;
  long steps = 0;
};

/// Projected exact-gradient descent until ‖χ‖ ≤ tol or max_steps.
PolishResult polish(const ConstrainedProblem& problem, const Vector& w0, double tol = 1e-10,
                    long max_steps = 20000);

struct MinimaOptions {
  double dedup_threshold = 1e-3;
  /// Endpoints need λ_min(𝔐|𝒯) above this to count as strict minima.
  double curvature_floor = 1e-6;
  const Sampler* sampler = nullptr;
  int workers = 0;  ///< 0: hardware concurrency
};

/// Multi-start projected noisy SGD from random feasible points (substream k
/// of config.seed for start k), each endpoint polished and kept if it is a
/// strict local minimum. Entries are sorted lexicographically.
MinimaCatalog enumerate_minima(const ConstrainedProblem& problem, int n_starts,
                               const SgdConfig& config, const MinimaOptions& options = {});

struct CouplingState {
  Vector gradient;      ///< ∇f̃(w̃_t)
  Vector displacement;  ///< w̃_t − w₀
};

/// SGD on f̃(w) = gᵀ(w−w₀) + ½(w−w₀)ᵀH(w−w₀) with perturbations ξ_τ:
///   ∇f̃(w̃_t) = (I−ηH)ᵗ g − ηH Σ_{τ<t} (I−ηH)^{t−τ−1} ξ_τ
///   w̃_t − w₀ = −η Σ_{τ<t} (I−ηH)^τ g − η Σ_{τ<t} (I−ηH)^{t−τ−1} ξ_τ
/// evaluated in the eigenbasis of H.
CouplingState coupling_closed_form(const Vector& g, const Matrix& h,
                                   const std::vector<Vector>& noise_stream, double eta, long t);

struct EscapeOptions {
  /// Defaults to max(0.1·|f(saddle)|, 1e-3).
  std::optional<double> threshold;
  const Sampler* sampler = nullptr;
  int workers = 0;
};

struct EscapeStats {
  int trials = 0;
  int escaped = 0;
  double escape_fraction = 0.0;
  /// Median over escaped trials; NaN when none escaped.
  double median_steps = 0.0;
  double mean_f_decrease = 0.0;
  double threshold = 0.0;
  double saddle_value = 0.0;
  std::vector<long> steps;  ///< per trial; −1 when it did not escape
  double max_displacement = 0.0;
};

/// Trial k runs projected noisy SGD from the saddle with Rng(config.seed)
/// .substream(k) and stops as soon as f < f(saddle) − threshold.
EscapeStats escape_statistics(const ConstrainedProblem& problem, const Vector& saddle,
                              int n_trials, const SgdConfig& config,
                              const EscapeOptions& options = {});

/// Parameters for maxeig: ε₀ = (10d)⁻⁴, ε = 4ε₀², δ = 2dε₀, γ = 7/d, α = 3.
SaddleParams maxeig_saddle_params(int d);
/// Parameters for the halved correlation objective: α = 1; γ, ε, δ are
/// chosen polynomially small in d (γ = 1/d², ε = 1e-8, δ = 1/(10d)).
SaddleParams correlation_saddle_params(int d);

/// (1/√p) Σ_{i∈support} a_i.
Vector balanced_saddle(const OrthoBasis& basis, const std::vector<int>& support);
/// Rows sign_i · a_{perm_i}, flattened.
Vector signed_permutation(const OrthoBasis& basis, const std::vector<int>& perm,
                          const std::vector<int>& signs);

/// Runs fn(k) for k in [0, n) on up to `workers` threads. Each k runs once.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

void write_report(std::ostream& os, const SaddleReport& report);
/// Header index,f,min_tangent_eig,hits,point (point entries ';'-separated).
void write_catalog_csv(std::ostream& os, const MinimaCatalog& catalog);

}  // namespace ssgd

#pragma once

#include "ssgd/common.hpp"
#include "ssgd/objectives.hpp"
#include "ssgd/rng.hpp"
#include "ssgd/sampler.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ssgd {

enum class Schedule { Constant, InverseT };

struct SgdConfig {
  double eta = 0.01;
  double eta_max = 0.1;
  long iterations = 10000;
  /// Target accuracy. Informational: the iteration budget is set directly.
  double kappa = 1e-2;
  Schedule schedule = Schedule::Constant;
  /// InverseT uses η·min(1, t₀/(t+1)); t₀ = 1 gives η/(t+1).
  double decay_offset = 1.0;
  double noise_scale = 1.0;
  int batch_size = 1;
  std::uint64_t seed = 0;
  long record_every = 1;
  double divergence_bound = 1e12;
  /// When false, elapsed_ms is written as 0 so traces are byte-reproducible.
  bool record_timing = true;
  bool record_iterates = false;
  /// Keep ξ_t = SG(w_t) − ∇f(w_t) + n_t for every step (costs one exact
  /// gradient per step).
  bool record_perturbations = false;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

enum class RunStatus { Completed, Stopped, Diverged, DegenerateProjection, NonFinite };

const char* to_string(RunStatus s);

struct RunRecord {
  std::vector<long> iter;
  std::vector<double> f;
  /// ‖χ(w)‖ for constrained runs, ‖∇f(w)‖ otherwise.
  std::vector<double> grad_norm;
  std::vector<std::optional<double>> recon_error;
  std::vector<double> elapsed_ms;
  std::vector<Vector> iterates;
  Vector final_point;
  long steps = 0;
  RunStatus status = RunStatus::Completed;
  std::string diagnostic;

  /// Checks of ‖ξ‖ ≤ Q + noise_scale on recorded steps, and failures.
  long noise_checks = 0;
  long noise_bound_violations = 0;
  double max_perturbation = 0.0;
  std::vector<Vector> perturbations;

  bool ok() const { return status == RunStatus::Completed || status == RunStatus::Stopped; }
};

/// Called after every step with the step count and the new iterate; return
/// false to stop the run early (status Stopped).
using StepObserver = std::function<bool(long step, const Vector& w)>;

/// Uniform on the unit sphere of R^dim: a normalized standard Gaussian.
Vector unit_sphere_noise(int dim, Rng& rng);

double lr_schedule(const SgdConfig& config, long t);

/// w ← w − η_t (SG(w) + n), unconstrained. With a null sampler the exact
/// gradient replaces SG. Never throws on numerical trouble; the record's
/// status and diagnostic say what happened.
RunRecord noisy_sgd(const Objective& objective, const Sampler* sampler, const Vector& w0,
                    const SgdConfig& config, Rng& rng, const StepObserver& observer = {});

/// w ← Π_𝒲(w − η_t (SG(w) + n)). w0 must be feasible.
RunRecord projected_noisy_sgd(const ConstrainedProblem& problem, const Sampler* sampler,
                              const Vector& w0, const SgdConfig& config, Rng& rng,
                              const StepObserver& observer = {});

/// Header iter,f,grad_norm,recon_error,elapsed_ms; recon_error is empty when
/// not applicable.
void write_run_csv(std::ostream& os, const RunRecord& record);

}  // namespace ssgd

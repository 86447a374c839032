#include "ssgd/sgd.hpp"

#include "ssgd/manifold.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace ssgd {

Matrix Sampler::draw_batch(Rng& rng, int k) const {
  if (k < 1) throw std::invalid_argument("Sampler::draw_batch: batch size must be positive");
  Matrix out(dim(), k);
  for (int j = 0; j < k; ++j) out.col(j) = draw(rng);
  return out;
}

void SgdConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be positive");
  if (!(eta <= eta_max)) throw std::invalid_argument("eta must not exceed eta_max");
  if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  if (!(decay_offset >= 1.0)) throw std::invalid_argument("decay_offset must be at least 1");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw std::invalid_argument("noise_scale must be finite and nonnegative");
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (record_every < 1) throw std::invalid_argument("record_every must be at least 1");
  if (!(divergence_bound > 0.0)) throw std::invalid_argument("divergence_bound must be positive");
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::Stopped: return "stopped";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::DegenerateProjection: return "degenerate_projection";
    case RunStatus::NonFinite: return "non_finite";
  }
  return "unknown";
}

Vector unit_sphere_noise(int dim, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("unit_sphere_noise: dim must be positive");
  Vector g = rng.gaussian(dim);
  double n = g.norm();
  while (n == 0.0) {  // probability zero, but keep the result well defined
    g = rng.gaussian(dim);
    n = g.norm();
  }
  return g / n;
}

double lr_schedule(const SgdConfig& config, long t) {
  if (t < 0) throw std::invalid_argument("lr_schedule: t must be nonnegative");
  if (config.schedule == Schedule::Constant) return config.eta;
  return config.eta * std::min(1.0, config.decay_offset / static_cast<double>(t + 1));
}

namespace {

class Runner {
 public:
  Runner(const Objective& objective, const ConstraintSet* constraints,
         std::shared_ptr<const Tensor4> tensor, const Sampler* sampler, const SgdConfig& config,
         Rng& rng)
      : objective_(objective),
        stochastic_(dynamic_cast<const StochasticObjective*>(&objective)),
        constraints_(constraints),
        tensor_(std::move(tensor)),
        sampler_(sampler),
        config_(config),
        rng_(rng) {
    config_.validate();
    if (sampler_ && !stochastic_) {
      throw std::invalid_argument("a sampler requires a stochastic objective");
    }
  }

  RunRecord run(const Vector& w0, const StepObserver& observer) {
    require_dim(w0.size(), objective_.dim(), "initial point");
    if (!w0.allFinite()) throw std::invalid_argument("initial point must be finite");
    if (constraints_ && !constraints_->is_feasible(w0, 1e-8)) {
      throw std::invalid_argument("initial point is not feasible");
    }
    start_ = std::chrono::steady_clock::now();
    const double q = stochastic_ && sampler_ ? stochastic_->oracle_bound() : 0.0;
    const int n = objective_.dim();

    Vector w = w0;
    record(0, w);
    long t = 0;
    try {
      for (; t < config_.iterations; ++t) {
        const double lr = lr_schedule(config_, t);
        Vector sg;
        if (sampler_) {
          sg = stochastic_->stochastic_gradient(w, sampler_->draw_batch(rng_, config_.batch_size));
        } else {
          sg = objective_.gradient(w);
        }
        Vector noise = Vector::Zero(n);
        if (config_.noise_scale > 0.0) noise = config_.noise_scale * unit_sphere_noise(n, rng_);

        const long step = t + 1;
        const bool recorded = step % config_.record_every == 0 || step == config_.iterations;
        if (config_.record_perturbations || recorded) {
          const Vector xi = sg - objective_.gradient(w) + noise;
          const double xn = xi.norm();
          rec_.max_perturbation = std::max(rec_.max_perturbation, xn);
          ++rec_.noise_checks;
          if (xn > q + config_.noise_scale + 1e-9 * (1.0 + q)) ++rec_.noise_bound_violations;
          if (config_.record_perturbations) rec_.perturbations.push_back(xi);
        }

        Vector next = w - lr * (sg + noise);
        if (!next.allFinite()) return fail(RunStatus::NonFinite, step, w, "non-finite iterate");
        if (constraints_) next = constraints_->project(next);
        if (next.norm() > config_.divergence_bound) {
          return fail(RunStatus::Diverged, step, w, "iterate norm exceeded divergence bound");
        }
        w = std::move(next);
        rec_.steps = step;
        if (recorded) {
          record(step, w);
          if (!std::isfinite(rec_.f.back())) return fail(RunStatus::NonFinite, step, w, "non-finite f");
          if (std::abs(rec_.f.back()) > config_.divergence_bound) {
            return fail(RunStatus::Diverged, step, w, "|f| exceeded divergence bound");
          }
        }
        if (observer && !observer(step, w)) {
          if (!recorded) record(step, w);
          rec_.status = RunStatus::Stopped;
          break;
        }
      }
    } catch (const DegenerateProjection& e) {
      return fail(RunStatus::DegenerateProjection, t + 1, w, e.what());
    } catch (const NonFiniteValue& e) {
      return fail(RunStatus::NonFinite, t + 1, w, e.what());
    }
    rec_.final_point = w;
    return std::move(rec_);
  }

 private:
  void record(long step, const Vector& w) {
    const Vector grad = objective_.gradient(w);
    rec_.iter.push_back(step);
    rec_.f.push_back(objective_.value(w));
    rec_.grad_norm.push_back(constraints_ ? chi(*constraints_, w, grad).norm() : grad.norm());
    std::optional<double> err;
    if (tensor_ && w.size() == static_cast<Eigen::Index>(tensor_->dim()) * tensor_->dim()) {
      err = reconstruction_error(*tensor_, ComponentMatrix::from_flat(tensor_->dim(), w));
    }
    rec_.recon_error.push_back(err);
    double ms = 0.0;
    if (config_.record_timing) {
      ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
               .count();
    }
    rec_.elapsed_ms.push_back(ms);
    if (config_.record_iterates) rec_.iterates.push_back(w);
  }

  RunRecord fail(RunStatus status, long step, const Vector& last_good, const std::string& why) {
    rec_.status = status;
    rec_.diagnostic = std::string(to_string(status)) + " at step " + std::to_string(step) + ": " + why;
    rec_.final_point = last_good;
    return std::move(rec_);
  }

  const Objective& objective_;
  const StochasticObjective* stochastic_;
  const ConstraintSet* constraints_;
  std::shared_ptr<const Tensor4> tensor_;
  const Sampler* sampler_;
  SgdConfig config_;
  Rng& rng_;
  RunRecord rec_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

RunRecord noisy_sgd(const Objective& objective, const Sampler* sampler, const Vector& w0,
                    const SgdConfig& config, Rng& rng, const StepObserver& observer) {
  return Runner(objective, nullptr, nullptr, sampler, config, rng).run(w0, observer);
}

RunRecord projected_noisy_sgd(const ConstrainedProblem& problem, const Sampler* sampler,
                              const Vector& w0, const SgdConfig& config, Rng& rng,
                              const StepObserver& observer) {
  if (!problem.constraints) throw std::invalid_argument("projected_noisy_sgd: no constraints");
  return Runner(*problem.objective, problem.constraints.get(), problem.tensor, sampler, config, rng)
      .run(w0, observer);
}

void write_run_csv(std::ostream& os, const RunRecord& record) {
  os << "iter,f,grad_norm,recon_error,elapsed_ms\n";
  os << std::setprecision(12);
  for (std::size_t i = 0; i < record.iter.size(); ++i) {
    os << record.iter[i] << ',' << record.f[i] << ',' << record.grad_norm[i] << ',';
    if (record.recon_error[i]) os << *record.recon_error[i];
    os << ',' << record.elapsed_ms[i] << '\n';
  }
}

}  // namespace ssgd

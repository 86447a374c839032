#include "ssgd/c_api.h"

#include "ssgd/analysis.hpp"
#include "ssgd/ica.hpp"
#include "ssgd/manifold.hpp"
#include "ssgd/objectives.hpp"
#include "ssgd/sgd.hpp"
#include "ssgd/tensor4.hpp"
#include "ssgd/verify.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

struct ssgd_tensor {
  std::shared_ptr<const ssgd::Tensor4> tensor;
};

struct ssgd_problem {
  ssgd::ConstrainedProblem problem;
  std::unique_ptr<ssgd::Sampler> sampler;
  ssgd_objective objective;
  int d = 0;
};

struct ssgd_run {
  ssgd::RunRecord record;
};

struct ssgd_catalog {
  ssgd::MinimaCatalog catalog;
};

struct ssgd_report {
  ssgd::SaddleReport report;
  std::string text;
};

struct ssgd_verify_result {
  std::vector<ssgd::CheckResult> checks;
};

namespace {

thread_local std::string g_last_error;

class ApiError : public std::runtime_error {
 public:
  ApiError(ssgd_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
  ssgd_status status;
};

[[noreturn]] void fail(ssgd_status s, const std::string& msg) { throw ApiError(s, msg); }

void require(bool cond, const char* msg) {
  if (!cond) fail(SSGD_ERR_INVALID_ARGUMENT, msg);
}

template <typename Fn>
ssgd_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return SSGD_OK;
  } catch (const ApiError& e) {
    g_last_error = e.what();
    return e.status;
  } catch (const ssgd::DimensionMismatch& e) {
    g_last_error = e.what();
    return SSGD_ERR_DIMENSION;
  } catch (const ssgd::DegenerateProjection& e) {
    g_last_error = e.what();
    return SSGD_ERR_DEGENERATE_PROJECTION;
  } catch (const ssgd::RlicqFailure& e) {
    g_last_error = e.what();
    return SSGD_ERR_RLICQ;
  } catch (const ssgd::NonFiniteValue& e) {
    g_last_error = e.what();
    return SSGD_ERR_NON_FINITE;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return SSGD_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SSGD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SSGD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SSGD_ERR_INTERNAL;
  }
}

ssgd::Vector vec(const double* p, int n) {
  require(p != nullptr, "null vector argument");
  return Eigen::Map<const ssgd::Vector>(p, n);
}

void copy_out(const ssgd::Vector& v, double* out) {
  require(out != nullptr, "null output buffer");
  Eigen::Map<ssgd::Vector>(out, v.size()) = v;
}

const ssgd::Tensor4& tensor_of(const ssgd_tensor* t) {
  require(t != nullptr && t->tensor, "null tensor handle");
  return *t->tensor;
}

const ssgd_problem& problem_of(const ssgd_problem* p) {
  require(p != nullptr, "null problem handle");
  return *p;
}

const ssgd::OrthoBasis& basis_of(const ssgd::Tensor4& t) {
  if (!t.basis()) fail(SSGD_ERR_INVALID_ARGUMENT, "tensor has no known orthonormal basis");
  return *t.basis();
}

ssgd::SgdConfig to_config(const ssgd_sgd_config* c) {
  require(c != nullptr, "null config");
  ssgd::SgdConfig cfg;
  cfg.eta = c->eta;
  cfg.eta_max = c->eta_max;
  cfg.iterations = c->iterations;
  cfg.kappa = c->kappa;
  switch (c->schedule) {
    case SSGD_SCHEDULE_CONSTANT: cfg.schedule = ssgd::Schedule::Constant; break;
    case SSGD_SCHEDULE_INVERSE_T: cfg.schedule = ssgd::Schedule::InverseT; break;
    default: fail(SSGD_ERR_INVALID_ARGUMENT, "unknown schedule");
  }
  cfg.decay_offset = c->decay_offset;
  cfg.noise_scale = c->noise_scale;
  cfg.batch_size = c->batch_size;
  cfg.seed = c->seed;
  cfg.record_every = c->record_every;
  cfg.divergence_bound = c->divergence_bound;
  cfg.record_timing = c->record_timing != 0;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const char* path) {
  require(path != nullptr, "null path");
  std::ofstream os(path);
  if (!os) fail(SSGD_ERR_IO, std::string("cannot open for writing: ") + path);
  return os;
}

void close_out(std::ofstream& os, const char* path) {
  os.flush();
  if (!os) fail(SSGD_ERR_IO, std::string("write failed: ") + path);
}

}  // namespace

extern "C" {

const char* ssgd_version(void) { return "0.1.0"; }

const char* ssgd_last_error(void) { return g_last_error.c_str(); }

const char* ssgd_status_string(ssgd_status status) {
  switch (status) {
    case SSGD_OK: return "ok";
    case SSGD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SSGD_ERR_DIMENSION: return "dimension mismatch";
    case SSGD_ERR_DEGENERATE_PROJECTION: return "degenerate projection";
    case SSGD_ERR_RLICQ: return "constraint qualification failure";
    case SSGD_ERR_NON_FINITE: return "non-finite value";
    case SSGD_ERR_IO: return "i/o error";
    case SSGD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

uint64_t ssgd_substream_seed(uint64_t seed, uint64_t k) {
  return ssgd::Rng(seed).substream(k).seed();
}

// ---- tensors ----

ssgd_status ssgd_tensor_random_orthogonal(int d, uint64_t seed, ssgd_tensor** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(d >= 1, "dimension must be positive");
    ssgd::Rng rng(seed);
    auto basis = ssgd::OrthoBasis::random(d, rng);
    *out = new ssgd_tensor{std::make_shared<const ssgd::Tensor4>(ssgd::make_orthogonal_tensor(basis))};
  });
}

ssgd_status ssgd_tensor_from_basis(int d, const double* basis, ssgd_tensor** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(d >= 1, "dimension must be positive");
    require(basis != nullptr, "null basis");
    ssgd::Matrix cols = Eigen::Map<const ssgd::Matrix>(basis, d, d);
    ssgd::OrthoBasis b(cols);
    *out = new ssgd_tensor{std::make_shared<const ssgd::Tensor4>(ssgd::make_orthogonal_tensor(b))};
  });
}

ssgd_status ssgd_tensor_from_entries(int d, const double* entries, ssgd_tensor** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(d >= 1, "dimension must be positive");
    require(entries != nullptr, "null entries");
    const std::size_t n = static_cast<std::size_t>(d) * d * d * d;
    std::vector<double> e(entries, entries + n);
    *out = new ssgd_tensor{std::make_shared<const ssgd::Tensor4>(d, std::move(e))};
  });
}

ssgd_status ssgd_tensor_read(const char* path, ssgd_tensor** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(path != nullptr, "null path");
    std::ifstream is(path);
    if (!is) fail(SSGD_ERR_IO, std::string("cannot open for reading: ") + path);
    *out = new ssgd_tensor{std::make_shared<const ssgd::Tensor4>(ssgd::read_tensor(is))};
  });
}

ssgd_status ssgd_tensor_write(const ssgd_tensor* t, const char* path) {
  return guarded([&] {
    const auto& tensor = tensor_of(t);
    auto os = open_out(path);
    ssgd::write_tensor(os, tensor);
    close_out(os, path);
  });
}

int ssgd_tensor_dim(const ssgd_tensor* t) { return t && t->tensor ? t->tensor->dim() : 0; }

ssgd_status ssgd_tensor_basis(const ssgd_tensor* t, double* out) {
  return guarded([&] {
    const auto& b = basis_of(tensor_of(t));
    require(out != nullptr, "null output buffer");
    Eigen::Map<ssgd::Matrix>(out, b.dim(), b.dim()) = b.matrix();
  });
}

ssgd_status ssgd_tensor_form_scalar(const ssgd_tensor* t, const double* u, const double* v,
                                    const double* w, const double* z, double* out) {
  return guarded([&] {
    const auto& tensor = tensor_of(t);
    require(out != nullptr, "null output");
    const int d = tensor.dim();
    *out = ssgd::form_scalar(tensor, vec(u, d), vec(v, d), vec(w, d), vec(z, d));
  });
}

ssgd_status ssgd_tensor_form_vector(const ssgd_tensor* t, const double* u, double* out) {
  return guarded([&] {
    const auto& tensor = tensor_of(t);
    copy_out(ssgd::form_vector(tensor, vec(u, tensor.dim())), out);
  });
}

ssgd_status ssgd_tensor_form_matrix(const ssgd_tensor* t, const double* u, double* out) {
  return guarded([&] {
    const auto& tensor = tensor_of(t);
    const int d = tensor.dim();
    const ssgd::Matrix m = ssgd::form_matrix(tensor, vec(u, d));
    require(out != nullptr, "null output buffer");
    Eigen::Map<ssgd::Matrix>(out, d, d) = m;
  });
}

ssgd_status ssgd_reconstruction_error(const ssgd_tensor* t, const double* components,
                                      double* out) {
  return guarded([&] {
    const auto& tensor = tensor_of(t);
    require(out != nullptr, "null output");
    const int d = tensor.dim();
    auto u = ssgd::ComponentMatrix::from_flat(d, vec(components, d * d));
    *out = ssgd::reconstruction_error(tensor, u);
  });
}

ssgd_status ssgd_balanced_saddle(const ssgd_tensor* t, const int* support, int p, double* out) {
  return guarded([&] {
    const auto& b = basis_of(tensor_of(t));
    require(support != nullptr && p >= 1, "support must be non-empty");
    copy_out(ssgd::balanced_saddle(b, std::vector<int>(support, support + p)), out);
  });
}

ssgd_status ssgd_write_samples_csv(const ssgd_tensor* t, ssgd_sampler_kind kind, int n,
                                   uint64_t seed, const char* path) {
  return guarded([&] {
    const auto& b = basis_of(tensor_of(t));
    require(n >= 0, "sample count must be non-negative");
    ssgd::SampleModel model;
    switch (kind) {
      case SSGD_SAMPLER_SIMPLE: model = ssgd::SampleModel::FourthMoment; break;
      case SSGD_SAMPLER_ICA: model = ssgd::SampleModel::IcaCumulant; break;
      default: fail(SSGD_ERR_INVALID_ARGUMENT, "sample dumps need the simple or ica sampler");
    }
    auto sampler = ssgd::make_sampler(model, b);
    ssgd::Rng rng(seed);
    const ssgd::Matrix samples = sampler->draw_batch(rng, n);
    auto os = open_out(path);
    ssgd::ica::write_samples_csv(os, samples);
    close_out(os, path);
  });
}

void ssgd_tensor_free(ssgd_tensor* t) { delete t; }

// ---- problems ----

ssgd_status ssgd_problem_create(const ssgd_tensor* t, ssgd_objective objective,
                                ssgd_pair_convention convention, ssgd_sampler_kind sampler,
                                ssgd_problem** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    const auto& tensor = tensor_of(t);
    ssgd::SampleModel model = ssgd::SampleModel::FourthMoment;
    switch (sampler) {
      case SSGD_SAMPLER_EXACT:
      case SSGD_SAMPLER_SIMPLE: break;
      case SSGD_SAMPLER_ICA: model = ssgd::SampleModel::IcaCumulant; break;
      default: fail(SSGD_ERR_INVALID_ARGUMENT, "unknown sampler");
    }
    ssgd::PairConvention conv;
    switch (convention) {
      case SSGD_PAIRS_ORDERED: conv = ssgd::PairConvention::OrderedPairs; break;
      case SSGD_PAIRS_HALF: conv = ssgd::PairConvention::HalfOrderedPairs; break;
      default: fail(SSGD_ERR_INVALID_ARGUMENT, "unknown pair convention");
    }
    auto p = std::make_unique<ssgd_problem>();
    p->objective = objective;
    p->d = tensor.dim();
    switch (objective) {
      case SSGD_OBJECTIVE_CORRELATION:
        p->problem = ssgd::correlation_objective(t->tensor, conv, model);
        break;
      case SSGD_OBJECTIVE_RECONSTRUCTION:
        p->problem = ssgd::reconstruction_objective(t->tensor, model);
        break;
      case SSGD_OBJECTIVE_MAXEIG:
        p->problem = ssgd::maxeig_objective(t->tensor, model);
        break;
      default: fail(SSGD_ERR_INVALID_ARGUMENT, "unknown objective");
    }
    if (sampler != SSGD_SAMPLER_EXACT) p->sampler = ssgd::make_sampler(model, basis_of(tensor));
    *out = p.release();
  });
}

int ssgd_problem_dim(const ssgd_problem* p) { return p ? p->problem.dim() : 0; }

int ssgd_problem_constraint_count(const ssgd_problem* p) {
  return p ? p->problem.constraints->count() : 0;
}

ssgd_status ssgd_problem_value(const ssgd_problem* p, const double* w, double* out) {
  return guarded([&] {
    const auto& pr = problem_of(p).problem;
    require(out != nullptr, "null output");
    *out = pr.objective->value(vec(w, pr.dim()));
  });
}

ssgd_status ssgd_problem_gradient(const ssgd_problem* p, const double* w, double* out) {
  return guarded([&] {
    const auto& pr = problem_of(p).problem;
    copy_out(pr.objective->gradient(vec(w, pr.dim())), out);
  });
}

ssgd_status ssgd_problem_chi(const ssgd_problem* p, const double* w, double* out) {
  return guarded([&] {
    const auto& pr = problem_of(p).problem;
    copy_out(ssgd::chi(pr, vec(w, pr.dim())), out);
  });
}

ssgd_status ssgd_problem_multipliers(const ssgd_problem* p, const double* w, double* out) {
  return guarded([&] {
    const auto& pr = problem_of(p).problem;
    copy_out(ssgd::lagrange_multipliers(pr, vec(w, pr.dim())), out);
  });
}

ssgd_status ssgd_problem_min_tangent_eig(const ssgd_problem* p, const double* w, double* value,
                                         double* direction) {
  return guarded([&] {
    const auto& pr = problem_of(p).problem;
    require(value != nullptr, "null output");
    const auto eig = ssgd::min_tangent_eig(pr, vec(w, pr.dim()));
    *value = eig.value;
    if (direction) copy_out(eig.direction, direction);
  });
}

ssgd_status ssgd_problem_project(const ssgd_problem* p, const double* v, double* out) {
  return guarded([&] {
    const auto& pr = problem_of(p).problem;
    copy_out(pr.constraints->project(vec(v, pr.dim())), out);
  });
}

ssgd_status ssgd_problem_random_feasible(const ssgd_problem* p, uint64_t seed, double* out) {
  return guarded([&] {
    const auto& pr = problem_of(p).problem;
    ssgd::Rng rng(seed);
    copy_out(pr.random_feasible(rng), out);
  });
}

ssgd_status ssgd_problem_oracle_bound(const ssgd_problem* p, double* out) {
  return guarded([&] {
    const auto& pr = problem_of(p).problem;
    require(out != nullptr, "null output");
    const auto* s = pr.stochastic();
    *out = s ? s->oracle_bound() : std::numeric_limits<double>::infinity();
  });
}

ssgd_status ssgd_problem_nearest_known_minimum(const ssgd_problem* p, const double* w,
                                               double* out, int* found) {
  return guarded([&] {
    const auto& pr = problem_of(p).problem;
    require(found != nullptr, "null output");
    const auto m = ssgd::nearest_known_minimum(pr, vec(w, pr.dim()));
    *found = m ? 1 : 0;
    if (m) copy_out(*m, out);
  });
}

void ssgd_problem_free(ssgd_problem* p) { delete p; }

// ---- runs ----

void ssgd_sgd_config_default(ssgd_sgd_config* config) {
  if (!config) return;
  const ssgd::SgdConfig d;
  config->eta = d.eta;
  config->eta_max = d.eta_max;
  config->iterations = d.iterations;
  config->kappa = d.kappa;
  config->schedule = d.schedule == ssgd::Schedule::InverseT ? SSGD_SCHEDULE_INVERSE_T
                                                            : SSGD_SCHEDULE_CONSTANT;
  config->decay_offset = d.decay_offset;
  config->noise_scale = d.noise_scale;
  config->batch_size = d.batch_size;
  config->seed = d.seed;
  config->record_every = d.record_every;
  config->divergence_bound = d.divergence_bound;
  config->record_timing = d.record_timing ? 1 : 0;
}

ssgd_status ssgd_run_projected(const ssgd_problem* p, const double* w0,
                               const ssgd_sgd_config* config, ssgd_run** out) {
  return guarded([&] {
    const auto& prob = problem_of(p);
    require(out != nullptr, "null output handle");
    const auto cfg = to_config(config);
    ssgd::Rng rng(cfg.seed);
    const ssgd::Vector start =
        w0 ? vec(w0, prob.problem.dim()) : prob.problem.random_feasible(rng);
    auto r = std::make_unique<ssgd_run>();
    r->record = ssgd::projected_noisy_sgd(prob.problem, prob.sampler.get(), start, cfg, rng);
    *out = r.release();
  });
}

ssgd_run_status ssgd_run_status_code(const ssgd_run* r) {
  if (!r) return SSGD_RUN_NON_FINITE;
  switch (r->record.status) {
    case ssgd::RunStatus::Completed: return SSGD_RUN_COMPLETED;
    case ssgd::RunStatus::Stopped: return SSGD_RUN_STOPPED;
    case ssgd::RunStatus::Diverged: return SSGD_RUN_DIVERGED;
    case ssgd::RunStatus::DegenerateProjection: return SSGD_RUN_DEGENERATE_PROJECTION;
    case ssgd::RunStatus::NonFinite: return SSGD_RUN_NON_FINITE;
  }
  return SSGD_RUN_NON_FINITE;
}

const char* ssgd_run_diagnostic(const ssgd_run* r) { return r ? r->record.diagnostic.c_str() : ""; }

size_t ssgd_run_length(const ssgd_run* r) { return r ? r->record.iter.size() : 0; }

long ssgd_run_steps(const ssgd_run* r) { return r ? r->record.steps : 0; }

ssgd_status ssgd_run_row(const ssgd_run* r, size_t i, long* iter, double* f, double* grad_norm,
                         double* recon_error, double* elapsed_ms) {
  return guarded([&] {
    require(r != nullptr, "null run handle");
    const auto& rec = r->record;
    if (i >= rec.iter.size()) fail(SSGD_ERR_INVALID_ARGUMENT, "row index out of range");
    if (iter) *iter = rec.iter[i];
    if (f) *f = rec.f[i];
    if (grad_norm) *grad_norm = rec.grad_norm[i];
    if (recon_error) {
      *recon_error = rec.recon_error[i] ? *rec.recon_error[i]
                                        : std::numeric_limits<double>::quiet_NaN();
    }
    if (elapsed_ms) *elapsed_ms = rec.elapsed_ms[i];
  });
}

int ssgd_run_dim(const ssgd_run* r) { return r ? static_cast<int>(r->record.final_point.size()) : 0; }

ssgd_status ssgd_run_final_point(const ssgd_run* r, double* out) {
  return guarded([&] {
    require(r != nullptr, "null run handle");
    copy_out(r->record.final_point, out);
  });
}

ssgd_status ssgd_run_noise_stats(const ssgd_run* r, long* checks, long* violations,
                                 double* max_perturbation) {
  return guarded([&] {
    require(r != nullptr, "null run handle");
    if (checks) *checks = r->record.noise_checks;
    if (violations) *violations = r->record.noise_bound_violations;
    if (max_perturbation) *max_perturbation = r->record.max_perturbation;
  });
}

ssgd_status ssgd_run_write_csv(const ssgd_run* r, const char* path) {
  return guarded([&] {
    require(r != nullptr, "null run handle");
    auto os = open_out(path);
    ssgd::write_run_csv(os, r->record);
    close_out(os, path);
  });
}

void ssgd_run_free(ssgd_run* r) { delete r; }

// ---- analysis ----

ssgd_status ssgd_escape(const ssgd_problem* p, const double* saddle, int trials,
                        const ssgd_sgd_config* config, double threshold, int workers,
                        ssgd_escape_stats* out) {
  return guarded([&] {
    const auto& prob = problem_of(p);
    require(out != nullptr, "null output");
    require(trials >= 1, "trials must be positive");
    const auto cfg = to_config(config);
    ssgd::EscapeOptions opt;
    if (threshold > 0.0) opt.threshold = threshold;
    opt.sampler = prob.sampler.get();
    opt.workers = workers > 0 ? workers : 0;
    const auto st = ssgd::escape_statistics(prob.problem, vec(saddle, prob.problem.dim()),
                                            trials, cfg, opt);
    out->trials = st.trials;
    out->escaped = st.escaped;
    out->escape_fraction = st.escape_fraction;
    out->median_steps = st.median_steps;
    out->mean_f_decrease = st.mean_f_decrease;
    out->threshold = st.threshold;
    out->saddle_value = st.saddle_value;
    out->max_displacement = st.max_displacement;
  });
}

ssgd_status ssgd_saddle_params_default(const ssgd_problem* p, ssgd_saddle_params* out) {
  return guarded([&] {
    const auto& prob = problem_of(p);
    require(out != nullptr, "null output");
    const auto sp = prob.objective == SSGD_OBJECTIVE_MAXEIG ? ssgd::maxeig_saddle_params(prob.d)
                                                            : ssgd::correlation_saddle_params(prob.d);
    *out = {sp.alpha, sp.gamma, sp.epsilon, sp.delta};
  });
}

ssgd_status ssgd_classify(const ssgd_problem* p, const double* w,
                          const ssgd_saddle_params* params, ssgd_report** out) {
  return guarded([&] {
    const auto& prob = problem_of(p);
    require(out != nullptr && params != nullptr, "null argument");
    ssgd::SaddleParams sp;
    sp.alpha = params->alpha;
    sp.gamma = params->gamma;
    sp.epsilon = params->epsilon;
    sp.delta = params->delta;
    sp.validate();
    auto r = std::make_unique<ssgd_report>();
    r->report = ssgd::classify_point(prob.problem, vec(w, prob.problem.dim()), sp);
    std::ostringstream os;
    ssgd::write_report(os, r->report);
    r->text = os.str();
    *out = r.release();
  });
}

ssgd_point_class ssgd_report_class(const ssgd_report* r) {
  if (!r) return SSGD_CLASS_UNCLASSIFIED;
  switch (r->report.classification) {
    case ssgd::PointClass::LargeGradient: return SSGD_CLASS_LARGE_GRADIENT;
    case ssgd::PointClass::NegativeCurvature: return SSGD_CLASS_NEGATIVE_CURVATURE;
    case ssgd::PointClass::NearLocalMinimum: return SSGD_CLASS_NEAR_LOCAL_MINIMUM;
    case ssgd::PointClass::Unclassified: return SSGD_CLASS_UNCLASSIFIED;
  }
  return SSGD_CLASS_UNCLASSIFIED;
}

double ssgd_report_chi_norm(const ssgd_report* r) {
  return r ? r->report.chi_norm : std::numeric_limits<double>::quiet_NaN();
}

const char* ssgd_report_text(const ssgd_report* r) { return r ? r->text.c_str() : ""; }

void ssgd_report_free(ssgd_report* r) { delete r; }

ssgd_status ssgd_enumerate_minima(const ssgd_problem* p, int starts,
                                  const ssgd_sgd_config* config, double dedup_threshold,
                                  int workers, ssgd_catalog** out) {
  return guarded([&] {
    const auto& prob = problem_of(p);
    require(out != nullptr, "null output handle");
    require(starts >= 1, "starts must be positive");
    const auto cfg = to_config(config);
    ssgd::MinimaOptions opt;
    if (dedup_threshold > 0.0) opt.dedup_threshold = dedup_threshold;
    opt.sampler = prob.sampler.get();
    opt.workers = workers > 0 ? workers : 0;
    auto c = std::make_unique<ssgd_catalog>();
    c->catalog = ssgd::enumerate_minima(prob.problem, starts, cfg, opt);
    *out = c.release();
  });
}

size_t ssgd_catalog_size(const ssgd_catalog* c) { return c ? c->catalog.entries.size() : 0; }

int ssgd_catalog_rejected(const ssgd_catalog* c) { return c ? c->catalog.rejected : 0; }

ssgd_status ssgd_catalog_entry(const ssgd_catalog* c, size_t i, double* point, double* f,
                               double* min_tangent_eig, int* hits) {
  return guarded([&] {
    require(c != nullptr, "null catalog handle");
    if (i >= c->catalog.entries.size()) fail(SSGD_ERR_INVALID_ARGUMENT, "entry index out of range");
    const auto& e = c->catalog.entries[i];
    if (point) copy_out(e.point, point);
    if (f) *f = e.f;
    if (min_tangent_eig) *min_tangent_eig = e.min_tangent_eig;
    if (hits) *hits = e.hits;
  });
}

ssgd_status ssgd_catalog_write_csv(const ssgd_catalog* c, const char* path) {
  return guarded([&] {
    require(c != nullptr, "null catalog handle");
    auto os = open_out(path);
    ssgd::write_catalog_csv(os, c->catalog);
    close_out(os, path);
  });
}

void ssgd_catalog_free(ssgd_catalog* c) { delete c; }

ssgd_status ssgd_verify(int d, uint64_t seed, int points, ssgd_fault fault,
                        ssgd_verify_result** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(d >= 2, "verification needs d >= 2");
    require(points >= 1, "points must be positive");
    ssgd::VerifyOptions opt;
    opt.d = d;
    opt.seed = seed;
    opt.points = points;
    switch (fault) {
      case SSGD_FAULT_NONE: opt.fault = ssgd::Fault::None; break;
      case SSGD_FAULT_ICA_SIGN_FLIP: opt.fault = ssgd::Fault::IcaSignFlip; break;
      default: fail(SSGD_ERR_INVALID_ARGUMENT, "unknown fault");
    }
    auto r = std::make_unique<ssgd_verify_result>();
    r->checks = ssgd::run_verification(opt);
    *out = r.release();
  });
}

size_t ssgd_verify_count(const ssgd_verify_result* r) { return r ? r->checks.size() : 0; }

ssgd_status ssgd_verify_check(const ssgd_verify_result* r, size_t i, const char** name,
                              int* passed, const char** detail) {
  return guarded([&] {
    require(r != nullptr, "null result handle");
    if (i >= r->checks.size()) fail(SSGD_ERR_INVALID_ARGUMENT, "check index out of range");
    const auto& c = r->checks[i];
    if (name) *name = c.name.c_str();
    if (passed) *passed = c.passed ? 1 : 0;
    if (detail) *detail = c.detail.c_str();
  });
}

void ssgd_verify_free(ssgd_verify_result* r) { delete r; }

}  // extern "C"

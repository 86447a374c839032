/* C interface to the ssgd library.
 *
 * Every object is an opaque handle released with its *_free function.
 * Functions that can fail return an ssgd_status; on failure the message is
 * available from ssgd_last_error() on the calling thread until the next call.
 * Vectors are plain double arrays. Component matrices are flat d*d arrays in
 * row-major order (entry i*d + j is coordinate j of component i); basis
 * matrices are column-major (column k is basis vector a_k).
 */
#ifndef SSGD_C_API_H
#define SSGD_C_API_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(SSGD_BUILDING_LIBRARY)
#define SSGD_API __attribute__((visibility("default")))
#else
#define SSGD_API
#endif

typedef enum {
  SSGD_OK = 0,
  SSGD_ERR_INVALID_ARGUMENT = 1,
  SSGD_ERR_DIMENSION = 2,
  SSGD_ERR_DEGENERATE_PROJECTION = 3,
  SSGD_ERR_RLICQ = 4,
  SSGD_ERR_NON_FINITE = 5,
  SSGD_ERR_IO = 6,
  SSGD_ERR_INTERNAL = 7
} ssgd_status;

typedef enum {
  SSGD_OBJECTIVE_CORRELATION = 0,
  SSGD_OBJECTIVE_RECONSTRUCTION = 1,
  SSGD_OBJECTIVE_MAXEIG = 2
} ssgd_objective;

/* Ordered pairs: sum over i != j. Half: each unordered pair once. */
typedef enum { SSGD_PAIRS_ORDERED = 0, SSGD_PAIRS_HALF = 1 } ssgd_pair_convention;

/* Source of stochastic gradients. EXACT uses the exact gradient. */
typedef enum { SSGD_SAMPLER_EXACT = 0, SSGD_SAMPLER_SIMPLE = 1, SSGD_SAMPLER_ICA = 2 } ssgd_sampler_kind;

typedef enum { SSGD_SCHEDULE_CONSTANT = 0, SSGD_SCHEDULE_INVERSE_T = 1 } ssgd_schedule;

typedef enum {
  SSGD_RUN_COMPLETED = 0,
  SSGD_RUN_STOPPED = 1,
  SSGD_RUN_DIVERGED = 2,
  SSGD_RUN_DEGENERATE_PROJECTION = 3,
  SSGD_RUN_NON_FINITE = 4
} ssgd_run_status;

typedef enum {
  SSGD_CLASS_LARGE_GRADIENT = 0,
  SSGD_CLASS_NEGATIVE_CURVATURE = 1,
  SSGD_CLASS_NEAR_LOCAL_MINIMUM = 2,
  SSGD_CLASS_UNCLASSIFIED = 3
} ssgd_point_class;

typedef enum { SSGD_FAULT_NONE = 0, SSGD_FAULT_ICA_SIGN_FLIP = 1 } ssgd_fault;

typedef struct ssgd_tensor ssgd_tensor;
typedef struct ssgd_problem ssgd_problem;
typedef struct ssgd_run ssgd_run;
typedef struct ssgd_catalog ssgd_catalog;
typedef struct ssgd_report ssgd_report;
typedef struct ssgd_verify_result ssgd_verify_result;

typedef struct {
  double eta;
  double eta_max;
  long iterations;
  double kappa;
  ssgd_schedule schedule;
  double decay_offset;
  double noise_scale;
  int batch_size;
  uint64_t seed;
  long record_every;
  double divergence_bound;
  int record_timing;
} ssgd_sgd_config;

typedef struct {
  double alpha;
  double gamma;
  double epsilon;
  double delta;
} ssgd_saddle_params;

typedef struct {
  int trials;
  int escaped;
  double escape_fraction;
  double median_steps; /* NaN when no trial escaped */
  double mean_f_decrease;
  double threshold;
  double saddle_value;
  double max_displacement;
} ssgd_escape_stats;

SSGD_API const char* ssgd_version(void);
SSGD_API const char* ssgd_last_error(void);
SSGD_API const char* ssgd_status_string(ssgd_status status);
/* Seed of substream k of a generator seeded with `seed`. */
SSGD_API uint64_t ssgd_substream_seed(uint64_t seed, uint64_t k);

/* ---- tensors ---- */
SSGD_API ssgd_status ssgd_tensor_random_orthogonal(int d, uint64_t seed, ssgd_tensor** out);
SSGD_API ssgd_status ssgd_tensor_from_basis(int d, const double* basis, ssgd_tensor** out);
SSGD_API ssgd_status ssgd_tensor_from_entries(int d, const double* entries, ssgd_tensor** out);
SSGD_API ssgd_status ssgd_tensor_read(const char* path, ssgd_tensor** out);
SSGD_API ssgd_status ssgd_tensor_write(const ssgd_tensor* t, const char* path);
SSGD_API int ssgd_tensor_dim(const ssgd_tensor* t);
/* Fails with SSGD_ERR_INVALID_ARGUMENT when the tensor has no known basis. */
SSGD_API ssgd_status ssgd_tensor_basis(const ssgd_tensor* t, double* out);
SSGD_API ssgd_status ssgd_tensor_form_scalar(const ssgd_tensor* t, const double* u, const double* v,
                                             const double* w, const double* z, double* out);
SSGD_API ssgd_status ssgd_tensor_form_vector(const ssgd_tensor* t, const double* u, double* out);
SSGD_API ssgd_status ssgd_tensor_form_matrix(const ssgd_tensor* t, const double* u, double* out);
SSGD_API ssgd_status ssgd_reconstruction_error(const ssgd_tensor* t, const double* components,
                                               double* out);
/* (1/sqrt(p)) * sum of the basis vectors listed in `support`. */
SSGD_API ssgd_status ssgd_balanced_saddle(const ssgd_tensor* t, const int* support, int p,
                                          double* out);
/* Writes n samples (one per row) from the simple or ICA sampler. */
SSGD_API ssgd_status ssgd_write_samples_csv(const ssgd_tensor* t, ssgd_sampler_kind kind, int n,
                                            uint64_t seed, const char* path);
SSGD_API void ssgd_tensor_free(ssgd_tensor* t);

/* ---- problems ---- */
/* The sampler kind fixes both the oracle and the sampler used by runs. */
SSGD_API ssgd_status ssgd_problem_create(const ssgd_tensor* t, ssgd_objective objective,
                                         ssgd_pair_convention convention,
                                         ssgd_sampler_kind sampler, ssgd_problem** out);
SSGD_API int ssgd_problem_dim(const ssgd_problem* p);
SSGD_API int ssgd_problem_constraint_count(const ssgd_problem* p);
SSGD_API ssgd_status ssgd_problem_value(const ssgd_problem* p, const double* w, double* out);
SSGD_API ssgd_status ssgd_problem_gradient(const ssgd_problem* p, const double* w, double* out);
SSGD_API ssgd_status ssgd_problem_chi(const ssgd_problem* p, const double* w, double* out);
SSGD_API ssgd_status ssgd_problem_multipliers(const ssgd_problem* p, const double* w, double* out);
/* `direction` may be NULL. */
SSGD_API ssgd_status ssgd_problem_min_tangent_eig(const ssgd_problem* p, const double* w,
                                                  double* value, double* direction);
SSGD_API ssgd_status ssgd_problem_project(const ssgd_problem* p, const double* v, double* out);
SSGD_API ssgd_status ssgd_problem_random_feasible(const ssgd_problem* p, uint64_t seed,
                                                  double* out);
SSGD_API ssgd_status ssgd_problem_oracle_bound(const ssgd_problem* p, double* out);
/* Nearest minimum known in closed form; *found is 0 when none is known. */
SSGD_API ssgd_status ssgd_problem_nearest_known_minimum(const ssgd_problem* p, const double* w,
                                                        double* out, int* found);
SSGD_API void ssgd_problem_free(ssgd_problem* p);

/* ---- runs ---- */
SSGD_API void ssgd_sgd_config_default(ssgd_sgd_config* config);
/* Projected noisy SGD. With w0 == NULL the start is a random feasible point
 * drawn from the run generator (seeded with config->seed) before the first
 * step. */
SSGD_API ssgd_status ssgd_run_projected(const ssgd_problem* p, const double* w0,
                                        const ssgd_sgd_config* config, ssgd_run** out);
SSGD_API ssgd_run_status ssgd_run_status_code(const ssgd_run* r);
SSGD_API const char* ssgd_run_diagnostic(const ssgd_run* r);
SSGD_API size_t ssgd_run_length(const ssgd_run* r);
SSGD_API long ssgd_run_steps(const ssgd_run* r);
/* recon_error is NaN when the problem has no reconstruction metric. */
SSGD_API ssgd_status ssgd_run_row(const ssgd_run* r, size_t i, long* iter, double* f,
                                  double* grad_norm, double* recon_error, double* elapsed_ms);
SSGD_API int ssgd_run_dim(const ssgd_run* r);
SSGD_API ssgd_status ssgd_run_final_point(const ssgd_run* r, double* out);
SSGD_API ssgd_status ssgd_run_noise_stats(const ssgd_run* r, long* checks, long* violations,
                                          double* max_perturbation);
SSGD_API ssgd_status ssgd_run_write_csv(const ssgd_run* r, const char* path);
SSGD_API void ssgd_run_free(ssgd_run* r);

/* ---- analysis ---- */
/* threshold <= 0 selects max(0.1*|f(saddle)|, 1e-3); workers <= 0 uses all cores. */
SSGD_API ssgd_status ssgd_escape(const ssgd_problem* p, const double* saddle, int trials,
                                 const ssgd_sgd_config* config, double threshold, int workers,
                                 ssgd_escape_stats* out);

SSGD_API ssgd_status ssgd_saddle_params_default(const ssgd_problem* p, ssgd_saddle_params* out);
SSGD_API ssgd_status ssgd_classify(const ssgd_problem* p, const double* w,
                                   const ssgd_saddle_params* params, ssgd_report** out);
SSGD_API ssgd_point_class ssgd_report_class(const ssgd_report* r);
SSGD_API double ssgd_report_chi_norm(const ssgd_report* r);
/* Key=value lines; owned by the report. */
SSGD_API const char* ssgd_report_text(const ssgd_report* r);
SSGD_API void ssgd_report_free(ssgd_report* r);

SSGD_API ssgd_status ssgd_enumerate_minima(const ssgd_problem* p, int starts,
                                           const ssgd_sgd_config* config, double dedup_threshold,
                                           int workers, ssgd_catalog** out);
SSGD_API size_t ssgd_catalog_size(const ssgd_catalog* c);
SSGD_API int ssgd_catalog_rejected(const ssgd_catalog* c);
SSGD_API ssgd_status ssgd_catalog_entry(const ssgd_catalog* c, size_t i, double* point, double* f,
                                        double* min_tangent_eig, int* hits);
SSGD_API ssgd_status ssgd_catalog_write_csv(const ssgd_catalog* c, const char* path);
SSGD_API void ssgd_catalog_free(ssgd_catalog* c);

SSGD_API ssgd_status ssgd_verify(int d, uint64_t seed, int points, ssgd_fault fault,
                                 ssgd_verify_result** out);
SSGD_API size_t ssgd_verify_count(const ssgd_verify_result* r);
/* Strings are owned by the result. */
SSGD_API ssgd_status ssgd_verify_check(const ssgd_verify_result* r, size_t i, const char** name,
                                       int* passed, const char** detail);
SSGD_API void ssgd_verify_free(ssgd_verify_result* r);

#ifdef __cplusplus
}
#endif

#endif /* SSGD_C_API_H */

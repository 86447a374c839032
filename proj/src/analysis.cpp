#include "ssgd/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

namespace ssgd {

double default_fd_step(const Vector& w) { return 1e-5 * std::max(1.0, w.norm()); }
double default_fd_hessian_step(const Vector& w) { return 1e-3 * std::max(1.0, w.norm()); }

namespace {

double eval_finite(const ScalarFn& f, const Vector& w) {
  const double v = f(w);
  if (!std::isfinite(v)) throw NonFiniteValue("finite difference: non-finite function value");
  return v;
}

void require_step(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("finite difference: h must be positive");
}

// Second-difference Hessian estimate at step h.
Matrix second_difference(const ScalarFn& f, const Vector& w, double h) {
  const Eigen::Index n = w.size();
  Matrix out(n, n);
  Vector x = w;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      auto at = [&](double si, double sj) {
        x = w;
        x(i) += si * h;
        x(j) += sj * h;
        return eval_finite(f, x);
      };
      const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

}  // namespace

Vector fd_gradient(const ScalarFn& f, const Vector& w, double h) {
  require_step(h);
  Vector g(w.size());
  Vector x = w;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    x(i) = w(i) + h;
    const double up = eval_finite(f, x);
    x(i) = w(i) - h;
    const double down = eval_finite(f, x);
    x(i) = w(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Vector fd_gradient(const ScalarFn& f, const Vector& w) { return fd_gradient(f, w, default_fd_step(w)); }

Matrix fd_hessian(const ScalarFn& f, const Vector& w, double h) {
  require_step(h);
  const Matrix coarse = second_difference(f, w, 2.0 * h);
  const Matrix fine = second_difference(f, w, h);
  const Matrix m = (4.0 * fine - coarse) / 3.0;
  return 0.5 * (m + m.transpose());
}

Matrix fd_hessian(const ScalarFn& f, const Vector& w) {
  return fd_hessian(f, w, default_fd_hessian_step(w));
}

ScalarFn lagrangian_at(const ConstrainedProblem& problem, const Vector& lambda) {
  if (!problem.constraints) throw std::invalid_argument("lagrangian_at: no constraints");
  require_dim(lambda.size(), problem.constraints->count(), "lagrangian_at");
  return [&problem, lambda](const Vector& w) {
    double v = problem.objective->value(w);
    for (int i = 0; i < problem.constraints->count(); ++i) {
      v -= lambda(i) * problem.constraints->value(i, w);
    }
    return v;
  };
}

const char* to_string(PointClass c) {
  switch (c) {
    case PointClass::LargeGradient: return "LargeGradient";
    case PointClass::NegativeCurvature: return "NegativeCurvature";
    case PointClass::NearLocalMinimum: return "NearLocalMinimum";
    case PointClass::Unclassified: return "Unclassified";
  }
  return "Unknown";
}

std::optional<std::pair<const MinimaEntry*, double>> MinimaCatalog::nearest(const Vector& w) const {
  std::optional<std::pair<const MinimaEntry*, double>> best;
  for (const auto& e : entries) {
    if (e.point.size() != w.size()) continue;
    const double dist = (e.point - w).norm();
    if (!best || dist < best->second) best = std::make_pair(&e, dist);
  }
  return best;
}

std::optional<Vector> nearest_known_minimum(const ConstrainedProblem& problem, const Vector& w) {
  if (!problem.tensor || !problem.tensor->basis()) return std::nullopt;
  const Matrix& a = problem.tensor->basis()->matrix();
  const int d = problem.tensor->dim();
  if (w.size() == d) {
    const Vector x = a.transpose() * w;
    Eigen::Index k = 0;
    x.cwiseAbs().maxCoeff(&k);
    return Vector((x(k) < 0 ? -1.0 : 1.0) * a.col(k));
  }
  if (w.size() != static_cast<Eigen::Index>(d) * d) return std::nullopt;
  const Matrix z = ComponentMatrix::from_flat(d, w).rows() * a;
  // Greedy assignment on |⟨u_i, a_k⟩|; optimal whenever rows have distinct argmaxes.
  std::vector<int> perm(d, -1);
  std::vector<bool> used(d, false);
  for (int step = 0; step < d; ++step) {
    double best = -1.0;
    int bi = -1, bk = -1;
    for (int i = 0; i < d; ++i) {
      if (perm[i] >= 0) continue;
      for (int k = 0; k < d; ++k) {
        if (!used[k] && std::abs(z(i, k)) > best) {
          best = std::abs(z(i, k));
          bi = i;
          bk = k;
        }
      }
    }
    perm[bi] = bk;
    used[bk] = true;
  }
  std::vector<int> signs(d);
  for (int i = 0; i < d; ++i) signs[i] = z(i, perm[i]) < 0 ? -1 : 1;
  return signed_permutation(*problem.tensor->basis(), perm, signs);
}

PolishResult polish(const ConstrainedProblem& problem, const Vector& w0, double tol,
                    long max_steps) {
  if (!problem.constraints) throw std::invalid_argument("polish: no constraints");
  const double step = 0.25 / std::max(1.0, problem.smoothness.beta);
  PolishResult r;
  r.point = w0;
  for (r.steps = 0;; ++r.steps) {
    const Vector c = chi(problem, r.point);
    r.chi_norm = c.norm();
    if (r.chi_norm <= tol || r.steps >= max_steps) break;
    r.point = problem.constraints->project(r.point - step * c);
  }
  return r;
}

SaddleReport classify_point(const ConstrainedProblem& problem, const Vector& w,
                            const SaddleParams& params, const ClassifyOptions& options) {
  params.validate();
  SaddleReport rep;
  rep.point = w;
  rep.params = params;
  const Vector grad = problem.objective->gradient(w);
  rep.chi_norm = chi(*problem.constraints, w, grad).norm();
  // Rounding in χ is a few ulps of ‖∇f‖, which exceeds the tiny ε of some
  // parameter sets even at exact stationary points.
  rep.effective_epsilon =
      std::max(params.epsilon, kChiRoundingUlps * std::numeric_limits<double>::epsilon() *
                                   std::max(1.0, grad.norm()));
  if (rep.chi_norm >= rep.effective_epsilon) {
    rep.classification = PointClass::LargeGradient;
    return rep;
  }
  const TangentEig eig = min_tangent_eig(problem, w);
  rep.min_tangent_eig = eig.value;
  rep.witness = eig.direction;
  if (eig.value <= -params.gamma) {
    rep.classification = PointClass::NegativeCurvature;
    return rep;
  }

  std::optional<Vector> candidate;
  if (options.catalog) {
    if (auto hit = options.catalog->nearest(w)) {
      candidate = hit->first->point;
      rep.minimum_source = "catalog";
    }
  }
  if (!candidate) {
    candidate = nearest_known_minimum(problem, w);
    if (candidate) rep.minimum_source = "analytic";
  }
  if (!candidate) {
    const PolishResult p = polish(problem, w);
    if (p.chi_norm <= 1e-8 && min_tangent_eig(problem, p.point).value > 0.0) {
      candidate = p.point;
      rep.minimum_source = "polish";
    }
  }
  if (!candidate) return rep;

  rep.matched_minimum = *candidate;
  rep.minimum_distance = (w - *candidate).norm();
  if (rep.minimum_distance > params.delta) return rep;

  // Curvature over the 2δ neighborhood: the minimum itself plus random
  // feasible points at distance up to about 2δ.
  Rng rng(options.seed);
  double worst = min_tangent_eig(problem, *candidate).value;
  for (int s = 0; s < options.neighborhood_samples; ++s) {
    const Vector dir = unit_sphere_noise(static_cast<int>(w.size()), rng);
    const Vector p = problem.constraints->project(*candidate + 2.0 * params.delta * rng.uniform() * dir);
    worst = std::min(worst, min_tangent_eig(problem, p).value);
  }
  rep.neighborhood_samples = options.neighborhood_samples + 1;
  rep.neighborhood_min_eig = worst;
  if (worst >= params.alpha) rep.classification = PointClass::NearLocalMinimum;
  return rep;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, n);
  if (workers == 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

MinimaCatalog enumerate_minima(const ConstrainedProblem& problem, int n_starts,
                               const SgdConfig& config, const MinimaOptions& options) {
  if (n_starts < 1) throw std::invalid_argument("enumerate_minima: n_starts must be at least 1");
  SgdConfig cfg = config;
  cfg.record_every = cfg.iterations;
  cfg.record_timing = false;
  cfg.record_iterates = false;
  cfg.validate();

  struct Endpoint {
    bool accepted = false;
    Vector point;
    double f = 0.0;
    double eig = 0.0;
  };
  std::vector<Endpoint> ends(n_starts);
  const Rng root(cfg.seed);
  parallel_for(n_starts, options.workers, [&](int k) {
    Rng rng = root.substream(static_cast<std::uint64_t>(k));
    const Vector w0 = problem.random_feasible(rng);
    const RunRecord rec = projected_noisy_sgd(problem, options.sampler, w0, cfg, rng);
    if (!rec.ok()) return;
    const PolishResult p = polish(problem, rec.final_point);
    if (p.chi_norm > 1e-8) return;
    const double eig = min_tangent_eig(problem, p.point).value;
    if (!(eig > options.curvature_floor)) return;
    ends[k] = {true, p.point, problem.objective->value(p.point), eig};
  });

  MinimaCatalog cat;
  cat.dedup_threshold = options.dedup_threshold;
  cat.starts = n_starts;
  for (const auto& e : ends) {
    if (!e.accepted) {
      ++cat.rejected;
      continue;
    }
    auto same = std::find_if(cat.entries.begin(), cat.entries.end(), [&](const MinimaEntry& m) {
      return (m.point - e.point).norm() <= options.dedup_threshold;
    });
    if (same != cat.entries.end()) {
      ++same->hits;
    } else {
      cat.entries.push_back({e.point, e.f, e.eig, 1});
    }
  }
  std::sort(cat.entries.begin(), cat.entries.end(), [](const MinimaEntry& a, const MinimaEntry& b) {
    return std::lexicographical_compare(a.point.data(), a.point.data() + a.point.size(),
                                        b.point.data(), b.point.data() + b.point.size());
  });
  return cat;
}

CouplingState coupling_closed_form(const Vector& g, const Matrix& h,
                                   const std::vector<Vector>& noise_stream, double eta, long t) {
  const Eigen::Index n = g.size();
  if (h.rows() != n || h.cols() != n) throw DimensionMismatch("coupling_closed_form: H must be n x n");
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("coupling_closed_form: H must be symmetric");
  }
  if (t < 0 || static_cast<std::size_t>(t) > noise_stream.size()) {
    throw std::invalid_argument("coupling_closed_form: noise stream shorter than t");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const Matrix& v = es.eigenvectors();
  const Vector lam = es.eigenvalues();
  const Vector r = (1.0 - eta * lam.array()).matrix();  // eigenvalues of I − ηH
  const Vector gt = v.transpose() * g;

  Vector rt(n), gsum(n), xsum = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rt(i) = std::pow(r(i), static_cast<double>(t));
    // Σ_{τ<t} r^τ
    double s = 0.0, p = 1.0;
    for (long tau = 0; tau < t; ++tau) {
      s += p;
      p *= r(i);
    }
    gsum(i) = s;
  }
  // Σ_{τ<t} r^{t−τ−1} ξ̃_τ, accumulated Horner style.
  for (long tau = 0; tau < t; ++tau) {
    require_dim(noise_stream[tau].size(), n, "coupling_closed_form noise");
    xsum = (r.array() * xsum.array()).matrix() + v.transpose() * noise_stream[tau];
  }
  CouplingState out;
  out.gradient = v * ((rt.array() * gt.array()).matrix() - eta * (lam.array() * xsum.array()).matrix());
  out.displacement = v * (-eta * (gsum.array() * gt.array()).matrix() - eta * xsum);
  return out;
}

EscapeStats escape_statistics(const ConstrainedProblem& problem, const Vector& saddle,
                              int n_trials, const SgdConfig& config, const EscapeOptions& options) {
  if (n_trials < 1) throw std::invalid_argument("escape_statistics: n_trials must be at least 1");
  SgdConfig cfg = config;
  cfg.record_every = cfg.iterations;
  cfg.record_timing = false;
  cfg.record_iterates = false;
  cfg.validate();

  EscapeStats st;
  st.trials = n_trials;
  st.saddle_value = problem.objective->value(saddle);
  st.threshold = options.threshold ? *options.threshold : std::max(0.1 * std::abs(st.saddle_value), 1e-3);
  const double target = st.saddle_value - st.threshold;

  st.steps.assign(n_trials, -1);
  std::vector<double> decrease(n_trials, 0.0), moved(n_trials, 0.0);
  const Rng root(cfg.seed);
  parallel_for(n_trials, options.workers, [&](int k) {
    Rng rng = root.substream(static_cast<std::uint64_t>(k));
    long hit = -1;
    const RunRecord rec = projected_noisy_sgd(
        problem, options.sampler, saddle, cfg, rng, [&](long step, const Vector& w) {
          if (problem.objective->value(w) < target) {
            hit = step;
            return false;
          }
          return true;
        });
    st.steps[k] = hit;
    decrease[k] = st.saddle_value - problem.objective->value(rec.final_point);
    moved[k] = (rec.final_point - saddle).norm();
  });

  std::vector<long> escaped;
  for (long s : st.steps)
    if (s >= 0) escaped.push_back(s);
  st.escaped = static_cast<int>(escaped.size());
  st.escape_fraction = static_cast<double>(st.escaped) / n_trials;
  if (escaped.empty()) {
    st.median_steps = std::numeric_limits<double>::quiet_NaN();
  } else {
    std::sort(escaped.begin(), escaped.end());
    const std::size_t m = escaped.size();
    st.median_steps = m % 2 ? static_cast<double>(escaped[m / 2])
                            : 0.5 * static_cast<double>(escaped[m / 2 - 1] + escaped[m / 2]);
  }
  st.mean_f_decrease = std::accumulate(decrease.begin(), decrease.end(), 0.0) / n_trials;
  st.max_displacement = *std::max_element(moved.begin(), moved.end());
  return st;
}

SaddleParams maxeig_saddle_params(int d) {
  if (d < 1) throw std::invalid_argument("maxeig_saddle_params: d must be positive");
  const double e0 = std::pow(10.0 * d, -4.0);
  SaddleParams p;
  p.epsilon = 4.0 * e0 * e0;
  p.delta = 2.0 * d * e0;
  p.gamma = 7.0 / d;
  p.alpha = 3.0;
  return p;
}

SaddleParams correlation_saddle_params(int d) {
  if (d < 1) throw std::invalid_argument("correlation_saddle_params: d must be positive");
  SaddleParams p;
  p.alpha = 1.0;
  p.gamma = 1.0 / (static_cast<double>(d) * d);
  p.epsilon = 1e-8;
  p.delta = 0.1 / d;
  return p;
}

Vector balanced_saddle(const OrthoBasis& basis, const std::vector<int>& support) {
  if (support.empty()) throw std::invalid_argument("balanced_saddle: empty support");
  Vector x = Vector::Zero(basis.dim());
  for (int i : support) {
    if (i < 0 || i >= basis.dim()) throw std::invalid_argument("balanced_saddle: index out of range");
    x += basis.vector(i);
  }
  return x / std::sqrt(static_cast<double>(support.size()));
}

Vector signed_permutation(const OrthoBasis& basis, const std::vector<int>& perm,
                          const std::vector<int>& signs) {
  const int d = basis.dim();
  if (static_cast<int>(perm.size()) != d || static_cast<int>(signs.size()) != d) {
    throw DimensionMismatch("signed_permutation: need d indices and d signs");
  }
  Vector out(static_cast<Eigen::Index>(d) * d);
  std::vector<bool> used(static_cast<std::size_t>(d), false);
  for (int i = 0; i < d; ++i) {
    if (perm[i] < 0 || perm[i] >= d || used[static_cast<std::size_t>(perm[i])]) {
      throw std::invalid_argument("signed_permutation: not a permutation");
    }
    used[static_cast<std::size_t>(perm[i])] = true;
    out.segment(i * d, d) = (signs[i] < 0 ? -1.0 : 1.0) * basis.vector(perm[i]);
  }
  return out;
}

void write_report(std::ostream& os, const SaddleReport& r) {
  os << std::setprecision(12);
  os << "classification=" << to_string(r.classification) << '\n';
  os << "chi_norm=" << r.chi_norm << '\n';
  os << "alpha=" << r.params.alpha << '\n';
  os << "gamma=" << r.params.gamma << '\n';
  os << "epsilon=" << r.params.epsilon << '\n';
  os << "effective_epsilon=" << r.effective_epsilon << '\n';
  os << "delta=" << r.params.delta << '\n';
  if (r.min_tangent_eig) os << "min_tangent_eig=" << *r.min_tangent_eig << '\n';
  if (r.matched_minimum) {
    os << "minimum_source=" << r.minimum_source << '\n';
    os << "minimum_distance=" << r.minimum_distance << '\n';
  }
  if (r.neighborhood_min_eig) {
    os << "neighborhood_min_eig=" << *r.neighborhood_min_eig << '\n';
    os << "neighborhood_samples=" << r.neighborhood_samples << '\n';
  }
}

void write_catalog_csv(std::ostream& os, const MinimaCatalog& catalog) {
  os << "index,f,min_tangent_eig,hits,point\n";
  os << std::setprecision(12);
  for (std::size_t i = 0; i < catalog.entries.size(); ++i) {
    const auto& e = catalog.entries[i];
    os << i << ',' << e.f << ',' << e.min_tangent_eig << ',' << e.hits << ',';
    for (Eigen::Index j = 0; j < e.point.size(); ++j) os << (j ? ";" : "") << e.point(j);
    os << '\n';
  }
}

}  // namespace ssgd

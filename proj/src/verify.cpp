#include "ssgd/verify.hpp"

#include "ssgd/analysis.hpp"
#include "ssgd/ica.hpp"
#include "ssgd/manifold.hpp"
#include "ssgd/objectives.hpp"
#include "ssgd/sgd.hpp"
#include "ssgd/tensor4.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace ssgd {

Vector faulty_ica_gradient(const Matrix& u_rows, const Vector& y) {
  const Eigen::Index d = y.size();
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const Vector ui = u_rows.row(i).transpose();
    for (Eigen::Index j = 0; j < d; ++j) {
      if (j == i) continue;
      const Vector uj = u_rows.row(j).transpose();
      const double yj = y.dot(uj);
      out.row(i) += (uj.squaredNorm() * ui + 2.0 * ui.dot(uj) * uj + yj * yj * y.dot(ui) * y).transpose();
    }
  }
  Vector flat(d * d);
  for (Eigen::Index i = 0; i < d; ++i) flat.segment(i * d, d) = out.row(i).transpose();
  return flat;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

CheckResult bound_check(std::string name, double worst, double tol) {
  return {std::move(name), worst <= tol, "max error " + fmt(worst) + " (tolerance " + fmt(tol) + ")"};
}

struct Problems {
  std::shared_ptr<const Tensor4> tensor;
  ConstrainedProblem maxeig, reconstruction, correlation, correlation_half;
};

Problems make_problems(int d, Rng& rng) {
  Problems p;
  p.tensor = std::make_shared<const Tensor4>(make_orthogonal_tensor(OrthoBasis::random(d, rng)));
  p.maxeig = maxeig_objective(p.tensor);
  p.reconstruction = reconstruction_objective(p.tensor);
  p.correlation = correlation_objective(p.tensor);
  p.correlation_half = correlation_objective(p.tensor, PairConvention::HalfOrderedPairs);
  return p;
}

Vector gaussian_unit(int n, Rng& rng) { return unit_sphere_noise(n, rng); }

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  if (options.d < 1) throw std::invalid_argument("run_verification: d must be positive");
  if (options.points < 1) throw std::invalid_argument("run_verification: points must be positive");
  const int d = options.d;
  Rng rng(options.seed);
  std::vector<CheckResult> out;
  Problems pr = make_problems(d, rng);
  const OrthoBasis& basis = *pr.tensor->basis();

  {
    out.push_back(bound_check("tensor_symmetry", pr.tensor->max_asymmetry(), 1e-12));
  }
  {
    double worst = 0.0;
    for (int k = 0; k < options.points; ++k) {
      const Vector u = rng.gaussian(d), v = rng.gaussian(d);
      worst = std::max(worst, relative_error(form_vector(*pr.tensor, u, v, v),
                                             dense::form_vector(*pr.tensor, u, v, v)));
      worst = std::max(worst, relative_error(form_matrix(*pr.tensor, u, v),
                                             dense::form_matrix(*pr.tensor, u, v)));
      const double s = form_scalar(*pr.tensor, u, u, u, u);
      const double scale = std::max(1e-300, std::abs(s));
      worst = std::max(worst, std::abs(u.dot(form_vector(*pr.tensor, u)) - s) / scale);
      worst = std::max(worst, std::abs(u.dot(form_matrix(*pr.tensor, u) * u) - s) / scale);
    }
    out.push_back(bound_check("form_consistency", worst, 1e-10));
  }

  const std::vector<std::pair<std::string, const ConstrainedProblem*>> problems = {
      {"maxeig", &pr.maxeig}, {"reconstruction", &pr.reconstruction}, {"correlation", &pr.correlation}};
  for (const auto& [name, p] : problems) {
    double grad_worst = 0.0, chi_worst = 0.0, hess_worst = 0.0;
    for (int k = 0; k < options.points; ++k) {
      const Vector w = p->random_feasible(rng);
      const ScalarFn f = [p = p](const Vector& x) { return p->objective->value(x); };
      grad_worst = std::max(grad_worst, relative_error(p->objective->gradient(w), fd_gradient(f, w)));
      const Vector lambda = lagrange_multipliers(*p, w);
      const ScalarFn lag = lagrangian_at(*p, lambda);
      chi_worst = std::max(chi_worst, relative_error(chi(*p, w), fd_gradient(lag, w)));
      hess_worst = std::max(hess_worst, relative_error(lagrangian_hessian(*p, w), fd_hessian(lag, w)));
    }
    out.push_back(bound_check("gradient_fd_" + name, grad_worst, 1e-5));
    out.push_back(bound_check("chi_fd_" + name, chi_worst, 1e-5));
    out.push_back(bound_check("lagrangian_hessian_fd_" + name, hess_worst, 1e-5));
  }

  {
    double worst = 0.0;
    for (int k = 0; k < options.points; ++k) {
      const Vector u = pr.maxeig.random_feasible(rng);
      const double lam = lagrange_multipliers(pr.maxeig, u)(0);
      const double closed = closed_form::maxeig_lambda(closed_form::to_basis(basis, u));
      worst = std::max(worst, std::abs(lam - closed));
      const Vector w = pr.correlation_half.random_feasible(rng);
      const Matrix z = closed_form::rows_to_basis(basis, ComponentMatrix::from_flat(d, w).rows());
      worst = std::max(worst, (lagrange_multipliers(pr.correlation_half, w) -
                               closed_form::correlation_lambda(z)).cwiseAbs().maxCoeff());
    }
    out.push_back(bound_check("multipliers_closed_form", worst, 1e-8));
  }

  {
    const int de = std::min(d, 4);
    const ica::IcaModel model = ica::IcaModel::random(de, rng);
    const Tensor4 t = make_orthogonal_tensor(model.basis());
    const auto signs = ica::all_sign_vectors(de);
    double worst = 0.0;
    for (int k = 0; k < options.points; ++k) {
      const Vector u = rng.gaussian(de), v = rng.gaussian(de), w = rng.gaussian(de), z = rng.gaussian(de);
      double mean = 0.0;
      for (const Vector& x : signs) mean += ica::z_minus_y4_form(model.mixing() * x, u, v, w, z);
      mean /= static_cast<double>(signs.size());
      worst = std::max(worst, std::abs(mean - form_scalar(t, u, v, w, z)));
    }
    out.push_back(bound_check("ica_cumulant_expectation", worst, 1e-12));
  }

  {
    IcaGradientFn oracle = options.ica_gradient;
    if (!oracle) {
      oracle = options.fault == Fault::IcaSignFlip ? IcaGradientFn(faulty_ica_gradient)
                                                   : IcaGradientFn(ica::ica_stochastic_gradient);
    }
    const int de = std::min(std::max(d, 2), 3);
    const ica::IcaModel model = ica::IcaModel::random(de, rng);
    auto t = std::make_shared<const Tensor4>(make_orthogonal_tensor(model.basis()));
    const ConstrainedProblem half = correlation_objective(t, PairConvention::HalfOrderedPairs);
    const auto signs = ica::all_sign_vectors(de);
    double worst = 0.0;
    for (int k = 0; k < options.points; ++k) {
      const Vector w = half.random_feasible(rng);
      const Matrix u = ComponentMatrix::from_flat(de, w).rows();
      Vector mean = Vector::Zero(de * de);
      for (const Vector& x : signs) mean += oracle(u, model.mixing() * x);
      mean /= static_cast<double>(signs.size());
      worst = std::max(worst, relative_error(mean, half.objective->gradient(w)));
    }
    out.push_back(bound_check("ica_gradient_unbiased", worst, 1e-10));
  }

  {
    double worst = 0.0;
    const double scale = std::pow(static_cast<double>(d), 0.25);
    Matrix outcomes(d, d);
    for (int i = 0; i < d; ++i) outcomes.col(i) = scale * basis.vector(i);
    for (const ConstrainedProblem* p : {&pr.maxeig, &pr.correlation, &pr.reconstruction}) {
      const auto* so = p->stochastic();
      for (int k = 0; k < options.points; ++k) {
        const Vector w = p->random_feasible(rng);
        // The batch mean over all d equally likely outcomes is the expectation.
        worst = std::max(worst, relative_error(so->stochastic_gradient(w, outcomes), p->objective->gradient(w)));
      }
    }
    out.push_back(bound_check("simple_sampler_unbiased", worst, 1e-12));
  }

  {
    const ica::IcaModel model = ica::IcaModel::random(d, rng);
    double worst = 0.0;
    for (int k = 0; k < options.points; ++k) {
      const Matrix u = ComponentMatrix::random_feasible(d, rng).rows();
      Matrix ys(d, 7);
      Vector naive = Vector::Zero(d * d);
      for (int s = 0; s < ys.cols(); ++s) {
        ys.col(s) = ica::gen_ica_sample(model, rng);
        naive += ica::ica_stochastic_gradient(u, ys.col(s));
      }
      naive /= static_cast<double>(ys.cols());
      worst = std::max(worst, relative_error(ica::minibatch_gradient(u, ys), naive));
    }
    out.push_back(bound_check("minibatch_matches_naive", worst, 1e-12));
  }

  {
    double worst = 0.0;
    for (const ConstrainedProblem* p : {&pr.maxeig, &pr.correlation}) {
      for (int k = 0; k < options.points; ++k) {
        const Vector w = p->random_feasible(rng);
        worst = std::max(worst, std::abs(rlicq_sigma_min(*p->constraints, w) - 2.0));
        worst = std::max(worst, std::abs(rlicq_sigma_min_svd(*p->constraints, w) - 2.0));
      }
    }
    out.push_back(bound_check("rlicq_sigma_min", worst, 1e-12));
  }

  {
    const SphereProduct& sp = static_cast<const SphereProduct&>(*pr.correlation.constraints);
    const double r = kSphereCurvatureRadius;
    int violations = 0, trials = 0;
    for (int k = 0; k < 50 * options.points; ++k) {
      const Vector w0 = pr.correlation.random_feasible(rng);
      const Vector w = pr.correlation.random_feasible(rng);
      const double dist = (w - w0).norm();
      const TangentFrame f0 = tangent_frame(sp, w0);
      const TangentFrame f = tangent_frame(sp, w);
      const Vector vt = f.p_tangent * gaussian_unit(sp.ambient_dim(), rng);
      const Vector vn = f.p_normal * gaussian_unit(sp.ambient_dim(), rng);
      const Vector v = gaussian_unit(sp.ambient_dim(), rng);
      const double tol = 1e-12;
      trials += 4;
      if ((f0.p_normal * (w - w0)).norm() > dist * dist / (2.0 * r) + tol) ++violations;
      if (vt.norm() > 0 && (f0.p_normal * vt.normalized()).norm() > dist / r + tol) ++violations;
      if (vn.norm() > 0 && (f0.p_tangent * vn.normalized()).norm() > dist / r + tol) ++violations;
      const double eta = std::pow(10.0, -1 - (k % 3));
      const Vector moved = sp.project(w0 + eta * v);
      if ((moved - (w0 + eta * f0.p_tangent * v)).norm() > 4.0 * eta * eta / r + tol) ++violations;
    }
    out.push_back({"geometry_inequalities", violations == 0,
                   std::to_string(violations) + " violations in " + std::to_string(trials) + " checks"});
  }

  if (d >= 2) {
    const double tol = 1e-9;
    bool ok = true;
    std::ostringstream detail;
    double worst_saddle = -1e300, worst_min = 1e300;
    for (int p = 2; p <= d; ++p) {
      std::vector<int> support(p);
      for (int i = 0; i < p; ++i) support[i] = i;
      const double e = min_tangent_eig(pr.maxeig, balanced_saddle(basis, support)).value;
      worst_saddle = std::max(worst_saddle, e);
      ok = ok && e <= -7.0 / d + tol;
    }
    for (int i = 0; i < d; ++i) {
      for (double s : {1.0, -1.0}) {
        const double e = min_tangent_eig(pr.maxeig, s * basis.vector(i)).value;
        worst_min = std::min(worst_min, e);
        ok = ok && e >= 3.0 - tol;
      }
    }
    detail << "largest saddle eigenvalue " << worst_saddle << " (need <= " << -7.0 / d
           << "), smallest minimum eigenvalue " << worst_min << " (need >= 3)";
    out.push_back({"maxeig_saddle_eigenvalues", ok, detail.str()});
  }

  {
    Rng r2(options.seed ^ 0x2u);
    Problems small = make_problems(2, r2);
    SgdConfig cfg;
    cfg.iterations = 1000;
    cfg.seed = options.seed;
    cfg.record_timing = false;
    MinimaOptions mo;
    mo.workers = 1;
    const ica::SimpleSampler sampler(*small.tensor->basis());
    mo.sampler = &sampler;
    const MinimaCatalog cat = enumerate_minima(small.correlation, 100, cfg, mo);
    bool ok = cat.entries.size() == 8;
    double worst_dist = 0.0, worst_eig = 1e300;
    for (const auto& e : cat.entries) {
      const auto known = nearest_known_minimum(small.correlation, e.point);
      worst_dist = std::max(worst_dist, (e.point - *known).norm());
      worst_eig = std::min(worst_eig, e.min_tangent_eig);
    }
    ok = ok && worst_dist <= 1e-4 && worst_eig >= 1.0;
    out.push_back({"minima_count_d2", ok,
                   std::to_string(cat.entries.size()) + " minima, max distance to signed permutation " +
                       fmt(worst_dist) + ", min curvature " + fmt(worst_eig)});
  }

  {
    const int n = std::max(d, 2);
    const long t = 200;
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      Matrix m = rng.gaussian(n, n);
      Matrix h = 0.5 * (m + m.transpose()) / std::sqrt(static_cast<double>(n));
      const Vector w0 = rng.gaussian(n);
      const Vector g = rng.gaussian(n);
      const auto q = quadratic_objective(w0, g, h);
      SgdConfig cfg;
      cfg.eta = 0.01;
      cfg.iterations = t;
      cfg.record_every = t;
      cfg.record_timing = false;
      cfg.record_perturbations = true;
      Rng run_rng(options.seed + k);
      const RunRecord rec = noisy_sgd(*q, nullptr, w0, cfg, run_rng);
      const CouplingState cs = coupling_closed_form(g, h, rec.perturbations, cfg.eta, t);
      const Vector disp = rec.final_point - w0;
      const Vector grad = q->gradient(rec.final_point);
      for (Eigen::Index i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(disp(i) - cs.displacement(i)) / std::max(1.0, std::abs(disp(i))));
        worst = std::max(worst, std::abs(grad(i) - cs.gradient(i)) / std::max(1.0, std::abs(grad(i))));
      }
    }
    out.push_back(bound_check("coupling_closed_form", worst, 1e-10));
  }
  return out;
}

}  // namespace ssgd

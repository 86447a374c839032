#pragma once

#include "ssgd/common.hpp"
#include "ssgd/constraints.hpp"
#include "ssgd/objectives.hpp"

namespace ssgd {

/// Below this σ_min(C(w)) the constraint gradients count as dependent.
inline constexpr double kRlicqFloor = 1e-10;

/// Orthonormal bases of the tangent space 𝒯(w) = {v : ∇c_i(w)ᵀv = 0} and of
/// its complement, with the two orthogonal projectors.
struct TangentFrame {
  Vector point;
  Matrix tangent;  ///< n x (n − m), orthonormal columns
  Matrix normal;   ///< n x m, orthonormal columns spanning the ∇c_i
  Matrix p_tangent;
  Matrix p_normal;
};

/// Thresholds of the (α, γ, ε, δ) strict-saddle conditions.
struct SaddleParams {
  double alpha = 1.0;
  double gamma = 1.0;
  double epsilon = 1e-3;
  double delta = 1e-1;

  /// Throws std::invalid_argument unless every field is positive and finite.
  void validate() const;
};

/// Curvature radius used for sphere products (unit spheres, one constraint
/// per block).
inline constexpr double kSphereCurvatureRadius = 1.0;

/// λ* = argmin_λ ‖∇f(w) − C(w)λ‖, solved through C⁺ = (CᵀC)⁻¹Cᵀ.
/// Throws RlicqFailure when σ_min(C(w)) < kRlicqFloor.
Vector lagrange_multipliers(const ConstrainedProblem& problem, const Vector& w);

/// χ(w) = ∇f(w) − Σ λ_i* ∇c_i(w).
Vector chi(const ConstrainedProblem& problem, const Vector& w);
/// χ from an already computed ∇f.
Vector chi(const ConstraintSet& constraints, const Vector& w, const Vector& grad);

/// 𝔐(w) = ∇²f(w) − Σ λ_i* ∇²c_i(w), symmetrized.
Matrix lagrangian_hessian(const ConstrainedProblem& problem, const Vector& w);
/// ∇²f(w) − Σ λ_i ∇²c_i(w) for given multipliers.
Matrix lagrangian_hessian(const ConstrainedProblem& problem, const Vector& w,
                          const Vector& lambda);

/// Throws RlicqFailure when the constraint gradients are dependent.
TangentFrame tangent_frame(const ConstraintSet& constraints, const Vector& w);

struct TangentEig {
  double value = 0.0;
  Vector direction;  ///< unit vector in 𝒯(w)
};

/// Smallest eigenvalue of 𝔐(w) restricted to 𝒯(w), with its eigenvector.
TangentEig min_tangent_eig(const ConstrainedProblem& problem, const Vector& w);
TangentEig min_tangent_eig(const Matrix& lagrangian_hessian, const TangentFrame& frame);
/// All eigenvalues of the restriction, ascending.
Vector tangent_spectrum(const Matrix& lagrangian_hessian, const TangentFrame& frame);

/// σ_min(C(w)). Sphere products use the closed form 2·min_i ‖w_i‖.
double rlicq_sigma_min(const ConstraintSet& constraints, const Vector& w);
/// σ_min(C(w)) by SVD, for any constraint set.
double rlicq_sigma_min_svd(const ConstraintSet& constraints, const Vector& w);

/// Basis-coordinate closed forms. Maxeig acts on x = Aᵀu with one sphere;
/// correlation acts on the rows of UA with the HalfOrderedPairs scale.
/// For OrderedPairs, multiply λ, χ and 𝔐 by 2.
namespace closed_form {
double maxeig_lambda(const Vector& x);
Vector maxeig_chi(const Vector& x);
Matrix maxeig_lagrangian_hessian(const Vector& x);

/// λ_i = Σ_{j≠i} h(u_j, u_i).
Vector correlation_lambda(const Matrix& u_rows);
/// ψ_ik = Σ_{j≠i} (U_jk² − h(u_j, u_i)).
Matrix correlation_psi(const Matrix& u_rows);
/// χ_ik = 2 U_ik ψ_ik, flattened row-major.
Vector correlation_chi(const Matrix& u_rows);
/// Entry ((i,k),(i',k')): 2ψ_ik when equal, 4 U_i'k U_ik when i≠i', k=k', else 0.
Matrix correlation_lagrangian_hessian(const Matrix& u_rows);
}  // namespace closed_form

}  // namespace ssgd

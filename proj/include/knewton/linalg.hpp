#pragma once

#include <functional>

#include "knewton/errors.hpp"
#include "knewton/types.hpp"

namespace knewton {

// Matrix-free symmetric linear map. apply must be linear and dimension
// preserving; both CG and the power iterations below only ever touch the
// operator through it.
struct LinearOperator {
  Index dim = 0;
  std::function<Vector(const Vector&)> apply;

  static LinearOperator from_matrix(const Matrix& a);
};

struct CgReport {
  Vector solution;
  Index iterations = 0;
  double relative_residual = 0.0;  // true residual ||Ax-b||/||b|| at exit
  bool converged = false;          // false means the max_iter cap was hit
};

// Solves A X = B for SPD A via Cholesky. One step of iterative refinement is
// applied so the result stays accurate for moderately ill-conditioned A.
Matrix cholesky_solve(const Matrix& a, const Matrix& b);

// Plain (unpreconditioned) conjugate gradient. Convergence is decided on the
// true residual: when the recurrence says done, the residual is recomputed
// from scratch and iteration continues if the recurrence had drifted, so a
// converged report always means the returned relative_residual <= tol.
// Hitting max_iter is reported, not thrown; non-finite values throw.
CgReport conjugate_gradient(const LinearOperator& op, const Vector& b,
                            double tol, Index max_iter);

// Extremal eigenvalues of a symmetric operator by shifted power iterations:
// a dominant-magnitude estimate r first, then lambda_max from op + |r| I and
// lambda_min from lambda_max I - op. Convergence = relative Rayleigh-quotient
// change <= tol on three consecutive iterations; the start vector is the
// normalized all-ones plus a 1e-3 e1 perturbation.
struct ExtremalEigs {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
};
ExtremalEigs extremal_eigs(const LinearOperator& op, double tol = 1e-9,
                           Index max_iter = 100000);

// ||A - B||_2 for symmetric A, B via power iteration on (A-B)^2 (two applies
// per step, sign-free).
double spectral_norm_sym_diff(const Matrix& a, const Matrix& b,
                              double tol = 1e-9);

// Operator form of the above, for differences that are only available as
// maps (e.g. never-materialized approximate Hessians).
double spectral_norm_sym_diff(const LinearOperator& a, const LinearOperator& b,
                              double tol = 1e-9, Index max_iter = 100000);

// Moore-Penrose pseudo-inverse of a symmetric PSD matrix; eigenvalues below
// rank_tol * lambda_max are treated as zero.
Matrix pseudo_inverse_psd(const Matrix& a, double rank_tol = 1e-10);

// x = (Z C Z^T + mu I)^{-1} v by the matrix inversion lemma:
// x = (1/mu) [ v - Z (mu C^{-1} + Z^T Z)^{-1} Z^T v ].
// Cost O(m^2 n + m^3); the n x n matrix is never formed. The inner m x m
// solve gets one refinement step to keep the 1e-8 contract at small mu.
Vector woodbury_inverse_apply(const Matrix& z, const Matrix& c, double mu,
                              const Vector& v);

// Factorization-caching variant for repeated solves against the same (Z, C,
// mu); this is what the RFN Hessian operator uses per iteration.
class WoodburySolver {
 public:
  WoodburySolver(const Matrix& z, const Matrix& c, double mu);
  Vector solve(const Vector& v) const;
  double mu() const { return mu_; }

 private:
  const Matrix& z_;
  double mu_;
  Matrix w_;                    // mu C^{-1} + Z^T Z
  Eigen::LLT<Matrix> w_llt_;
};

}  // namespace knewton

#pragma once

// Regularized kernel empirical risk in the weight parameterization:
//
//   F(w) = c_loss * sum_i loss(y_i, (K w)_i) + (c_reg / 2) w^T K w
//
// with gradient K (c_loss r + c_reg w) where r_i = loss'(y_i, (K w)_i), and
// Hessian c_loss K D K + c_reg K where D = diag(loss''). Two scaling
// conventions are supported: "theory" uses (c_loss, c_reg) = (1, lambda),
// "experiment" uses (1/n, 2 lambda).

#include <functional>
#include <memory>
#include <string>

#include "knewton/errors.hpp"
#include "knewton/kernel.hpp"
#include "knewton/linalg.hpp"
#include "knewton/types.hpp"

namespace knewton {

enum class ScalingConvention { kTheory, kExperiment };

struct Scaling {
  double c_loss = 1.0;
  double c_reg = 0.0;
};

Scaling make_scaling(ScalingConvention convention, double lambda, Index n);

// Pointwise loss in (label, prediction) with first and second derivatives in
// the prediction argument. second_derivative_bound is the global sup of
// loss'' (1/4 for logistic, 1 for quadratic).
struct LossModel {
  std::string name;
  std::function<double(double y, double t)> value;
  std::function<double(double y, double t)> d1;
  std::function<double(double y, double t)> d2;
  double second_derivative_bound = 0.0;
};

LossModel logistic_loss();
LossModel quadratic_loss();
LossModel make_loss(const std::string& name);  // "logistic" | "quadratic"

// Labeled data plus the precomputed kernel Gram matrix; the unit every
// objective and optimizer routine consumes.
struct ProblemState {
  Matrix x;          // n x d
  Vector y;          // n
  KernelSpec kernel;
  Matrix k;          // n x n Gram matrix of x under kernel
  LossModel loss;
  double lambda = 0.0;
  Scaling scaling;

  Index n() const { return y.size(); }
};

ProblemState make_problem(Matrix x, Vector y, const KernelSpec& kernel,
                          LossModel loss, double lambda,
                          ScalingConvention convention);

// F(w); the _at variant reuses a cached t = K w.
double objective_value(const ProblemState& p, const Vector& w);
double objective_value_at(const ProblemState& p, const Vector& w,
                          const Vector& kw);

// grad F(w) = K (c_loss r + c_reg w).
Vector objective_gradient(const ProblemState& p, const Vector& w);
Vector objective_gradient_at(const ProblemState& p, const Vector& w,
                             const Vector& kw);

// D(w) = diag(loss''(y_i, (K w)_i)) as a vector.
Vector d_diagonal(const ProblemState& p, const Vector& kw);

// Dense Hessian c_loss K D K + c_reg K, symmetrized. Refuses n beyond the
// cap to keep accidental O(n^3) assemblies out of large runs.
Matrix hessian_dense(const ProblemState& p, const Vector& w,
                     Index dense_cap = 4096);

// Exact Hessian plus a ridge as a matrix-free operator (for CG and spectra).
// The operator keeps a reference to p.k; p must outlive it.
LinearOperator hessian_operator(const ProblemState& p, const Vector& w,
                                double mu);

// Random-feature Hessian approximation
//   H_hat = Z (c_loss Z^T D Z + c_reg I) Z^T
// held in factored form. apply() costs O(nm), inverse_apply() uses the
// Woodbury identity against H_hat + mu I and costs O(nm) after the O(m^2 n)
// setup. The bundle's Z is stored inside; the operator owns its state.
class RfnHessianOperator {
 public:
  // z is the scaled feature matrix for the current iterate's draw; d is the
  // loss curvature diagonal at the iterate.
  RfnHessianOperator(Matrix z, const Vector& d, const Scaling& scaling,
                     double mu);

  // internal factorization references the stored Z, so the operator is pinned
  RfnHessianOperator(const RfnHessianOperator&) = delete;
  RfnHessianOperator& operator=(const RfnHessianOperator&) = delete;
  RfnHessianOperator(RfnHessianOperator&&) = delete;
  RfnHessianOperator& operator=(RfnHessianOperator&&) = delete;

  Vector apply(const Vector& v) const;          // (H_hat + mu I) v
  Vector apply_no_ridge(const Vector& v) const; // H_hat v
  Vector inverse_apply(const Vector& v) const;  // (H_hat + mu I)^{-1} v

  Index dim() const { return z_.rows(); }
  Index feature_count() const { return z_.cols(); }
  double mu() const { return mu_; }
  const Matrix& z() const { return z_; }

 private:
  Matrix z_;   // n x m
  Matrix c_;   // m x m, c_loss Z^T D Z + c_reg I
  double mu_;
  std::unique_ptr<WoodburySolver> solver_;
};

// Sub-sampled Newton Hessian approximation over an index subset:
//   H_tilde = s c_loss K_VI D_II K_VI^T + c_reg K_VI K_II^+ K_VI^T
// where K_VI = K(:, I), K_II = K(I, I), and s = n/|I| when rescaled. The
// slices arrive as precomputed NystromFactors.
class SsnHessianOperator {
 public:
  SsnHessianOperator(const ProblemState& p, const Vector& w,
                     const NystromFactors& factors, double mu,
                     bool rescale = true);

  Vector apply(const Vector& v) const;  // (H_tilde + mu I) v
  LinearOperator as_operator() const;

  Index dim() const { return k_vi_.rows(); }
  Index subset_size() const { return k_vi_.cols(); }

 private:
  Matrix k_vi_;       // n x k
  Matrix k_ii_pinv_;  // k x k
  Vector d_ii_;       // k
  double s_c_loss_;
  double c_reg_;
  double mu_;
};

}  // namespace knewton

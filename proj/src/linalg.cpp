#include "knewton/linalg.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace knewton {

namespace {

void check_square(const Matrix& a, const char* who) {
  if (a.rows() != a.cols())
    throw DimensionMismatch(std::string(who) + ": matrix not square");
}

void check_symmetric(const Matrix& a, const char* who, double rel_tol = 1e-10) {
  const double scale = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
  const double asym = a.size() ? (a - a.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > rel_tol * (1.0 + scale))
    throw NotSymmetric(std::string(who) + ": matrix not symmetric");
}

// Rayleigh-quotient power iteration on a PSD map; convergence is a relative
// change <= tol on three consecutive iterations. Returns the converged
// Rayleigh quotient, or throws Stagnation when the cap is hit and
// require_convergence is set.
double power_rayleigh(const std::function<Vector(const Vector&)>& apply,
                      Index dim, double tol, Index max_iter,
                      bool require_convergence) {
  Vector v = Vector::Ones(dim);
  if (dim > 0) v[0] += 1e-3;
  v.normalize();
  double rho_prev = 0.0;
  int stable = 0;
  double rho = 0.0;
  for (Index it = 0; it < max_iter; ++it) {
    Vector w = apply(v);
    if (!w.allFinite())
      throw NonFiniteEncountered("power iteration: non-finite apply result");
    rho = v.dot(w);
    const double wn = w.norm();
    if (wn <= 1e-300) return 0.0;  // v is (numerically) in the null space
    v = w / wn;
    const double change = std::abs(rho - rho_prev);
    if (it > 0 && change <= tol * std::max(std::abs(rho), 1e-300)) {
      if (++stable >= 3) return rho;
    } else {
      stable = 0;
    }
    rho_prev = rho;
  }
  if (require_convergence)
    throw Stagnation("power iteration: no convergence within max_iter");
  return rho;
}

}  // namespace

LinearOperator LinearOperator::from_matrix(const Matrix& a) {
  LinearOperator op;
  op.dim = a.rows();
  op.apply = [m = a](const Vector& v) -> Vector { return m * v; };
  return op;
}

Matrix cholesky_solve(const Matrix& a, const Matrix& b) {
  check_square(a, "cholesky_solve");
  if (a.rows() != b.rows())
    throw DimensionMismatch("cholesky_solve: A rows != B rows");
  check_symmetric(a, "cholesky_solve");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("cholesky_solve: factorization failed");
  Matrix x = llt.solve(b);
  // one refinement step: keeps the 1e-10 residual contract at cond ~ 1e6
  x += llt.solve(b - a * x);
  return x;
}

CgReport conjugate_gradient(const LinearOperator& op, const Vector& b,
                            double tol, Index max_iter) {
  if (op.dim != b.size())
    throw DimensionMismatch("conjugate_gradient: operator/vector dims");
  CgReport rep;
  rep.solution = Vector::Zero(b.size());
  const double bnorm = b.norm();
  if (bnorm <= 1e-300) {  // reference norm below floor: absolute convention
    rep.converged = true;
    return rep;
  }
  Vector x = Vector::Zero(b.size());
  Vector r = b;
  Vector p = r;
  double rs = r.squaredNorm();
  for (Index it = 1; it <= max_iter; ++it) {
    Vector ap = op.apply(p);
    const double pap = p.dot(ap);
    const double alpha = rs / pap;
    if (!std::isfinite(alpha))
      throw NonFiniteEncountered("conjugate_gradient: breakdown (p^T A p)");
    x += alpha * p;
    r -= alpha * ap;
    if (!r.allFinite())
      throw NonFiniteEncountered("conjugate_gradient: non-finite residual");
    const double rs_next = r.squaredNorm();
    rep.iterations = it;
    if (std::sqrt(rs_next) <= tol * bnorm) {
      // the recurrence says converged; re-verify on the true residual so the
      // reported value is trustworthy
      Vector r_true = b - op.apply(x);
      const double true_norm = r_true.norm();
      if (true_norm <= tol * bnorm) {
        rep.solution = x;
        rep.relative_residual = true_norm / bnorm;
        rep.converged = true;
        return rep;
      }
      r = r_true;  // drifted: restart from the true residual
      p = r;
      rs = r.squaredNorm();
      continue;
    }
    const double beta = rs_next / rs;
    p = r + beta * p;
    rs = rs_next;
  }
  rep.solution = x;
  rep.relative_residual = (b - op.apply(x)).norm() / bnorm;
  rep.converged = false;
  return rep;
}

ExtremalEigs extremal_eigs(const LinearOperator& op, double tol,
                           Index max_iter) {
  if (op.dim <= 0) throw DimensionMismatch("extremal_eigs: empty operator");
  // phase 1: dominant magnitude r from the squared operator (sign-proof)
  const double rho_sq = power_rayleigh(
      [&](const Vector& v) { return op.apply(op.apply(v)); }, op.dim, tol,
      max_iter, true);
  const double r = std::sqrt(std::max(rho_sq, 0.0));
  // phase 2: op + rI is PSD, its top eigenvalue is lambda_max + r
  const double top_shifted = power_rayleigh(
      [&](const Vector& v) -> Vector { return op.apply(v) + r * v; }, op.dim,
      tol, max_iter, true);
  ExtremalEigs out;
  out.lambda_max = top_shifted - r;
  // phase 3: lambda_max I - op is PSD with top eigenvalue lambda_max - lambda_min
  const double spread = power_rayleigh(
      [&](const Vector& v) -> Vector {
        return out.lambda_max * v - op.apply(v);
      },
      op.dim, tol, max_iter, true);
  out.lambda_min = out.lambda_max - spread;
  return out;
}

double spectral_norm_sym_diff(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("spectral_norm_sym_diff: shape mismatch");
  check_square(a, "spectral_norm_sym_diff");
  Matrix d = a - b;
  if (d.size() == 0 || d.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  const double rho = power_rayleigh(
      [&](const Vector& v) -> Vector { return d * (d * v); }, d.rows(), tol,
      100000, false);
  return std::sqrt(std::max(rho, 0.0));
}

double spectral_norm_sym_diff(const LinearOperator& a, const LinearOperator& b,
                              double tol, Index max_iter) {
  if (a.dim != b.dim)
    throw DimensionMismatch("spectral_norm_sym_diff: operator dims");
  auto diff = [&](const Vector& v) -> Vector {
    return a.apply(v) - b.apply(v);
  };
  const double rho = power_rayleigh(
      [&](const Vector& v) { return diff(diff(v)); }, a.dim, tol, max_iter,
      false);
  return std::sqrt(std::max(rho, 0.0));
}

Matrix pseudo_inverse_psd(const Matrix& a, double rank_tol) {
  check_square(a, "pseudo_inverse_psd");
  check_symmetric(a, "pseudo_inverse_psd");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success)
    throw NotSymmetric("pseudo_inverse_psd: eigendecomposition failed");
  const Vector& lam = es.eigenvalues();
  const double lam_max = lam.size() ? std::max(lam.maxCoeff(), 0.0) : 0.0;
  const double cut = rank_tol * lam_max;
  Vector inv(lam.size());
  for (Index i = 0; i < lam.size(); ++i)
    inv[i] = lam[i] > cut ? 1.0 / lam[i] : 0.0;
  Matrix out = es.eigenvectors() * inv.asDiagonal() *
               es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

WoodburySolver::WoodburySolver(const Matrix& z, const Matrix& c, double mu)
    : z_(z), mu_(mu) {
  if (mu <= 0.0) throw ArgumentOutOfRange("woodbury: mu must be positive");
  const Index m = z.cols();
  if (c.rows() != m || c.cols() != m)
    throw DimensionMismatch("woodbury: C must be m x m");
  Eigen::LLT<Matrix> c_llt(c);
  if (c_llt.info() != Eigen::Success)
    throw NotPositiveDefinite("woodbury: C factorization failed");
  Matrix c_inv = c_llt.solve(Matrix::Identity(m, m));
  c_inv += c_llt.solve(Matrix::Identity(m, m) - c * c_inv);
  w_ = mu * c_inv;
  w_.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
  w_ = w_.selfadjointView<Eigen::Lower>();
  w_llt_.compute(w_);
  if (w_llt_.info() != Eigen::Success)
    throw NotPositiveDefinite("woodbury: inner factorization failed");
}

Vector WoodburySolver::solve(const Vector& v) const {
  if (v.size() != z_.rows())
    throw DimensionMismatch("woodbury: vector dim != Z rows");
  Vector zt_v = z_.transpose() * v;
  Vector y = w_llt_.solve(zt_v);
  y += w_llt_.solve(zt_v - w_ * y);  // refinement for the small-mu regime
  return (v - z_ * y) / mu_;
}

Vector woodbury_inverse_apply(const Matrix& z, const Matrix& c, double mu,
                              const Vector& v) {
  if (z.rows() != v.size())
    throw DimensionMismatch("woodbury_inverse_apply: Z rows != dim(v)");
  return WoodburySolver(z, c, mu).solve(v);
}

}  // namespace knewton

#include "knewton/diagnostics.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "knewton/kernel.hpp"
#include "knewton/linalg.hpp"
#include "knewton/rng.hpp"

namespace knewton {

namespace {

void check_diag_cap(Index n, const char* who) {
  if (n > kDiagnosticsDenseCap)
    throw ArgumentOutOfRange(std::string(who) +
                             ": n exceeds the diagnostics dense cap");
}

// Dense random-feature Hessian without the ridge, assembled through
// G = Z Z^T so only n x n products appear:
//   H_hat = c_loss G D G + c_reg G.
Matrix rfn_hessian_dense_from_gram(const Matrix& g, const Vector& d,
                                   const Scaling& scaling) {
  Matrix h = scaling.c_loss * (g * d.asDiagonal() * g) + scaling.c_reg * g;
  return 0.5 * (h + h.transpose());
}

double spectral_norm_psd(const Matrix& a) {
  return spectral_norm_sym_diff(a, Matrix::Zero(a.rows(), a.cols()));
}

}  // namespace

TheoryConstants measure_constants(const ProblemState& p, const Vector& w_ref,
                                  bool estimate_lipschitz) {
  check_diag_cap(p.n(), "measure_constants");
  TheoryConstants out;
  Matrix h = hessian_dense(p, w_ref, kDiagnosticsDenseCap);
  ExtremalEigs ee = extremal_eigs(LinearOperator::from_matrix(h));
  out.gamma_hat = ee.lambda_min;
  out.l_hat = ee.lambda_max;
  if (!(out.gamma_hat > 0.0))
    throw NotPositiveDefinite(
        "measure_constants: measured lambda_min(H) <= 0");
  out.kappa_hat = out.l_hat / out.gamma_hat;
  out.lambda1 = p.loss.second_derivative_bound;
  out.zeta_bar = p.k.trace() * spectral_norm_psd(p.k) * out.lambda1;
  out.psi_bar = 4.0 * out.zeta_bar / out.gamma_hat;
  if (estimate_lipschitz) {
    // max over 20 fixed pairs of ||H(w1) - H(w2)|| / ||w1 - w2||; the
    // difference collapses to c_loss K (D1 - D2) K
    Rng rng(0x64696167ull);  // fixed stream, part of the reported estimate
    double best = 0.0;
    for (int pair = 0; pair < 20; ++pair) {
      Vector w1(p.n()), w2(p.n());
      for (Index i = 0; i < p.n(); ++i) w1[i] = rng.gaussian();
      for (Index i = 0; i < p.n(); ++i) w2[i] = rng.gaussian();
      Vector d1 = d_diagonal(p, p.k * w1), d2 = d_diagonal(p, p.k * w2);
      Matrix hd =
          p.scaling.c_loss * (p.k * (d1 - d2).asDiagonal() * p.k);
      const double dist = (w1 - w2).norm();
      if (dist > 0.0) best = std::max(best, spectral_norm_psd(hd) / dist);
    }
    out.m_hat = best;
  }
  return out;
}

SpectralTrialReport spectral_error_trials(const ProblemState& p,
                                          const Vector& w, Index m,
                                          Index trials, std::uint64_t seed,
                                          double threshold) {
  check_diag_cap(p.n(), "spectral_error_trials");
  if (m < 1 || trials < 1)
    throw ArgumentOutOfRange("spectral_error_trials: m and trials must be >= 1");
  SpectralTrialReport rep;
  rep.m = m;
  rep.trials = trials;
  rep.threshold = threshold;
  Matrix h = hessian_dense(p, w, kDiagnosticsDenseCap);
  const double h_norm = spectral_norm_psd(h);
  Vector d = d_diagonal(p, p.k * w);
  for (Index trial = 0; trial < trials; ++trial) {
    Rng rng(Rng::substream_seed(seed, static_cast<std::uint64_t>(trial)));
    Matrix g = feature_gram(p.x, m, p.kernel, rng);
    Matrix h_hat = rfn_hessian_dense_from_gram(g, d, p.scaling);
    const double err = spectral_norm_sym_diff(h_hat, h);
    rep.errors.push_back(err);
    rep.relative_errors.push_back(err / h_norm);
    if (err <= threshold) ++rep.success_count;
  }
  return rep;
}

SandwichReport eigenvalue_sandwich_check(const Matrix& h_hat,
                                         const TheoryConstants& constants,
                                         double epsilon) {
  if (epsilon < 0.0)
    throw ArgumentOutOfRange("eigenvalue_sandwich_check: epsilon < 0");
  ExtremalEigs ee = extremal_eigs(LinearOperator::from_matrix(h_hat));
  SandwichReport rep;
  rep.lambda_max = ee.lambda_max;
  rep.lambda_min = ee.lambda_min;
  const double eps_psi = epsilon * constants.psi_bar;
  rep.lower_bound = (1.0 - eps_psi) * constants.gamma_hat;
  rep.upper_bound = (1.0 + eps_psi) * constants.l_hat;
  rep.pass =
      rep.lambda_max >= rep.lower_bound && rep.lambda_max <= rep.upper_bound;
  return rep;
}

double effective_dimension(const Matrix& k, double gamma) {
  if (k.rows() != k.cols())
    throw DimensionMismatch("effective_dimension: K not square");
  if (!(gamma > 0.0))
    throw ArgumentOutOfRange("effective_dimension: gamma must be positive");
  Matrix shifted = k;
  shifted.diagonal().array() += gamma;
  Matrix solved = cholesky_solve(shifted, k);
  return solved.trace();
}

Index rff_count_bound(Index n, double gamma, double epsilon, double delta,
                      double s_gamma) {
  if (n < 1) throw ArgumentOutOfRange("rff_count_bound: n must be >= 1");
  if (!(gamma > 0.0))
    throw ArgumentOutOfRange("rff_count_bound: gamma must be positive");
  if (!(epsilon > 0.0) || epsilon > 0.5)
    throw ArgumentOutOfRange("rff_count_bound: epsilon must be in (0, 1/2]");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw ArgumentOutOfRange("rff_count_bound: delta must be in (0, 1)");
  if (!(s_gamma > 0.0))
    throw ArgumentOutOfRange("rff_count_bound: s_gamma must be positive");
  const double bound = (8.0 / 3.0) / (epsilon * epsilon) *
                       (static_cast<double>(n) / gamma) *
                       std::log(16.0 * s_gamma / delta);
  if (!(bound >= 1.0)) return 1;
  return static_cast<Index>(std::ceil(bound));
}

bool epsilon_spectral_check(const Matrix& k, const Matrix& z, double gamma,
                            double epsilon) {
  if (z.rows() != k.rows())
    throw DimensionMismatch("epsilon_spectral_check: Z rows != n");
  Matrix g = Matrix::Zero(k.rows(), k.rows());
  g.selfadjointView<Eigen::Lower>().rankUpdate(z);
  g = g.selfadjointView<Eigen::Lower>();
  return epsilon_spectral_check_gram(k, g, gamma, epsilon);
}

bool epsilon_spectral_check_gram(const Matrix& k, const Matrix& g,
                                 double gamma, double epsilon) {
  if (k.rows() != k.cols() || g.rows() != g.cols() || k.rows() != g.rows())
    throw DimensionMismatch("epsilon_spectral_check: shape mismatch");
  if (!(gamma > 0.0))
    throw ArgumentOutOfRange("epsilon_spectral_check: gamma must be positive");
  if (epsilon < 0.0)
    throw ArgumentOutOfRange("epsilon_spectral_check: epsilon < 0");
  // upper side: (1+eps)(K + gamma I) - (G + gamma I) = (1+eps)K - G + eps gamma I
  Matrix hi = (1.0 + epsilon) * k - g;
  hi.diagonal().array() += epsilon * gamma;
  // lower side: (G + gamma I) - (1-eps)(K + gamma I) = G - (1-eps)K + eps gamma I
  Matrix lo = g - (1.0 - epsilon) * k;
  lo.diagonal().array() += epsilon * gamma;
  Eigen::SelfAdjointEigenSolver<Matrix> es_hi(hi, Eigen::EigenvaluesOnly);
  if (es_hi.eigenvalues().minCoeff() < -1e-9) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es_lo(lo, Eigen::EigenvaluesOnly);
  return es_lo.eigenvalues().minCoeff() >= -1e-9;
}

std::vector<double> convergence_ratios(const OptimizerTrace& trace,
                                       const Vector& w_star) {
  if (trace.iterates.empty())
    throw IteratesNotRecorded(
        "convergence_ratios: trace has no recorded iterates");
  std::vector<double> ratios;
  for (std::size_t t = 1; t < trace.iterates.size(); ++t) {
    const double denom = (trace.iterates[t - 1] - w_star).norm();
    if (denom <= 1e-14) break;
    ratios.push_back((trace.iterates[t] - w_star).norm() / denom);
  }
  return ratios;
}

WilsonInterval wilson_interval(Index successes, Index trials) {
  if (trials < 1)
    throw ArgumentOutOfRange("wilson_interval: trials must be >= 1");
  if (successes < 0 || successes > trials)
    throw ArgumentOutOfRange("wilson_interval: successes out of range");
  const double z = 1.959963984540054;  // two-sided 95%
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  WilsonInterval w;
  w.lo = std::max(0.0, center - half);
  w.hi = std::min(1.0, center + half);
  return w;
}

}  // namespace knewton

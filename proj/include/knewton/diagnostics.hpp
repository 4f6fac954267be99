#pragma once

// Empirical verification of the spectral and convergence theory: measured
// Hessian eigenvalue bounds, spectral error of the random-feature Hessian,
// the two-sided epsilon containment test, effective dimension, the feature
// count bound, and convergence-ratio extraction from traces.

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "knewton/objective.hpp"
#include "knewton/optimize.hpp"
#include "knewton/types.hpp"

namespace knewton {

// Dense-assembly guard for diagnostics work (eigendecompositions ahead).
inline constexpr Index kDiagnosticsDenseCap = 1024;

struct TheoryConstants {
  double gamma_hat = 0.0;  // measured lambda_min of H at the reference point
  double l_hat = 0.0;      // measured lambda_max
  double kappa_hat = 0.0;  // l_hat / gamma_hat
  double lambda1 = 0.0;    // global bound on loss''
  double zeta_bar = 0.0;   // Tr(K) ||K|| lambda1
  double psi_bar = 0.0;    // 4 zeta_bar / gamma_hat
  std::optional<double> m_hat;  // empirical Hessian-Lipschitz lower bound
};

struct SpectralTrialReport {
  Index m = 0;
  Index trials = 0;
  std::vector<double> errors;           // ||H_hat - H||_2 per trial
  std::vector<double> relative_errors;  // errors / ||H||_2
  Index success_count = 0;              // errors <= threshold
  double threshold = 0.0;
};

struct SandwichReport {
  bool pass = false;
  double lambda_max = 0.0;  // of H_hat
  double lambda_min = 0.0;
  double lower_bound = 0.0;  // (1 - eps psi_bar) gamma_hat
  double upper_bound = 0.0;  // (1 + eps psi_bar) l_hat
};

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// Measured eigenvalue bounds of the dense Hessian at w_ref, the loss
// curvature bound, and the derived spectral-error constants. The Lipschitz
// estimate is a max over 20 fixed-seed random pairs and is a lower bound on
// the true constant; skip it with estimate_lipschitz = false.
TheoryConstants measure_constants(const ProblemState& p, const Vector& w_ref,
                                  bool estimate_lipschitz = true);

// trials independent feature draws at a fixed w; per trial the dense
// random-feature Hessian (no ridge) is assembled through G = Z Z^T and
// compared against the exact dense Hessian in spectral norm. success_count
// counts errors <= threshold.
SpectralTrialReport spectral_error_trials(
    const ProblemState& p, const Vector& w, Index m, Index trials,
    std::uint64_t seed,
    double threshold = std::numeric_limits<double>::infinity());

// Checks lambda_max(H_hat) against [(1 - eps psi) gamma_hat,
// (1 + eps psi) l_hat] and reports the raw extremal eigenvalues.
SandwichReport eigenvalue_sandwich_check(const Matrix& h_hat,
                                         const TheoryConstants& constants,
                                         double epsilon);

// S_gamma(K) = Tr(K (K + gamma I)^{-1}) via a Cholesky solve.
double effective_dimension(const Matrix& k, double gamma);

// Feature count m = ceil((8/3) eps^-2 (n/gamma) ln(16 S / delta)), clamped
// below at 1 (the bound is vacuous when the formula dips under one).
Index rff_count_bound(Index n, double gamma, double epsilon, double delta,
                      double s_gamma);

// Two-sided containment (1-eps)(K+gamma I) <= Z Z^T + gamma I <=
// (1+eps)(K+gamma I), tested as lambda_min >= -1e-9 on both differences.
bool epsilon_spectral_check(const Matrix& k, const Matrix& z, double gamma,
                            double epsilon);
// Same test from a precomputed G = Z Z^T (for feature counts too large to
// materialize Z).
bool epsilon_spectral_check_gram(const Matrix& k, const Matrix& g,
                                 double gamma, double epsilon);

// r_t = ||w_t - w*|| / ||w_{t-1} - w*|| for consecutive recorded iterates,
// stopping once the denominator drops under 1e-14.
std::vector<double> convergence_ratios(const OptimizerTrace& trace,
                                       const Vector& w_star);

// Two-sided 95% Wilson score interval for a binomial proportion.
WilsonInterval wilson_interval(Index successes, Index trials);

}  // namespace knewton

#pragma once

// Gaussian kernel evaluation and random Fourier feature maps.
//
// Conventions used throughout:
//   k(x, x') = exp(-sigma^2 ||x - x'||^2 / 2)
//   feature frequencies omega_s ~ N(0, sigma^2 I), phases b_s ~ U[0, 2pi)
//   Z(i, s) = sqrt(2/m) cos(omega_s . x_i + b_s)
// so E[Z Z^T] = K entrywise.

#include <cstdint>
#include <vector>

#include "knewton/errors.hpp"
#include "knewton/rng.hpp"
#include "knewton/types.hpp"

namespace knewton {

struct KernelSpec {
  double sigma = 1.0;  // bandwidth; must be positive and finite
};

// Feature frequencies and phases for one draw of m random features.
struct FeatureBundle {
  Matrix omega;  // m x d, row s is omega_s
  Vector phase;  // m, entries in [0, 2pi)
};

// Nystrom factors for an index subset of a Gram matrix: the column slice
// K_VI = K(:, I) and the pseudo-inverse of the landmark block K(I, I), so
// K is approximated by K_VI * K_II_pinv * K_VI^T.
struct NystromFactors {
  std::vector<Index> subset;  // distinct, in [0, n)
  Matrix k_vi;                // n x k
  Matrix k_ii_pinv;           // k x k, symmetric PSD
};

// Exact Gaussian Gram matrix K(X, X), n x n, symmetric, unit diagonal,
// entries clamped to [0, 1]. Throws ArgumentOutOfRange for bad sigma,
// NonFiniteInput for non-finite rows.
Matrix gram_matrix(const Matrix& x, const KernelSpec& spec);

// Cross Gram matrix K(A, B), a.rows() x b.rows(). Column counts must agree.
Matrix gram_matrix(const Matrix& a, const Matrix& b, const KernelSpec& spec);

// Draws m feature rows from rng. Draw order is fixed: for each feature s,
// first the d components of omega_s, then the phase b_s. Chunked consumers
// rely on this order to reproduce a draw incrementally.
FeatureBundle sample_features(Index m, Index d, const KernelSpec& spec,
                              Rng& rng);

// Z = sqrt(2/m) cos(X omega^T + 1 phase^T), n x m.
Matrix feature_matrix(const Matrix& x, const FeatureBundle& bundle);

// G = Z Z^T for a draw of m features, assembled in column chunks so the
// n x m intermediate never exists when m is huge. The feature draw consumed
// from rng is bitwise identical to sample_features(m, ...) regardless of
// chunk size; the accumulated product agrees with the explicit Z Z^T up to
// roundoff.
Matrix feature_gram(const Matrix& x, Index m, const KernelSpec& spec,
                    Rng& rng, Index chunk = 8192);

// Slices K_VI and K_II out of a precomputed Gram matrix and pseudo-inverts
// the landmark block with the given rank tolerance. Indices must be distinct
// and in range; they need not be sorted. Throws IndexOutOfRange or
// DuplicateIndex on bad subsets.
NystromFactors nystrom_factors(const Matrix& k, const std::vector<Index>& subset,
                               double rank_tol = 1e-10);

}  // namespace knewton

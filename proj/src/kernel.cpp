#include "knewton/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "fastcos.hpp"
#include "knewton/linalg.hpp"

namespace knewton {

namespace {

void check_spec(const KernelSpec& spec) {
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma))
    throw ArgumentOutOfRange("kernel: sigma must be positive and finite");
}

void check_finite_rows(const Matrix& x, const char* who) {
  if (!x.allFinite())
    throw NonFiniteInput(std::string(who) + ": non-finite input rows");
}

// Squared distances via the inner-product expansion; negatives from
// cancellation are clamped at the kernel stage.
Matrix sq_dists(const Matrix& a, const Matrix& b) {
  Vector an = a.rowwise().squaredNorm();
  Vector bn = b.rowwise().squaredNorm();
  Matrix d2 = -2.0 * (a * b.transpose());
  d2.colwise() += an;
  d2.rowwise() += bn.transpose();
  return d2;
}

}  // namespace

Matrix gram_matrix(const Matrix& x, const KernelSpec& spec) {
  check_spec(spec);
  check_finite_rows(x, "gram_matrix");
  if (x.rows() == 0) throw DimensionMismatch("gram_matrix: empty input");
  Matrix k = sq_dists(x, x);
  k *= -0.5 * spec.sigma * spec.sigma;
  k = k.array().exp();
  k = k.cwiseMax(0.0).cwiseMin(1.0);
  k = 0.5 * (k + k.transpose());
  k.diagonal().setOnes();
  return k;
}

Matrix gram_matrix(const Matrix& a, const Matrix& b, const KernelSpec& spec) {
  check_spec(spec);
  check_finite_rows(a, "gram_matrix");
  check_finite_rows(b, "gram_matrix");
  if (a.cols() != b.cols())
    throw DimensionMismatch("gram_matrix: feature dimensions differ");
  if (a.rows() == 0 || b.rows() == 0)
    throw DimensionMismatch("gram_matrix: empty input");
  Matrix k = sq_dists(a, b);
  k *= -0.5 * spec.sigma * spec.sigma;
  k = k.array().exp();
  return k.cwiseMax(0.0).cwiseMin(1.0);
}

FeatureBundle sample_features(Index m, Index d, const KernelSpec& spec,
                              Rng& rng) {
  check_spec(spec);
  if (m <= 0 || d <= 0)
    throw ArgumentOutOfRange("sample_features: m and d must be positive");
  FeatureBundle out;
  out.omega.resize(m, d);
  out.phase.resize(m);
  constexpr double two_pi = 6.283185307179586476925286766559;
  for (Index s = 0; s < m; ++s) {
    for (Index j = 0; j < d; ++j) out.omega(s, j) = spec.sigma * rng.gaussian();
    out.phase[s] = two_pi * rng.uniform53();
  }
  return out;
}

Matrix feature_matrix(const Matrix& x, const FeatureBundle& bundle) {
  check_finite_rows(x, "feature_matrix");
  if (x.cols() != bundle.omega.cols())
    throw DimensionMismatch("feature_matrix: feature dimensions differ");
  const Index m = bundle.omega.rows();
  if (bundle.phase.size() != m)
    throw DimensionMismatch("feature_matrix: omega/phase row counts differ");
  Matrix z = x * bundle.omega.transpose();
  z.rowwise() += bundle.phase.transpose();
  detail::cos_inplace(z.data(), z.size());
  if (!z.allFinite())
    throw NonFiniteEncountered("feature_matrix: non-finite features");
  z *= std::sqrt(2.0 / static_cast<double>(m));
  return z;
}

Matrix feature_gram(const Matrix& x, Index m, const KernelSpec& spec,
                    Rng& rng, Index chunk) {
  check_spec(spec);
  check_finite_rows(x, "feature_gram");
  if (m <= 0) throw ArgumentOutOfRange("feature_gram: m must be positive");
  if (chunk <= 0) throw ArgumentOutOfRange("feature_gram: bad chunk size");
  const Index n = x.rows();
  const Index d = x.cols();
  constexpr double two_pi = 6.283185307179586476925286766559;
  Matrix g = Matrix::Zero(n, n);
  Matrix omega;
  Vector phase;
  for (Index start = 0; start < m; start += chunk) {
    const Index mc = std::min(chunk, m - start);
    omega.resize(mc, d);
    phase.resize(mc);
    // same per-feature draw order as sample_features, continued across chunks
    for (Index s = 0; s < mc; ++s) {
      for (Index j = 0; j < d; ++j) omega(s, j) = spec.sigma * rng.gaussian();
      phase[s] = two_pi * rng.uniform53();
    }
    Matrix zc = x * omega.transpose();
    zc.rowwise() += phase.transpose();
    detail::cos_inplace(zc.data(), zc.size());
    if (!zc.allFinite())
      throw NonFiniteEncountered("feature_gram: non-finite features");
    g.selfadjointView<Eigen::Lower>().rankUpdate(zc, 2.0 / static_cast<double>(m));
  }
  g = g.selfadjointView<Eigen::Lower>();
  return g;
}

NystromFactors nystrom_factors(const Matrix& k, const std::vector<Index>& subset,
                               double rank_tol) {
  if (k.rows() != k.cols())
    throw DimensionMismatch("nystrom_factors: gram matrix must be square");
  if (subset.empty())
    throw ArgumentOutOfRange("nystrom_factors: empty subset");
  std::vector<Index> seen(subset);
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i] < 0 || seen[i] >= k.rows())
      throw IndexOutOfRange("nystrom_factors: subset index out of range");
    if (i > 0 && seen[i] == seen[i - 1])
      throw DuplicateIndex("nystrom_factors: duplicate subset index");
  }
  const Index s = static_cast<Index>(subset.size());
  NystromFactors out;
  out.k_vi.resize(k.rows(), s);
  Matrix k_ii(s, s);
  for (Index j = 0; j < s; ++j) {
    out.k_vi.col(j) = k.col(subset[static_cast<std::size_t>(j)]);
    for (Index i = 0; i < s; ++i)
      k_ii(i, j) = k(subset[static_cast<std::size_t>(i)],
                     subset[static_cast<std::size_t>(j)]);
  }
  out.k_ii_pinv = pseudo_inverse_psd(k_ii, rank_tol);
  out.subset = subset;
  return out;
}

}  // namespace knewton

#pragma once

// Independent reference implementations used to freeze expected values in
// tests. Nothing here calls into the library's linear algebra: eigenvalues
// come from a hand-rolled cyclic Jacobi sweep, inverses from Gaussian
// elimination with partial pivoting, and derivatives from central finite
// differences. Slow and simple on purpose.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace oracles {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Cyclic Jacobi eigendecomposition for symmetric matrices. Returns
// eigenvalues ascending; optionally accumulates eigenvectors (columns of V,
// A = V diag(lam) V^T).
inline Vector jacobi_eigenvalues(Matrix a, Matrix* v_out = nullptr,
                                 int max_sweeps = 100, double tol = 1e-14) {
  const int n = static_cast<int>(a.rows());
  Matrix v = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    const double scale = a.diagonal().cwiseAbs().maxCoeff() + 1.0;
    if (std::sqrt(off) <= tol * scale) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  Vector lam = a.diagonal();
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return lam[i] < lam[j]; });
  Vector sorted(n);
  Matrix vs(n, n);
  for (int i = 0; i < n; ++i) {
    sorted[i] = lam[order[i]];
    vs.col(i) = v.col(order[i]);
  }
  if (v_out) *v_out = vs;
  return sorted;
}

inline double spectral_norm(const Matrix& a) {
  Vector lam = jacobi_eigenvalues(a);
  return std::max(std::abs(lam[0]), std::abs(lam[lam.size() - 1]));
}

// Inverse by Gauss-Jordan with partial pivoting on [A | I].
inline Matrix gauss_inverse(Matrix a) {
  const int n = static_cast<int>(a.rows());
  Matrix inv = Matrix::Identity(n, n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) throw std::runtime_error("oracle: singular matrix");
    if (piv != col) {
      a.row(piv).swap(a.row(col));
      inv.row(piv).swap(inv.row(col));
    }
    const double d = a(col, col);
    a.row(col) /= d;
    inv.row(col) /= d;
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f != 0.0) {
        a.row(r) -= f * a.row(col);
        inv.row(r) -= f * inv.row(col);
      }
    }
  }
  return inv;
}

// Central finite-difference gradient of a scalar function, step
// h_i = base_h * (1 + |w_i|).
inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          const Vector& w, double base_h = 1e-6) {
  Vector g(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double h = base_h * (1.0 + std::abs(w[i]));
    Vector wp = w, wm = w;
    wp[i] += h;
    wm[i] -= h;
    g[i] = (f(wp) - f(wm)) / (2.0 * h);
  }
  return g;
}

// Central finite-difference Jacobian of a vector function (used as the
// Hessian oracle applied to a gradient function).
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f,
                          const Vector& w, double base_h = 1e-6) {
  const Eigen::Index n = w.size();
  Matrix j(f(w).size(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = base_h * (1.0 + std::abs(w[i]));
    Vector wp = w, wm = w;
    wp[i] += h;
    wm[i] -= h;
    j.col(i) = (f(wp) - f(wm)) / (2.0 * h);
  }
  return j;
}

// Term-by-term evaluation of the kernel objective
// F(w) = c_loss * sum_i loss(y_i, (Kw)_i) + (c_reg/2) w^T K w
// with scalar loops only (no matrix products), as an independent sum oracle.
inline double naive_objective(const Matrix& k, const Vector& y,
                              const Vector& w, double c_loss, double c_reg,
                              const std::function<double(double, double)>& loss) {
  const Eigen::Index n = y.size();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double t = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) t += k(i, j) * w[j];
    total += c_loss * loss(y[i], t);
  }
  double quad = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) quad += w[i] * k(i, j) * w[j];
  return total + 0.5 * c_reg * quad;
}

// Naive Gaussian gram entry for the kernel exp(-sigma^2 ||x - x'||^2 / 2).
inline double naive_gauss_kernel(const Vector& a, const Vector& b,
                                 double sigma) {
  double d2 = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d2 += diff * diff;
  }
  return std::exp(-0.5 * sigma * sigma * d2);
}

}  // namespace oracles

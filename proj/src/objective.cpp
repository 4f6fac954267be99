#include "knewton/objective.hpp"

#include <cmath>
#include <utility>

namespace knewton {

namespace {

// sigmoid(z) = 1 / (1 + exp(-z)) without overflow on either tail
double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_w(const ProblemState& p, const Vector& w, const char* who) {
  if (w.size() != p.n())
    throw DimensionMismatch(std::string(who) + ": dim(w) != n");
  if (!w.allFinite())
    throw NonFiniteInput(std::string(who) + ": non-finite w");
}

}  // namespace

Scaling make_scaling(ScalingConvention convention, double lambda, Index n) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ArgumentOutOfRange("make_scaling: lambda must be finite and >= 0");
  Scaling s;
  if (convention == ScalingConvention::kTheory) {
    s.c_loss = 1.0;
    s.c_reg = lambda;
  } else {
    if (n <= 0) throw ArgumentOutOfRange("make_scaling: n must be positive");
    s.c_loss = 1.0 / static_cast<double>(n);
    s.c_reg = 2.0 * lambda;
  }
  return s;
}

LossModel logistic_loss() {
  LossModel m;
  m.name = "logistic";
  // value computed from s = -y t as s > 0 ? s + log1p(exp(-s)) : log1p(exp(s))
  m.value = [](double y, double t) {
    const double s = -y * t;
    return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
  };
  m.d1 = [](double y, double t) { return -y * sigmoid(-y * t); };
  m.d2 = [](double y, double t) { return sigmoid(y * t) * sigmoid(-y * t); };
  m.second_derivative_bound = 0.25;
  return m;
}

LossModel quadratic_loss() {
  LossModel m;
  m.name = "quadratic";
  m.value = [](double y, double t) { return 0.5 * (t - y) * (t - y); };
  m.d1 = [](double y, double t) { return t - y; };
  m.d2 = [](double, double) { return 1.0; };
  m.second_derivative_bound = 1.0;
  return m;
}

LossModel make_loss(const std::string& name) {
  if (name == "logistic") return logistic_loss();
  if (name == "quadratic") return quadratic_loss();
  throw ArgumentOutOfRange("make_loss: unknown loss '" + name + "'");
}

ProblemState make_problem(Matrix x, Vector y, const KernelSpec& kernel,
                          LossModel loss, double lambda,
                          ScalingConvention convention) {
  if (x.rows() != y.size())
    throw DimensionMismatch("make_problem: rows(x) != dim(y)");
  if (!y.allFinite())
    throw NonFiniteInput("make_problem: non-finite labels");
  ProblemState p;
  p.k = gram_matrix(x, kernel);
  p.x = std::move(x);
  p.y = std::move(y);
  p.kernel = kernel;
  p.loss = std::move(loss);
  p.lambda = lambda;
  p.scaling = make_scaling(convention, lambda, p.y.size());
  return p;
}

double objective_value(const ProblemState& p, const Vector& w) {
  check_w(p, w, "objective_value");
  return objective_value_at(p, w, p.k * w);
}

double objective_value_at(const ProblemState& p, const Vector& w,
                          const Vector& kw) {
  if (kw.size() != p.n())
    throw DimensionMismatch("objective_value_at: dim(kw) != n");
  double loss_sum = 0.0;
  for (Index i = 0; i < p.n(); ++i) loss_sum += p.loss.value(p.y[i], kw[i]);
  const double f = p.scaling.c_loss * loss_sum + 0.5 * p.scaling.c_reg * w.dot(kw);
  if (!std::isfinite(f))
    throw NonFiniteResult("objective_value: non-finite value");
  return f;
}

Vector objective_gradient(const ProblemState& p, const Vector& w) {
  check_w(p, w, "objective_gradient");
  return objective_gradient_at(p, w, p.k * w);
}

Vector objective_gradient_at(const ProblemState& p, const Vector& w,
                             const Vector& kw) {
  if (kw.size() != p.n())
    throw DimensionMismatch("objective_gradient_at: dim(kw) != n");
  Vector r(p.n());
  for (Index i = 0; i < p.n(); ++i) r[i] = p.loss.d1(p.y[i], kw[i]);
  Vector g = p.k * (p.scaling.c_loss * r + p.scaling.c_reg * w);
  if (!g.allFinite())
    throw NonFiniteResult("objective_gradient: non-finite gradient");
  return g;
}

Vector d_diagonal(const ProblemState& p, const Vector& kw) {
  if (kw.size() != p.n())
    throw DimensionMismatch("d_diagonal: dim(kw) != n");
  Vector d(p.n());
  for (Index i = 0; i < p.n(); ++i) d[i] = p.loss.d2(p.y[i], kw[i]);
  if (!d.allFinite())
    throw NonFiniteResult("d_diagonal: non-finite curvature");
  return d;
}

Matrix hessian_dense(const ProblemState& p, const Vector& w, Index dense_cap) {
  check_w(p, w, "hessian_dense");
  if (p.n() > dense_cap)
    throw ArgumentOutOfRange("hessian_dense: n exceeds dense cap");
  Vector d = d_diagonal(p, p.k * w);
  Matrix h = p.scaling.c_loss * (p.k * d.asDiagonal() * p.k) +
             p.scaling.c_reg * p.k;
  return 0.5 * (h + h.transpose());
}

LinearOperator hessian_operator(const ProblemState& p, const Vector& w,
                                double mu) {
  check_w(p, w, "hessian_operator");
  if (mu < 0.0) throw ArgumentOutOfRange("hessian_operator: mu must be >= 0");
  Vector d = d_diagonal(p, p.k * w);
  LinearOperator op;
  op.dim = p.n();
  op.apply = [&k = p.k, d = std::move(d), c_loss = p.scaling.c_loss,
              c_reg = p.scaling.c_reg, mu](const Vector& v) -> Vector {
    Vector kv = k * v;
    return c_loss * (k * d.cwiseProduct(kv).eval()) + c_reg * kv + mu * v;
  };
  return op;
}

RfnHessianOperator::RfnHessianOperator(Matrix z, const Vector& d,
                                       const Scaling& scaling, double mu)
    : z_(std::move(z)), mu_(mu) {
  if (z_.rows() != d.size())
    throw DimensionMismatch("rfn hessian: rows(Z) != dim(d)");
  if (mu <= 0.0)
    throw ArgumentOutOfRange("rfn hessian: mu must be positive");
  const Index m = z_.cols();
  // C = c_loss Z^T D Z + c_reg I, m x m
  Matrix zd = d.cwiseSqrt().asDiagonal() * z_;  // d >= 0 for convex losses
  if (!zd.allFinite())
    throw NonFiniteInput("rfn hessian: non-finite curvature weights");
  c_ = Matrix::Zero(m, m);
  c_.selfadjointView<Eigen::Lower>().rankUpdate(zd.transpose(),
                                                scaling.c_loss);
  c_ = c_.selfadjointView<Eigen::Lower>();
  c_.diagonal().array() += scaling.c_reg;
  solver_ = std::make_unique<WoodburySolver>(z_, c_, mu_);
}

Vector RfnHessianOperator::apply(const Vector& v) const {
  return apply_no_ridge(v) + mu_ * v;
}

Vector RfnHessianOperator::apply_no_ridge(const Vector& v) const {
  if (v.size() != z_.rows())
    throw DimensionMismatch("rfn hessian: dim(v) != n");
  return z_ * (c_ * (z_.transpose() * v).eval()).eval();
}

Vector RfnHessianOperator::inverse_apply(const Vector& v) const {
  if (v.size() != z_.rows())
    throw DimensionMismatch("rfn hessian: dim(v) != n");
  return solver_->solve(v);
}

SsnHessianOperator::SsnHessianOperator(const ProblemState& p, const Vector& w,
                                       const NystromFactors& factors,
                                       double mu, bool rescale)
    : mu_(mu) {
  check_w(p, w, "ssn hessian");
  if (factors.k_vi.rows() != p.n())
    throw DimensionMismatch("ssn hessian: factors built for a different n");
  if (factors.subset.size() != static_cast<std::size_t>(factors.k_vi.cols()) ||
      factors.k_ii_pinv.rows() != factors.k_vi.cols() ||
      factors.k_ii_pinv.cols() != factors.k_vi.cols())
    throw DimensionMismatch("ssn hessian: inconsistent factor shapes");
  if (mu < 0.0) throw ArgumentOutOfRange("ssn hessian: mu must be >= 0");
  const Index k = factors.k_vi.cols();
  for (Index idx : factors.subset)
    if (idx < 0 || idx >= p.n())
      throw IndexOutOfRange("ssn hessian: subset index out of range");
  k_vi_ = factors.k_vi;
  k_ii_pinv_ = factors.k_ii_pinv;
  Vector kw = p.k * w;
  d_ii_.resize(k);
  for (Index i = 0; i < k; ++i) {
    const Index idx = factors.subset[static_cast<std::size_t>(i)];
    d_ii_[i] = p.loss.d2(p.y[idx], kw[idx]);
  }
  const double s =
      rescale ? static_cast<double>(p.n()) / static_cast<double>(k) : 1.0;
  s_c_loss_ = s * p.scaling.c_loss;
  c_reg_ = p.scaling.c_reg;
}

Vector SsnHessianOperator::apply(const Vector& v) const {
  if (v.size() != k_vi_.rows())
    throw DimensionMismatch("ssn hessian: dim(v) != n");
  Vector kt_v = k_vi_.transpose() * v;  // k
  Vector loss_part = k_vi_ * d_ii_.cwiseProduct(kt_v).eval();
  Vector reg_part = k_vi_ * (k_ii_pinv_ * kt_v).eval();
  return s_c_loss_ * loss_part + c_reg_ * reg_part + mu_ * v;
}

LinearOperator SsnHessianOperator::as_operator() const {
  LinearOperator op;
  op.dim = dim();
  op.apply = [this](const Vector& v) { return apply(v); };
  return op;
}

}  // namespace knewton

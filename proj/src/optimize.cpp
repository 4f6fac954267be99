#include "knewton/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>
#include <utility>

#include "knewton/kernel.hpp"
#include "knewton/linalg.hpp"
#include "knewton/rng.hpp"

namespace knewton {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void validate_line_search(const LineSearchConfig& ls) {
  if (!(ls.sufficient_decrease > 0.0) || !(ls.sufficient_decrease < 1.0))
    throw ArgumentOutOfRange("line search: sufficient_decrease must be in (0,1)");
  if (!(ls.shrink > 0.0) || !(ls.shrink < 1.0))
    throw ArgumentOutOfRange("line search: shrink must be in (0,1)");
  if (ls.max_backtracks < 1)
    throw ArgumentOutOfRange("line search: max_backtracks must be >= 1");
}

void validate_config(const OptimizerConfig& cfg) {
  if (cfg.max_iterations < 1)
    throw ArgumentOutOfRange("optimizer: max_iterations must be >= 1");
  if (!(cfg.gradient_tolerance > 0.0))
    throw ArgumentOutOfRange("optimizer: gradient_tolerance must be positive");
  if (!(cfg.cg_tolerance > 0.0))
    throw ArgumentOutOfRange("optimizer: cg_tolerance must be positive");
  if (cfg.cg_max_iter < 0)
    throw ArgumentOutOfRange("optimizer: cg_max_iter must be >= 0");
  if (cfg.lbfgs_memory < 1)
    throw ArgumentOutOfRange("optimizer: lbfgs_memory must be >= 1");
  if (cfg.mu < 0.0) throw ArgumentOutOfRange("optimizer: mu must be >= 0");
  if (cfg.feature_schedule) {
    const FeatureSchedule& fs = *cfg.feature_schedule;
    if (!(fs.rho > 0.0) || !(fs.rho < 1.0))
      throw ArgumentOutOfRange("schedule: rho must be in (0,1)");
    if (fs.exponent != 1 && fs.exponent != 2)
      throw ArgumentOutOfRange("schedule: exponent must be 1 or 2");
    if (fs.m_max < 0)
      throw ArgumentOutOfRange("schedule: m_max must be >= 0");
  }
  validate_line_search(cfg.line_search);
}

// Shared per-run state: the iterate, the cached K w, the quadratic term
// w^T K w, and the carried objective value. The line search evaluates the
// objective along the ray w + alpha p from these caches in O(n) per
// candidate; the accepted value is carried forward so the trace's loss
// column reproduces exactly the comparisons the line search made.
struct Driver {
  const ProblemState& prob;
  const OptimizerConfig& cfg;
  Vector w, kw, g;
  double wkw = 0.0;
  double f = 0.0;
  double gnorm = 0.0;
  double prev_alpha = 0.0;
  double cum_time = 0.0;
  OptimizerTrace trace;

  Driver(const ProblemState& p, const OptimizerConfig& c, const Vector& w0)
      : prob(p), cfg(c) {
    if (w0.size() != p.n())
      throw DimensionMismatch("optimizer: dim(w0) != n");
    if (!w0.allFinite())
      throw NonFiniteEncountered("optimizer: non-finite w0");
    w = w0;
    kw = p.k * w;
    wkw = w.dot(kw);
    f = objective_value_at(p, w, kw);
    if (cfg.record_iterates) trace.iterates.push_back(w);
  }

  void refresh_gradient() {
    const Index n = prob.n();
    Vector r(n);
    for (Index i = 0; i < n; ++i) r[i] = prob.loss.d1(prob.y[i], kw[i]);
    g = prob.k * (prob.scaling.c_loss * r + prob.scaling.c_reg * w).eval();
    if (!g.allFinite())
      throw NonFiniteEncountered("optimizer: non-finite gradient");
    gnorm = g.norm();
  }

  bool converged() const { return gnorm <= cfg.gradient_tolerance; }

  // Line search along p_dir, state update, trace record. Returns the pushed
  // record so callers can attach method-specific extras.
  IterationRecord& step(Index t, const Vector& p_dir, Index m_count,
                        double dir_time, Clock::time_point ls_start,
                        const LineSearchConfig& ls) {
    const double dd = p_dir.dot(g);
    if (!(dd < 0.0))
      throw NotDescentDirection("optimizer: p^T g >= 0 at iteration " +
                                std::to_string(t));
    Vector kp = prob.k * p_dir;
    const double pkw = p_dir.dot(kw);
    const double pkp = p_dir.dot(kp);
    const double c_loss = prob.scaling.c_loss;
    const double c_reg = prob.scaling.c_reg;
    auto ray = [&](double a) -> double {
      double loss_sum = 0.0;
      for (Index i = 0; i < prob.n(); ++i)
        loss_sum += prob.loss.value(prob.y[i], kw[i] + a * kp[i]);
      return c_loss * loss_sum +
             0.5 * c_reg * (wkw + 2.0 * a * pkw + a * a * pkp);
    };
    LineSearchResult res;
    if (cfg.unit_step) {
      res.alpha = 1.0;
      res.backtracks = 0;
      res.f_new = ray(1.0);
      if (!std::isfinite(res.f_new))
        throw NonFiniteEncountered("optimizer: non-finite unit-step value");
    } else {
      const double a0 = initial_step(ls.init_policy, prev_alpha, dd);
      res = armijo_on_ray(ray, f, dd, ls, a0);
    }
    IterationRecord rec;
    rec.iter = t;
    rec.loss = f;
    rec.grad_norm = gnorm;
    rec.step = res.alpha;
    rec.backtracks = res.backtracks;
    rec.m_or_samples = m_count;
    rec.dir_dot_grad = dd;
    const double a = res.alpha;
    w += a * p_dir;
    kw += a * kp;
    wkw = wkw + 2.0 * a * pkw + a * a * pkp;
    f = res.f_new;
    prev_alpha = a;
    if (cfg.record_iterates) trace.iterates.push_back(w);
    rec.direction_time_s = dir_time;
    rec.linesearch_time_s = seconds_since(ls_start);
    cum_time += rec.direction_time_s + rec.linesearch_time_s;
    rec.cumulative_time_s = cum_time;
    trace.records.push_back(rec);
    return trace.records.back();
  }

  void finalize(Termination term) {
    trace.final_w = w;
    trace.final_loss = f;
    trace.final_grad_norm = gnorm;
    trace.termination = term;
  }
};

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "newton") return Method::kNewton;
  if (name == "rfn") return Method::kRfn;
  if (name == "ssncg") return Method::kSsncg;
  if (name == "lbfgs") return Method::kLbfgs;
  throw ArgumentOutOfRange("unknown method '" + name + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kNewton: return "newton";
    case Method::kRfn: return "rfn";
    case Method::kSsncg: return "ssncg";
    case Method::kLbfgs: return "lbfgs";
  }
  return "unknown";
}

InitPolicy parse_init_policy(const std::string& name) {
  if (name == "unit") return InitPolicy::kUnit;
  if (name == "double_previous") return InitPolicy::kDoublePrevious;
  if (name == "inverse_newton_decrement_sq")
    return InitPolicy::kInverseNewtonDecrementSq;
  throw ArgumentOutOfRange("unknown init policy '" + name + "'");
}

double initial_step(InitPolicy policy, double previous_alpha,
                    double dir_dot_grad) {
  switch (policy) {
    case InitPolicy::kUnit:
      return 1.0;
    case InitPolicy::kDoublePrevious:
      return previous_alpha > 0.0 ? 2.0 * previous_alpha : 1.0;
    case InitPolicy::kInverseNewtonDecrementSq: {
      if (!(dir_dot_grad < 0.0))
        throw NotDescentDirection("initial_step: p^T g >= 0");
      return std::clamp(1.0 / (-dir_dot_grad), 1e-8, 1e8);
    }
  }
  throw ArgumentOutOfRange("initial_step: bad policy");
}

LineSearchResult armijo_on_ray(const std::function<double(double)>& f_along,
                               double f0, double dir_dot_grad,
                               const LineSearchConfig& cfg,
                               double alpha_init) {
  validate_line_search(cfg);
  if (!(dir_dot_grad < 0.0))
    throw NotDescentDirection("armijo: p^T g >= 0");
  if (!(alpha_init > 0.0) || !std::isfinite(alpha_init))
    throw ArgumentOutOfRange("armijo: alpha_init must be positive and finite");
  double alpha = alpha_init;
  for (int k = 0; k <= cfg.max_backtracks; ++k) {
    const double fa = f_along(alpha);
    // non-finite trial values count as failures and shrink further
    if (std::isfinite(fa) &&
        fa <= f0 + alpha * cfg.sufficient_decrease * dir_dot_grad) {
      LineSearchResult res;
      res.alpha = alpha;
      res.backtracks = k;
      res.f_new = fa;
      return res;
    }
    alpha *= cfg.shrink;
  }
  throw MaxBacktracksExceeded(
      "armijo: no acceptable step within max_backtracks (broken Hessian "
      "approximation?)");
}

LineSearchResult armijo_backtracking(
    const std::function<double(const Vector&)>& f, const Vector& w,
    const Vector& p, const Vector& g, const LineSearchConfig& cfg,
    double alpha_init) {
  if (w.size() != p.size() || w.size() != g.size())
    throw DimensionMismatch("armijo: w/p/g dims differ");
  return armijo_on_ray(
      [&](double a) { return f((w + a * p).eval()); }, f(w), p.dot(g), cfg,
      alpha_init);
}

Index resolve_count(const OptimizerConfig& cfg, Index n, Index t) {
  Index m0 = cfg.m_abs;
  if (m0 <= 0) {
    if (!(cfg.m_ratio > 0.0))
      throw ArgumentOutOfRange("optimizer: neither m_abs nor m_ratio set");
    m0 = static_cast<Index>(
        std::ceil(cfg.m_ratio * static_cast<double>(n)));
  }
  if (m0 < 1) m0 = 1;
  if (!cfg.feature_schedule) return m0;
  const FeatureSchedule& fs = *cfg.feature_schedule;
  const Index cap = fs.m_max > 0 ? fs.m_max : n;
  const double grown =
      static_cast<double>(m0) *
      std::pow(fs.rho, -static_cast<double>(fs.exponent) *
                           static_cast<double>(t));
  if (!(grown < static_cast<double>(cap))) return cap;
  return std::max<Index>(1, static_cast<Index>(std::ceil(grown)));
}

OptimizerTrace newton_exact(const ProblemState& p, const Vector& w0,
                            const OptimizerConfig& cfg) {
  validate_config(cfg);
  if (p.n() > cfg.dense_cap)
    throw ArgumentOutOfRange("newton_exact: n exceeds dense cap");
  Driver d(p, cfg, w0);
  for (Index t = 0;; ++t) {
    const auto t0 = Clock::now();
    d.refresh_gradient();
    if (d.converged()) {
      d.finalize(Termination::kGradientTolerance);
      break;
    }
    if (t >= cfg.max_iterations) {
      d.finalize(Termination::kMaxIterations);
      break;
    }
    Vector dvec = d_diagonal(p, d.kw);
    Matrix h = p.scaling.c_loss * (p.k * dvec.asDiagonal() * p.k) +
               p.scaling.c_reg * p.k;
    h = 0.5 * (h + h.transpose());
    Vector rhs = -d.g;
    Vector pdir;
    bool ridge = false;
    try {
      pdir = cholesky_solve(h, rhs);
    } catch (const NotPositiveDefinite&) {
      h.diagonal().array() += 1e-12;
      pdir = cholesky_solve(h, rhs);
      ridge = true;
    }
    const double dir_time = seconds_since(t0);
    auto& rec = d.step(t, pdir, p.n(), dir_time, Clock::now(),
                       cfg.line_search);
    rec.ridge_retry = ridge;
  }
  return std::move(d.trace);
}

OptimizerTrace rfn(const ProblemState& p, const Vector& w0,
                   const OptimizerConfig& cfg) {
  validate_config(cfg);
  if (!(cfg.mu > 0.0))
    throw ArgumentOutOfRange("rfn: mu must be positive");
  Driver d(p, cfg, w0);
  for (Index t = 0;; ++t) {
    const auto t0 = Clock::now();
    d.refresh_gradient();
    if (d.converged()) {
      d.finalize(Termination::kGradientTolerance);
      break;
    }
    if (t >= cfg.max_iterations) {
      d.finalize(Termination::kMaxIterations);
      break;
    }
    const Index m_t = resolve_count(cfg, p.n(), t);
    // fresh feature draw every iteration, stream split by t
    Rng rng(Rng::substream_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    FeatureBundle bundle = sample_features(m_t, p.x.cols(), p.kernel, rng);
    Matrix z = feature_matrix(p.x, bundle);
    Vector dvec = d_diagonal(p, d.kw);
    RfnHessianOperator hop(std::move(z), dvec, p.scaling, cfg.mu);
    Vector pdir = -hop.inverse_apply(d.g);
    const double dir_time = seconds_since(t0);
    d.step(t, pdir, m_t, dir_time, Clock::now(), cfg.line_search);
  }
  return std::move(d.trace);
}

OptimizerTrace ssncg(const ProblemState& p, const Vector& w0,
                     const OptimizerConfig& cfg) {
  validate_config(cfg);
  if (!(cfg.mu > 0.0))
    throw ArgumentOutOfRange("ssncg: mu must be positive");
  Driver d(p, cfg, w0);
  const Index cg_cap =
      cfg.cg_max_iter > 0 ? cfg.cg_max_iter : 3 * p.n();
  for (Index t = 0;; ++t) {
    const auto t0 = Clock::now();
    d.refresh_gradient();
    if (d.converged()) {
      d.finalize(Termination::kGradientTolerance);
      break;
    }
    if (t >= cfg.max_iterations) {
      d.finalize(Termination::kMaxIterations);
      break;
    }
    const Index k_t = resolve_count(cfg, p.n(), t);
    if (k_t > p.n())
      throw ArgumentOutOfRange("ssncg: subset size exceeds n");
    Rng rng(Rng::substream_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    std::vector<Index> subset = sample_index_subset<Index>(p.n(), k_t, rng);
    NystromFactors factors = nystrom_factors(p.k, subset);
    SsnHessianOperator hop(p, d.w, factors, cfg.mu, cfg.ssn_rescale);
    Vector rhs = -d.g;
    CgReport cr =
        conjugate_gradient(hop.as_operator(), rhs, cfg.cg_tolerance, cg_cap);
    const double dir_time = seconds_since(t0);
    auto& rec =
        d.step(t, cr.solution, k_t, dir_time, Clock::now(), cfg.line_search);
    rec.cg_rel_residual = cr.relative_residual;
    rec.cg_iterations = cr.iterations;
    rec.cg_cap_hit = !cr.converged;  // surfaced as a warning, not a failure
  }
  return std::move(d.trace);
}

OptimizerTrace lbfgs(const ProblemState& p, const Vector& w0,
                     const OptimizerConfig& cfg) {
  validate_config(cfg);
  LineSearchConfig ls = cfg.line_search;
  ls.init_policy = InitPolicy::kUnit;  // warm starts stay off for L-BFGS
  Driver d(p, cfg, w0);
  std::deque<std::pair<Vector, Vector>> mem;  // (s, y), newest at back
  std::deque<double> rho_mem;
  bool have_pending = false;
  Vector pending_s, g_prev;
  for (Index t = 0;; ++t) {
    const auto t0 = Clock::now();
    d.refresh_gradient();
    if (have_pending) {
      Vector yv = d.g - g_prev;
      const double sy = pending_s.dot(yv);
      if (sy > 1e-12 * pending_s.norm() * yv.norm()) {
        mem.emplace_back(std::move(pending_s), std::move(yv));
        rho_mem.push_back(1.0 / sy);
        while (static_cast<Index>(mem.size()) > cfg.lbfgs_memory) {
          mem.pop_front();
          rho_mem.pop_front();
        }
      }
      have_pending = false;
    }
    if (d.converged()) {
      d.finalize(Termination::kGradientTolerance);
      break;
    }
    if (t >= cfg.max_iterations) {
      d.finalize(Termination::kMaxIterations);
      break;
    }
    // two-loop recursion
    Vector q = d.g;
    const std::size_t hist = mem.size();
    std::vector<double> a(hist);
    for (std::size_t i = hist; i-- > 0;) {
      a[i] = rho_mem[i] * mem[i].first.dot(q);
      q -= a[i] * mem[i].second;
    }
    if (hist > 0) {
      const Vector& s_last = mem.back().first;
      const Vector& y_last = mem.back().second;
      q *= s_last.dot(y_last) / y_last.squaredNorm();
    }
    for (std::size_t i = 0; i < hist; ++i) {
      const double b = rho_mem[i] * mem[i].second.dot(q);
      q += (a[i] - b) * mem[i].first;
    }
    Vector pdir = -q;
    const double dir_time = seconds_since(t0);
    g_prev = d.g;
    auto& rec = d.step(t, pdir, p.n(), dir_time, Clock::now(), ls);
    pending_s = rec.step * pdir;
    have_pending = true;
  }
  return std::move(d.trace);
}

OptimizerTrace run_optimizer(const ProblemState& p, const Vector& w0,
                             const OptimizerConfig& cfg) {
  switch (cfg.method) {
    case Method::kNewton: return newton_exact(p, w0, cfg);
    case Method::kRfn: return rfn(p, w0, cfg);
    case Method::kSsncg: return ssncg(p, w0, cfg);
    case Method::kLbfgs: return lbfgs(p, w0, cfg);
  }
  throw ArgumentOutOfRange("run_optimizer: bad method");
}

}  // namespace knewton

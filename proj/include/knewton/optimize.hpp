#pragma once

// The four optimizers (exact Newton, random-feature Newton, sub-sampled
// Newton with CG, L-BFGS) sharing one Armijo backtracking line search and
// one trace format.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "knewton/errors.hpp"
#include "knewton/objective.hpp"
#include "knewton/types.hpp"

namespace knewton {

enum class Method { kNewton, kRfn, kSsncg, kLbfgs };
enum class InitPolicy { kUnit, kDoublePrevious, kInverseNewtonDecrementSq };
enum class Termination { kGradientTolerance, kMaxIterations };

Method parse_method(const std::string& name);
std::string method_name(Method m);
InitPolicy parse_init_policy(const std::string& name);

struct LineSearchConfig {
  double sufficient_decrease = 0.3;  // beta in the Armijo inequality
  double shrink = 0.5;               // per-backtrack step multiplier
  InitPolicy init_policy = InitPolicy::kUnit;
  int max_backtracks = 60;
};

// Geometric feature growth m_t = ceil(m0 * rho^(-exponent * t)), capped.
struct FeatureSchedule {
  double rho = 0.5;   // in (0, 1)
  int exponent = 1;   // 1 or 2
  Index m_max = 0;    // 0 means "cap at n"
};

struct OptimizerConfig {
  Method method = Method::kNewton;
  Index max_iterations = 100;
  double gradient_tolerance = 1e-8;
  // feature / subset size: absolute wins when positive, otherwise the ratio
  // of n is used (RFN: m, SSNCG: |I|; ignored by Newton and L-BFGS)
  Index m_abs = 0;
  double m_ratio = 0.0;
  double mu = 1e-4;
  Index lbfgs_memory = 50;
  double cg_tolerance = 1e-6;
  Index cg_max_iter = 0;  // 0 means 3n
  std::optional<FeatureSchedule> feature_schedule;
  std::uint64_t seed = 0;
  LineSearchConfig line_search;
  bool unit_step = false;  // forces alpha = 1, the local-analysis mode
  bool record_iterates = false;
  bool ssn_rescale = true;  // scale the loss block by n/|I|
  Index dense_cap = 4096;   // guard for the exact-Newton dense assembly
};

// One record per executed step: the state at w_t plus the step taken from it.
struct IterationRecord {
  Index iter = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  int backtracks = 0;
  Index m_or_samples = 0;
  double direction_time_s = 0.0;
  double linesearch_time_s = 0.0;
  double cumulative_time_s = 0.0;
  // extras kept in memory for tests and diagnostics (not trace CSV columns)
  double dir_dot_grad = 0.0;
  double cg_rel_residual = -1.0;  // negative when no CG ran this step
  Index cg_iterations = 0;
  bool cg_cap_hit = false;
  bool ridge_retry = false;
};

struct OptimizerTrace {
  std::vector<IterationRecord> records;
  Vector final_w;
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
  Termination termination = Termination::kMaxIterations;
  // w_0 .. w_T inclusive when record_iterates was set, otherwise empty
  std::vector<Vector> iterates;
};

struct LineSearchResult {
  double alpha = 0.0;
  int backtracks = 0;
  double f_new = 0.0;  // objective at the accepted point
};

// Armijo backtracking on a pre-parameterized ray: f_along(alpha) must equal
// F(w + alpha p). f0 = F(w), dir_dot_grad = p^T grad F(w) < 0. Accepts the
// largest alpha_init * shrink^k with
//   f_along(alpha) <= f0 + alpha * sufficient_decrease * dir_dot_grad.
LineSearchResult armijo_on_ray(const std::function<double(double)>& f_along,
                               double f0, double dir_dot_grad,
                               const LineSearchConfig& cfg, double alpha_init);

// Convenience form evaluating F at w + alpha p directly.
LineSearchResult armijo_backtracking(const std::function<double(const Vector&)>& f,
                                     const Vector& w, const Vector& p,
                                     const Vector& g,
                                     const LineSearchConfig& cfg,
                                     double alpha_init);

// Warm-start step per policy: unit -> 1; double_previous -> 2 * previous
// (1 when previous <= 0, i.e. the first iteration);
// inverse_newton_decrement_sq -> 1 / (-p^T g) clamped to [1e-8, 1e8].
double initial_step(InitPolicy policy, double previous_alpha,
                    double dir_dot_grad);

OptimizerTrace newton_exact(const ProblemState& p, const Vector& w0,
                            const OptimizerConfig& cfg);
OptimizerTrace rfn(const ProblemState& p, const Vector& w0,
                   const OptimizerConfig& cfg);
OptimizerTrace ssncg(const ProblemState& p, const Vector& w0,
                     const OptimizerConfig& cfg);
OptimizerTrace lbfgs(const ProblemState& p, const Vector& w0,
                     const OptimizerConfig& cfg);

// Dispatch on cfg.method.
OptimizerTrace run_optimizer(const ProblemState& p, const Vector& w0,
                             const OptimizerConfig& cfg);

// Resolved feature / subset count for iteration t (handles ratio, schedule,
// caps). Exposed for tests.
Index resolve_count(const OptimizerConfig& cfg, Index n, Index t);

}  // namespace knewton

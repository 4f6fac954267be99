// Acceptance gate: one self-contained check per criterion, each printing a
// single PASS/FAIL line with its measured runtime. Runtime caps are quoted
// for an 8-vCPU machine; wall-clock enforcement lives in the ctest timeouts
// so a slower box degrades gracefully. Exit code is nonzero if any selected
// criterion fails.
//
//   acceptance [criterion-numbers...] [--jobs N] [--cli PATH]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>

#include "knewton/data.hpp"
#include "knewton/diagnostics.hpp"
#include "knewton/kernel.hpp"
#include "knewton/linalg.hpp"
#include "knewton/objective.hpp"
#include "knewton/optimize.hpp"
#include "knewton/parallel.hpp"
#include "knewton/rng.hpp"
#include "knewton/trace_io.hpp"
#include "oracles.hpp"

using knewton::Dataset;
using knewton::Index;
using knewton::KernelSpec;
using knewton::Matrix;
using knewton::Method;
using knewton::OptimizerConfig;
using knewton::OptimizerTrace;
using knewton::ProblemState;
using knewton::Rng;
using knewton::ScalingConvention;
using knewton::Vector;

namespace {

int g_jobs = 1;
std::string g_cli;

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

ProblemState synth_problem(Index n, Index d, double sep, double sigma,
                           const char* loss, double lambda,
                           ScalingConvention conv, std::uint64_t seed) {
  Dataset ds = knewton::synth_two_gaussians(n, d, sep, seed);
  return knewton::make_problem(std::move(ds.x), std::move(ds.y),
                               KernelSpec{sigma}, knewton::make_loss(loss),
                               lambda, conv);
}

Vector gaussian_vector(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vector w(n);
  for (Index i = 0; i < n; ++i) w[i] = rng.gaussian();
  return w;
}

double loss_at(const OptimizerTrace& tr, std::size_t t) {
  return t < tr.records.size() ? tr.records[t].loss : tr.final_loss;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Strict descent plus the exact Armijo recheck, reconstructed from trace
// fields with the same floating expression the optimizer evaluated.
std::string trace_violations(const OptimizerTrace& tr, double beta) {
  for (std::size_t t = 0; t < tr.records.size(); ++t) {
    const auto& r = tr.records[t];
    const double next =
        t + 1 < tr.records.size() ? tr.records[t + 1].loss : tr.final_loss;
    if (!(next < r.loss))
      return "descent violated at iter " + std::to_string(t);
    if (!(next <= r.loss + r.step * beta * r.dir_dot_grad))
      return "sufficient-decrease violated at iter " + std::to_string(t);
  }
  return "";
}

// --------------------------------------------------------------------------

Result criterion_1() {
  Result res;
  double worst_grad = 0.0, worst_hess = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    Rng rng(1000 + static_cast<std::uint64_t>(inst));
    const Index n = 10 + static_cast<Index>(rng.uniform53() * 41);
    const Index d = 2 + static_cast<Index>(rng.uniform53() * 4);
    const char* loss = inst % 2 ? "logistic" : "quadratic";
    const ScalingConvention conv = inst % 4 < 2
                                       ? ScalingConvention::kExperiment
                                       : ScalingConvention::kTheory;
    const double lambda = std::pow(10.0, -1.0 - 3.0 * rng.uniform53());
    ProblemState p =
        synth_problem(n, d, 1.0, 1.0, loss, lambda, conv,
                      2000 + static_cast<std::uint64_t>(inst));
    Vector w = 0.5 * gaussian_vector(n, 3000 + static_cast<std::uint64_t>(inst));

    Vector g = knewton::objective_gradient(p, w);
    Vector g_fd = oracles::fd_gradient(
        [&](const Vector& v) { return knewton::objective_value(p, v); }, w);
    const double grad_err = (g - g_fd).norm() / std::max(g_fd.norm(), 1e-300);
    worst_grad = std::max(worst_grad, grad_err);

    Matrix h = knewton::hessian_dense(p, w);
    Matrix h_fd = oracles::fd_jacobian(
        [&](const Vector& v) { return knewton::objective_gradient(p, v); },
        w);
    const double hess_err =
        (h - h_fd).norm() / std::max(h_fd.norm(), 1e-300);
    worst_hess = std::max(worst_hess, hess_err);
  }
  res.pass = worst_grad <= 1e-5 && worst_hess <= 1e-4;
  res.detail = "20 instances, max gradient error " + fmt(worst_grad) +
               " (<= 1e-5), max Hessian error " + fmt(worst_hess) +
               " (<= 1e-4)";
  return res;
}

Result criterion_2() {
  Result res;
  const double mus[3] = {1e-8, 1e-4, 1.0};
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    Rng rng(4000 + static_cast<std::uint64_t>(inst));
    const Index n = 5 + static_cast<Index>(rng.uniform53() * 96);
    const Index m = 1 + static_cast<Index>(rng.uniform53() * 20);
    const double mu = mus[inst % 3];
    Matrix z(n, m);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j) z(i, j) = rng.gaussian();
    Matrix b(m, m);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) b(i, j) = rng.gaussian();
    Matrix c = b * b.transpose() / static_cast<double>(m) +
               0.1 * Matrix::Identity(m, m);
    Vector v = gaussian_vector(n, 5000 + static_cast<std::uint64_t>(inst));

    Vector x = knewton::woodbury_inverse_apply(z, c, mu, v);

    Matrix h = z * c * z.transpose();
    h.diagonal().array() += mu;
    Matrix hinv = oracles::gauss_inverse(h);
    Vector x_dense = hinv * v;
    for (int refine = 0; refine < 2; ++refine)
      x_dense += hinv * (v - h * x_dense);

    const double err = (x - x_dense).norm() / std::max(x_dense.norm(), 1e-300);
    worst = std::max(worst, err);
  }
  res.pass = worst <= 1e-8;
  res.detail = "50 instances across mu {1e-8, 1e-4, 1}, max relative error " +
               fmt(worst) + " (<= 1e-8)";
  return res;
}

Result criterion_3() {
  Result res;
  ProblemState p = synth_problem(300, 3, 1.0, 1.0, "logistic", 1e-3,
                                 ScalingConvention::kExperiment, 6001);
  Vector w = 0.1 * gaussian_vector(300, 6002);
  const std::vector<Index> grid = {32, 128, 512, 2048};
  std::vector<double> med(grid.size());
  std::vector<std::function<void()>> work;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    work.push_back([&, g] {
      auto rep = knewton::spectral_error_trials(p, w, grid[g], 20, 6100);
      med[g] = median_of(rep.errors);
    });
  }
  knewton::run_jobs(work, g_jobs);

  int inversions = 0;
  bool big_inversion = false;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (med[g] > med[g - 1]) {
      ++inversions;
      if (med[g] > 1.05 * med[g - 1]) big_inversion = true;
    }
  }
  const bool quarter = med.back() <= 0.25 * med.front();
  res.pass = quarter && inversions <= 1 && !big_inversion;
  res.detail = "medians over 20 trials at m {32,128,512,2048}: " +
               fmt(med[0]) + ", " + fmt(med[1]) + ", " + fmt(med[2]) + ", " +
               fmt(med[3]) + "; m=2048 / m=32 ratio " +
               fmt(med.back() / med.front()) + " (<= 0.25), inversions " +
               std::to_string(inversions) + " (<= 1, each <= 5%)";
  return res;
}

Result criterion_4() {
  Result res;
  ProblemState p = synth_problem(200, 3, 1.0, 0.05, "logistic", 1e-3,
                                 ScalingConvention::kExperiment, 7001);
  const double gamma = 1e-2, epsilon = 0.5, delta = 0.1;
  const double s_gamma = knewton::effective_dimension(p.k, gamma);
  const Index m =
      knewton::rff_count_bound(p.n(), gamma, epsilon, delta, s_gamma);
  const Index trials = 50;
  std::vector<char> pass(static_cast<std::size_t>(trials), 0);
  std::vector<std::function<void()>> work;
  for (Index trial = 0; trial < trials; ++trial) {
    work.push_back([&, trial] {
      Rng rng(Rng::substream_seed(7100, static_cast<std::uint64_t>(trial)));
      Matrix g = knewton::feature_gram(p.x, m, p.kernel, rng);
      pass[static_cast<std::size_t>(trial)] =
          knewton::epsilon_spectral_check_gram(p.k, g, gamma, epsilon) ? 1
                                                                       : 0;
    });
  }
  knewton::run_jobs(work, g_jobs);
  Index successes = 0;
  for (char c : pass) successes += c;
  const double rate =
      static_cast<double>(successes) / static_cast<double>(trials);
  auto wi = knewton::wilson_interval(successes, trials);
  res.pass = rate >= 0.90;
  res.detail = "S_gamma " + fmt(s_gamma) + ", m " + std::to_string(m) +
               ", containment pass rate " + fmt(rate) +
               " (>= 0.9), Wilson 95% [" + fmt(wi.lo) + ", " + fmt(wi.hi) +
               "]";
  return res;
}

struct Crit5Runs {
  std::vector<OptimizerTrace> newton, rfn, ssncg, lbfgs;
  ProblemState p;
};

OptimizerConfig crit5_config(Method m) {
  OptimizerConfig oc;
  oc.method = m;
  oc.max_iterations = m == Method::kLbfgs ? 200 : 50;
  oc.gradient_tolerance = 1e-8;
  oc.m_ratio = 0.1;
  oc.mu = 1e-4;
  oc.cg_tolerance = 1e-6;
  return oc;
}

Crit5Runs run_crit5_fleet(bool ssncg_only = false) {
  Crit5Runs out;
  out.p = synth_problem(1000, 3, 2.0, 1.0, "logistic", 1e-5,
                        ScalingConvention::kExperiment, 5001);
  const std::vector<Method> methods =
      ssncg_only ? std::vector<Method>{Method::kSsncg}
                 : std::vector<Method>{Method::kNewton, Method::kRfn,
                                       Method::kSsncg, Method::kLbfgs};
  std::vector<std::function<void()>> work;
  for (Method m : methods) {
    auto& bucket = m == Method::kNewton  ? out.newton
                   : m == Method::kRfn   ? out.rfn
                   : m == Method::kSsncg ? out.ssncg
                                         : out.lbfgs;
    bucket.resize(10);
    for (std::uint64_t s = 0; s < 10; ++s) {
      work.push_back([&bucket, &out, m, s] {
        OptimizerConfig oc = crit5_config(m);
        oc.seed = s;
        Vector w0 = gaussian_vector(
            out.p.n(), Rng::substream_seed(5200, s));
        bucket[s] = knewton::run_optimizer(out.p, w0, oc);
      });
    }
  }
  knewton::run_jobs(work, g_jobs);
  return out;
}

Result criterion_5() {
  Result res;
  Crit5Runs runs = run_crit5_fleet();
  const double beta = OptimizerConfig{}.line_search.sufficient_decrease;
  std::string violation;
  auto scan = [&](const std::vector<OptimizerTrace>& traces,
                  const char* name) {
    for (std::size_t s = 0; s < traces.size() && violation.empty(); ++s) {
      std::string v = trace_violations(traces[s], beta);
      if (!v.empty())
        violation = std::string(name) + " seed " + std::to_string(s) + ": " + v;
    }
  };
  scan(runs.newton, "newton");
  scan(runs.rfn, "rfn");
  scan(runs.ssncg, "ssncg");
  scan(runs.lbfgs, "lbfgs");

  int rfn_converged = 0;
  for (const auto& tr : runs.rfn)
    if (tr.final_grad_norm <= 1e-8 && tr.records.size() <= 50)
      ++rfn_converged;

  res.pass = violation.empty() && rfn_converged >= 9;
  res.detail = violation.empty()
                   ? "40 runs (4 methods x 10 starts): descent strict and "
                     "sufficient decrease exact at every iteration; RFN "
                     "reached 1e-8 in " +
                         std::to_string(rfn_converged) + "/10 runs (>= 9)"
                   : violation;
  return res;
}

struct LocalSetup {
  ProblemState p;
  Vector w_star;
};

LocalSetup local_setup() {
  LocalSetup out;
  out.p = synth_problem(600, 3, 2.0, 1.0, "logistic", 0.05,
                        ScalingConvention::kTheory, 6601);
  OptimizerConfig oc;
  oc.gradient_tolerance = 1e-12;
  oc.max_iterations = 100;
  OptimizerTrace tr = knewton::newton_exact(out.p, Vector::Zero(600), oc);
  if (tr.final_grad_norm > 1e-12)
    throw knewton::Error("local setup: Newton oracle failed to reach 1e-12");
  out.w_star = tr.final_w;
  return out;
}

Result criterion_6() {
  Result res;
  LocalSetup setup = local_setup();
  std::vector<std::vector<double>> all_ratios(10);
  std::vector<std::function<void()>> work;
  for (std::uint64_t s = 0; s < 10; ++s) {
    work.push_back([&, s] {
      Vector u = gaussian_vector(600, Rng::substream_seed(6700, s));
      Vector w0 = setup.w_star + 1e-3 * u.normalized();
      OptimizerConfig oc;
      oc.method = Method::kRfn;
      oc.m_abs = 300;  // m/n = 0.5
      oc.mu = 0.06;
      oc.unit_step = true;
      oc.max_iterations = 40;
      oc.gradient_tolerance = 1e-300;
      oc.record_iterates = true;
      oc.seed = s;
      OptimizerTrace tr = knewton::rfn(setup.p, w0, oc);
      all_ratios[s] = knewton::convergence_ratios(tr, setup.w_star);
    });
  }
  knewton::run_jobs(work, g_jobs);
  int good = 0;
  double worst = 0.0;
  for (const auto& ratios : all_ratios) {
    bool ok = !ratios.empty();
    for (double r : ratios) {
      ok = ok && r <= 0.9;
      worst = std::max(worst, r);
    }
    if (ok) ++good;
  }
  res.pass = good >= 8;
  res.detail = "unit-step RFN (m/n = 0.5) from w* + 1e-3 u: all ratios <= "
               "0.9 in " +
               std::to_string(good) + "/10 seeds (>= 8); largest ratio seen " +
               fmt(worst);
  return res;
}

Result criterion_7() {
  Result res;
  LocalSetup setup = local_setup();
  std::vector<std::vector<double>> all_ratios(10);
  std::vector<std::function<void()>> work;
  for (std::uint64_t s = 0; s < 10; ++s) {
    work.push_back([&, s] {
      Vector u = gaussian_vector(600, Rng::substream_seed(6800, s));
      Vector w0 = setup.w_star + 1e-3 * u.normalized();
      OptimizerConfig oc;
      oc.method = Method::kRfn;
      oc.m_abs = 60;  // m0 = n/10, doubling up to n
      oc.feature_schedule = knewton::FeatureSchedule{0.5, 1, 600};
      oc.mu = 0.06;
      oc.unit_step = true;
      oc.max_iterations = 5;
      oc.gradient_tolerance = 1e-300;
      oc.record_iterates = true;
      oc.seed = s;
      OptimizerTrace tr = knewton::rfn(setup.p, w0, oc);
      all_ratios[s] = knewton::convergence_ratios(tr, setup.w_star);
    });
  }
  knewton::run_jobs(work, g_jobs);
  int good = 0;
  for (const auto& ratios : all_ratios) {
    bool ok = ratios.size() >= 2;
    for (std::size_t t = 1; t < ratios.size(); ++t)
      ok = ok && ratios[t] <= ratios[t - 1] + 0.02;
    if (ok) ++good;
  }
  res.pass = good >= 8;
  res.detail = "doubling feature schedule 60 -> 600: ratio sequence "
               "non-increasing (+0.02 slack) in " +
               std::to_string(good) + "/10 seeds (>= 8)";
  return res;
}

Result criterion_8() {
  Result res;
  ProblemState p = synth_problem(1000, 3, 2.0, 1.0, "logistic", 1e-5,
                                 ScalingConvention::kExperiment, 8001);
  const std::vector<double> grid = {1.0, 1e-4, 1e-8, 1e-12, 1e-16};
  std::vector<std::vector<double>> losses(grid.size(),
                                          std::vector<double>(10, 0.0));
  std::vector<std::function<void()>> work;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::uint64_t run = 0; run < 10; ++run) {
      work.push_back([&, g, run] {
        OptimizerConfig oc;
        oc.method = Method::kRfn;
        oc.m_ratio = 0.1;
        oc.mu = grid[g];
        oc.max_iterations = 15;
        oc.gradient_tolerance = 1e-300;
        oc.seed = run;
        Vector w0 = gaussian_vector(1000, Rng::substream_seed(8100, run));
        OptimizerTrace tr = knewton::rfn(p, w0, oc);
        losses[g][run] = loss_at(tr, 15);
      });
    }
  }
  knewton::run_jobs(work, g_jobs);
  std::vector<double> means(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (double l : losses[g]) means[g] += l / 10.0;
  res.pass = means[1] < means[0] && means[1] < means[4];
  res.detail = "mean loss after 15 RFN iterations: mu=1 -> " + fmt(means[0]) +
               ", mu=1e-4 -> " + fmt(means[1]) + ", mu=1e-8 -> " +
               fmt(means[2]) + ", mu=1e-12 -> " + fmt(means[3]) +
               ", mu=1e-16 -> " + fmt(means[4]) +
               "; 1e-4 strictly below both ends";
  return res;
}

Result criterion_9() {
  Result res;
  ProblemState p = synth_problem(1500, 8, 2.0, 0.95, "logistic", 1e-5,
                                 ScalingConvention::kExperiment, 9001);
  OptimizerConfig noracle;
  noracle.gradient_tolerance = 1e-10;
  noracle.max_iterations = 60;
  OptimizerTrace nt = knewton::newton_exact(p, Vector::Zero(1500), noracle);
  const double f_star = nt.final_loss;

  const std::vector<double> ratios = {0.1, 0.4, 0.7};
  std::vector<double> med_iters(ratios.size());
  std::vector<double> med_dir_time(ratios.size());
  for (std::size_t g = 0; g < ratios.size(); ++g) {
    std::vector<double> iters_needed;
    std::vector<double> dir_times;
    for (std::uint64_t run = 0; run < 5; ++run) {
      OptimizerConfig oc;
      oc.method = Method::kRfn;
      oc.m_ratio = ratios[g];
      oc.mu = 1e-6;
      oc.max_iterations = 30;
      oc.gradient_tolerance = 1e-300;
      oc.seed = run;
      Vector w0 = gaussian_vector(1500, Rng::substream_seed(9100, run));
      OptimizerTrace tr = knewton::rfn(p, w0, oc);  // sequential: timings
      double needed = 31.0;  // budget + 1 when never reached
      for (std::size_t t = 0; t <= tr.records.size(); ++t) {
        if (loss_at(tr, t) <= f_star + 1e-6) {
          needed = static_cast<double>(t);
          break;
        }
      }
      iters_needed.push_back(needed);
      for (const auto& r : tr.records) dir_times.push_back(r.direction_time_s);
    }
    med_iters[g] = median_of(iters_needed);
    med_dir_time[g] = median_of(dir_times);
  }
  const bool iters_ok =
      med_iters[1] <= med_iters[0] && med_iters[2] <= med_iters[1];
  const bool time_ok =
      med_dir_time[0] < med_dir_time[1] && med_dir_time[1] < med_dir_time[2];
  res.pass = iters_ok && time_ok;
  res.detail = "median iters to F-F* <= 1e-6 at ratios {0.1,0.4,0.7}: " +
               fmt(med_iters[0]) + ", " + fmt(med_iters[1]) + ", " +
               fmt(med_iters[2]) + " (non-increasing); median direction "
               "seconds: " +
               fmt(med_dir_time[0]) + ", " + fmt(med_dir_time[1]) + ", " +
               fmt(med_dir_time[2]) + " (strictly increasing)";
  return res;
}

Result criterion_10() {
  Result res;
  ProblemState p = synth_problem(3000, 3, 2.0, 1.0, "logistic", 1e-5,
                                 ScalingConvention::kExperiment, 10001);
  std::vector<OptimizerTrace> newton_runs(5), rfn_runs(5);
  for (std::uint64_t run = 0; run < 5; ++run) {  // sequential: timings
    Vector w0 = gaussian_vector(3000, Rng::substream_seed(10100, run));
    OptimizerConfig nc;
    nc.gradient_tolerance = 1e-8;
    nc.max_iterations = 30;
    newton_runs[run] = knewton::newton_exact(p, w0, nc);
    OptimizerConfig rc;
    rc.method = Method::kRfn;
    rc.m_ratio = 0.1;
    rc.mu = 1e-4;
    rc.max_iterations = 50;
    rc.gradient_tolerance = 1e-8;
    rc.seed = run;
    rfn_runs[run] = knewton::rfn(p, w0, rc);
  }
  double f_star = newton_runs[0].final_loss;
  for (const auto& tr : newton_runs) f_star = std::min(f_star, tr.final_loss);

  auto wall_to_threshold = [&](const OptimizerTrace& tr) {
    for (std::size_t t = 0; t <= tr.records.size(); ++t) {
      if (loss_at(tr, t) <= f_star + 1e-4) {
        if (t == 0) return 0.0;
        return tr.records[t - 1].cumulative_time_s;
      }
    }
    return std::numeric_limits<double>::infinity();
  };
  std::vector<double> newton_walls, rfn_walls, newton_dirs, rfn_dirs;
  for (const auto& tr : newton_runs) {
    newton_walls.push_back(wall_to_threshold(tr));
    for (const auto& r : tr.records) newton_dirs.push_back(r.direction_time_s);
  }
  for (const auto& tr : rfn_runs) {
    rfn_walls.push_back(wall_to_threshold(tr));
    for (const auto& r : tr.records) rfn_dirs.push_back(r.direction_time_s);
  }
  const double newton_wall = median_of(newton_walls);
  const double rfn_wall = median_of(rfn_walls);
  const double newton_dir = median_of(newton_dirs);
  const double rfn_dir = median_of(rfn_dirs);
  res.pass = std::isfinite(rfn_wall) && rfn_wall < newton_wall &&
             rfn_dir <= 0.5 * newton_dir;
  res.detail = "n = 3000, medians over 5 runs: wall to F-F* <= 1e-4, RFN " +
               fmt(rfn_wall) + " s vs Newton " + fmt(newton_wall) +
               " s (RFN strictly faster); per-iteration direction time, "
               "RFN " +
               fmt(rfn_dir) + " s vs Newton " + fmt(newton_dir) +
               " s (ratio " + fmt(rfn_dir / newton_dir) + " <= 0.5)";
  return res;
}

Result criterion_11() {
  Result res;
  Crit5Runs runs = run_crit5_fleet(true);
  Index checked = 0, violations = 0;
  double worst = 0.0;
  for (const auto& tr : runs.ssncg) {
    for (const auto& r : tr.records) {
      ++checked;
      worst = std::max(worst, r.cg_rel_residual);
      if (!(r.cg_rel_residual >= 0.0) || r.cg_rel_residual > 1e-6 ||
          r.cg_cap_hit)
        ++violations;
    }
  }
  res.pass = checked > 0 && violations == 0;
  res.detail = std::to_string(checked) +
               " SSNCG iterations across 10 runs, CG relative residual "
               "violations " +
               std::to_string(violations) + " (== 0), worst residual " +
               fmt(worst) + " (<= 1e-6)";
  return res;
}

Result criterion_12() {
  Result res;
  if (g_cli.empty()) {
    res.detail = "no --cli path given";
    return res;
  }
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "knewton_acceptance_12";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "cfg.json";
  {
    std::ofstream out(cfg);
    out << R"({
  "dataset": {"source": "synthetic", "n": 1000, "d": 3, "separation": 2.0, "seed": 5001},
  "kernel": {"sigma": 1.0},
  "lambda": 1e-5,
  "loss": "logistic",
  "scaling": "experiment",
  "w0": "gaussian",
  "seed_base": 0,
  "methods": [
    {"method": "newton", "max_iterations": 50, "gradient_tolerance": 1e-8},
    {"method": "rfn", "m_ratio": 0.1, "mu": 1e-4, "max_iterations": 50,
     "gradient_tolerance": 1e-8},
    {"method": "ssncg", "m_ratio": 0.1, "mu": 1e-4, "cg_tolerance": 1e-6,
     "max_iterations": 50, "gradient_tolerance": 1e-8},
    {"method": "lbfgs", "max_iterations": 200, "gradient_tolerance": 1e-8}
  ]
})";
  }
  auto run_once = [&](const std::string& out_dir) {
    const std::string cmd = "KERNEL_NEWTON_DETERMINISTIC=1 '" + g_cli +
                            "' train --config '" + cfg.string() +
                            "' --out '" + out_dir + "' > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) && WEXITSTATUS(rc) == 0;
  };
  if (!run_once((dir / "out1").string()) ||
      !run_once((dir / "out2").string())) {
    res.detail = "CLI train run failed";
    fs::remove_all(dir);
    return res;
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  bool identical = true;
  std::string mismatch;
  for (const char* m : {"newton", "rfn", "ssncg", "lbfgs"}) {
    const std::string name = std::string("train_") + m + ".csv";
    const std::string a = slurp(dir / "out1" / name);
    const std::string b = slurp(dir / "out2" / name);
    if (a.empty() || a != b) {
      identical = false;
      mismatch = name;
    }
  }
  fs::remove_all(dir);
  res.pass = identical;
  res.detail = identical ? "two deterministic CLI train runs over 4 methods: "
                           "all trace files byte-identical"
                         : "mismatch in " + mismatch;
  return res;
}

struct CriterionSpec {
  int number;
  const char* cap;  // quoted for 8 vCPUs
  std::function<Result()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  g_jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (g_jobs < 1) g_jobs = 1;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--jobs" && i + 1 < argc) {
      g_jobs = std::atoi(argv[++i]);
    } else if (arg == "--cli" && i + 1 < argc) {
      g_cli = argv[++i];
    } else {
      const int num = std::atoi(arg.c_str());
      if (num < 1 || num > 12) {
        std::cerr << "unknown argument '" << arg << "'\n";
        return 2;
      }
      selected.push_back(num);
    }
  }
  if (selected.empty())
    for (int c = 1; c <= 12; ++c) selected.push_back(c);

  const std::vector<CriterionSpec> specs = {
      {1, "30 s", criterion_1},    {2, "10 s", criterion_2},
      {3, "2 min", criterion_3},   {4, "3 min", criterion_4},
      {5, "5 min", criterion_5},   {6, "3 min", criterion_6},
      {7, "5 min", criterion_7},   {8, "10 min", criterion_8},
      {9, "15 min", criterion_9},  {10, "20 min", criterion_10},
      {11, "criterion-5 budget", criterion_11},
      {12, "criterion-5 budget", criterion_12},
  };

  bool all_pass = true;
  for (int num : selected) {
    const auto& spec = specs[static_cast<std::size_t>(num - 1)];
    Result res;
    const auto start = std::chrono::steady_clock::now();
    try {
      res = spec.run();
    } catch (const std::exception& e) {
      res.pass = false;
      res.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::cout << (res.pass ? "PASS" : "FAIL") << " criterion " << num << ": "
              << res.detail << " [" << fmt(elapsed) << " s elapsed; cap "
              << spec.cap << " quoted on 8 vCPUs]" << std::endl;
    all_pass = all_pass && res.pass;
  }
  return all_pass ? 0 : 1;
}

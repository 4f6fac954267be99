// kernel-newton: train single models, benchmark methods across seeded
// repeats, and run the diagnostic sweeps, all driven by one JSON config.
//
//   kernel-newton train|bench|diag --config <file-or-preset>
//                 [--set key=value]... [--jobs N] [--out DIR]
//
// KERNEL_NEWTON_DETERMINISTIC=1 forces sequential execution and zeroes the
// timing columns so output files are byte-comparable across runs.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "knewton/data.hpp"
#include "knewton/diagnostics.hpp"
#include "knewton/kernel.hpp"
#include "knewton/objective.hpp"
#include "knewton/optimize.hpp"
#include "knewton/parallel.hpp"
#include "knewton/rng.hpp"
#include "knewton/trace_io.hpp"

using json = nlohmann::json;
using knewton::ConfigError;
using knewton::Index;
using knewton::OptimizerConfig;
using knewton::OptimizerTrace;
using knewton::ProblemState;
using knewton::Rng;
using knewton::Vector;

namespace {

// RNG substream reserved for drawing w0; optimizer iterations use the small
// indices of the same base seed.
constexpr std::uint64_t kW0Stream = 0x5730303030303030ull;

struct DatasetConfig {
  std::string source = "synthetic";  // synthetic | libsvm | csv
  std::string path;
  Index label_column = 0;
  bool has_header = false;
  Index n = 200;
  Index d = 3;
  double separation = 2.0;
  std::uint64_t seed = 1;
  bool standardize = false;
  Index subsample = 0;  // 0 keeps everything
  std::uint64_t subsample_seed = 0;
};

struct Theorem1Config {
  double gamma = 1e-2;
  double epsilon = 0.5;
  double delta = 0.1;
  Index trials = 50;
};

struct DiagConfig {
  std::vector<double> mu_grid = {1.0, 1e-4, 1e-8, 1e-12, 1e-16};
  int mu_runs = 10;
  Index mu_iterations = 15;
  double mu_ratio = 0.1;
  std::vector<double> ratio_grid = {0.1, 0.4, 0.7};
  int ratio_runs = 10;
  Index ratio_iterations = 20;
  double ratio_mu = 1e-6;
  std::vector<Index> spectral_m_grid = {32, 128, 512, 2048};
  Index spectral_trials = 20;
  Theorem1Config theorem1;
};

struct MethodConfig {
  std::string name;
  OptimizerConfig opt;
};

struct RunConfig {
  DatasetConfig dataset;
  double sigma = 1.0;
  double lambda = 1e-5;
  std::string loss = "logistic";
  std::string scaling = "experiment";
  std::string w0 = "zeros";  // zeros | gaussian
  int repeats = 1;
  std::uint64_t seed_base = 0;
  bool record_iterates = false;
  std::vector<MethodConfig> methods;
  DiagConfig diag;
};

// ---------------------------------------------------------------------------
// JSON helpers: typed getters with path-qualified errors, and strict
// unknown-key rejection so typos never silently fall back to defaults.

void require_keys(const json& j, const std::vector<std::string>& allowed,
                  const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

Index get_index(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<Index>();
}

bool get_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) throw ConfigError(where + ": expected a boolean");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

std::vector<double> get_number_array(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ConfigError(where + ": expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(get_number(v, where));
  return out;
}

std::vector<Index> get_index_array(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ConfigError(where + ": expected a non-empty array of integers");
  std::vector<Index> out;
  for (const auto& v : j) out.push_back(get_index(v, where));
  return out;
}

DatasetConfig parse_dataset(const json& j) {
  require_keys(j,
               {"source", "path", "label_column", "has_header", "n", "d",
                "separation", "seed", "standardize", "subsample",
                "subsample_seed"},
               "dataset");
  DatasetConfig out;
  if (j.contains("source")) out.source = get_string(j["source"], "dataset.source");
  if (out.source != "synthetic" && out.source != "libsvm" &&
      out.source != "csv")
    throw ConfigError("dataset.source: expected synthetic | libsvm | csv");
  if (j.contains("path")) out.path = get_string(j["path"], "dataset.path");
  if (j.contains("label_column"))
    out.label_column = get_index(j["label_column"], "dataset.label_column");
  if (j.contains("has_header"))
    out.has_header = get_bool(j["has_header"], "dataset.has_header");
  if (j.contains("n")) out.n = get_index(j["n"], "dataset.n");
  if (j.contains("d")) out.d = get_index(j["d"], "dataset.d");
  if (j.contains("separation"))
    out.separation = get_number(j["separation"], "dataset.separation");
  if (j.contains("seed"))
    out.seed = static_cast<std::uint64_t>(get_index(j["seed"], "dataset.seed"));
  if (j.contains("standardize"))
    out.standardize = get_bool(j["standardize"], "dataset.standardize");
  if (j.contains("subsample"))
    out.subsample = get_index(j["subsample"], "dataset.subsample");
  if (j.contains("subsample_seed"))
    out.subsample_seed = static_cast<std::uint64_t>(
        get_index(j["subsample_seed"], "dataset.subsample_seed"));
  if (out.source != "synthetic" && out.path.empty())
    throw ConfigError("dataset.path: required for source '" + out.source + "'");
  return out;
}

knewton::LineSearchConfig parse_line_search(const json& j,
                                            const std::string& where) {
  require_keys(
      j, {"sufficient_decrease", "shrink", "init_policy", "max_backtracks"},
      where);
  knewton::LineSearchConfig out;
  if (j.contains("sufficient_decrease"))
    out.sufficient_decrease =
        get_number(j["sufficient_decrease"], where + ".sufficient_decrease");
  if (j.contains("shrink"))
    out.shrink = get_number(j["shrink"], where + ".shrink");
  if (j.contains("init_policy"))
    out.init_policy = knewton::parse_init_policy(
        get_string(j["init_policy"], where + ".init_policy"));
  if (j.contains("max_backtracks"))
    out.max_backtracks =
        static_cast<int>(get_index(j["max_backtracks"], where + ".max_backtracks"));
  return out;
}

MethodConfig parse_method_entry(const json& j, std::size_t pos) {
  const std::string where = "methods." + std::to_string(pos);
  require_keys(j,
               {"method", "max_iterations", "gradient_tolerance", "m_abs",
                "m_ratio", "mu", "lbfgs_memory", "cg_tolerance", "cg_max_iter",
                "feature_schedule", "unit_step", "ssn_rescale", "dense_cap",
                "line_search"},
               where);
  if (!j.contains("method"))
    throw ConfigError(where + ": missing 'method'");
  MethodConfig out;
  out.name = get_string(j["method"], where + ".method");
  out.opt.method = knewton::parse_method(out.name);
  if (j.contains("max_iterations"))
    out.opt.max_iterations =
        get_index(j["max_iterations"], where + ".max_iterations");
  if (j.contains("gradient_tolerance"))
    out.opt.gradient_tolerance =
        get_number(j["gradient_tolerance"], where + ".gradient_tolerance");
  if (j.contains("m_abs")) out.opt.m_abs = get_index(j["m_abs"], where + ".m_abs");
  if (j.contains("m_ratio"))
    out.opt.m_ratio = get_number(j["m_ratio"], where + ".m_ratio");
  if (j.contains("mu")) out.opt.mu = get_number(j["mu"], where + ".mu");
  if (j.contains("lbfgs_memory"))
    out.opt.lbfgs_memory = get_index(j["lbfgs_memory"], where + ".lbfgs_memory");
  if (j.contains("cg_tolerance"))
    out.opt.cg_tolerance = get_number(j["cg_tolerance"], where + ".cg_tolerance");
  if (j.contains("cg_max_iter"))
    out.opt.cg_max_iter = get_index(j["cg_max_iter"], where + ".cg_max_iter");
  if (j.contains("feature_schedule")) {
    const json& fs = j["feature_schedule"];
    require_keys(fs, {"rho", "exponent", "m_max"},
                 where + ".feature_schedule");
    knewton::FeatureSchedule sched;
    if (fs.contains("rho"))
      sched.rho = get_number(fs["rho"], where + ".feature_schedule.rho");
    if (fs.contains("exponent"))
      sched.exponent = static_cast<int>(
          get_index(fs["exponent"], where + ".feature_schedule.exponent"));
    if (fs.contains("m_max"))
      sched.m_max = get_index(fs["m_max"], where + ".feature_schedule.m_max");
    out.opt.feature_schedule = sched;
  }
  if (j.contains("unit_step"))
    out.opt.unit_step = get_bool(j["unit_step"], where + ".unit_step");
  if (j.contains("ssn_rescale"))
    out.opt.ssn_rescale = get_bool(j["ssn_rescale"], where + ".ssn_rescale");
  if (j.contains("dense_cap"))
    out.opt.dense_cap = get_index(j["dense_cap"], where + ".dense_cap");
  if (j.contains("line_search"))
    out.opt.line_search =
        parse_line_search(j["line_search"], where + ".line_search");
  return out;
}

DiagConfig parse_diag(const json& j) {
  require_keys(j,
               {"mu_grid", "mu_runs", "mu_iterations", "mu_ratio",
                "ratio_grid", "ratio_runs", "ratio_iterations", "ratio_mu",
                "spectral_m_grid", "spectral_trials", "theorem1"},
               "diag");
  DiagConfig out;
  if (j.contains("mu_grid"))
    out.mu_grid = get_number_array(j["mu_grid"], "diag.mu_grid");
  if (j.contains("mu_runs"))
    out.mu_runs = static_cast<int>(get_index(j["mu_runs"], "diag.mu_runs"));
  if (j.contains("mu_iterations"))
    out.mu_iterations = get_index(j["mu_iterations"], "diag.mu_iterations");
  if (j.contains("mu_ratio"))
    out.mu_ratio = get_number(j["mu_ratio"], "diag.mu_ratio");
  if (j.contains("ratio_grid"))
    out.ratio_grid = get_number_array(j["ratio_grid"], "diag.ratio_grid");
  if (j.contains("ratio_runs"))
    out.ratio_runs =
        static_cast<int>(get_index(j["ratio_runs"], "diag.ratio_runs"));
  if (j.contains("ratio_iterations"))
    out.ratio_iterations =
        get_index(j["ratio_iterations"], "diag.ratio_iterations");
  if (j.contains("ratio_mu"))
    out.ratio_mu = get_number(j["ratio_mu"], "diag.ratio_mu");
  if (j.contains("spectral_m_grid"))
    out.spectral_m_grid =
        get_index_array(j["spectral_m_grid"], "diag.spectral_m_grid");
  if (j.contains("spectral_trials"))
    out.spectral_trials =
        get_index(j["spectral_trials"], "diag.spectral_trials");
  if (j.contains("theorem1")) {
    const json& t = j["theorem1"];
    require_keys(t, {"gamma", "epsilon", "delta", "trials"}, "diag.theorem1");
    if (t.contains("gamma"))
      out.theorem1.gamma = get_number(t["gamma"], "diag.theorem1.gamma");
    if (t.contains("epsilon"))
      out.theorem1.epsilon = get_number(t["epsilon"], "diag.theorem1.epsilon");
    if (t.contains("delta"))
      out.theorem1.delta = get_number(t["delta"], "diag.theorem1.delta");
    if (t.contains("trials"))
      out.theorem1.trials = get_index(t["trials"], "diag.theorem1.trials");
  }
  return out;
}

RunConfig parse_config(const json& j) {
  require_keys(j,
               {"dataset", "kernel", "lambda", "loss", "scaling", "w0",
                "repeats", "seed_base", "record_iterates", "methods", "diag"},
               "config");
  RunConfig out;
  if (j.contains("dataset")) out.dataset = parse_dataset(j["dataset"]);
  if (j.contains("kernel")) {
    require_keys(j["kernel"], {"sigma"}, "kernel");
    if (j["kernel"].contains("sigma"))
      out.sigma = get_number(j["kernel"]["sigma"], "kernel.sigma");
  }
  if (j.contains("lambda")) out.lambda = get_number(j["lambda"], "lambda");
  if (j.contains("loss")) out.loss = get_string(j["loss"], "loss");
  if (j.contains("scaling")) out.scaling = get_string(j["scaling"], "scaling");
  if (out.scaling != "experiment" && out.scaling != "theory")
    throw ConfigError("scaling: expected experiment | theory");
  if (j.contains("w0")) out.w0 = get_string(j["w0"], "w0");
  if (out.w0 != "zeros" && out.w0 != "gaussian")
    throw ConfigError("w0: expected zeros | gaussian");
  if (j.contains("repeats"))
    out.repeats = static_cast<int>(get_index(j["repeats"], "repeats"));
  if (out.repeats < 1) throw ConfigError("repeats: must be >= 1");
  if (j.contains("seed_base"))
    out.seed_base =
        static_cast<std::uint64_t>(get_index(j["seed_base"], "seed_base"));
  if (j.contains("record_iterates"))
    out.record_iterates = get_bool(j["record_iterates"], "record_iterates");
  if (!j.contains("methods") || !j["methods"].is_array() ||
      j["methods"].empty())
    throw ConfigError("methods: at least one method entry is required");
  for (std::size_t i = 0; i < j["methods"].size(); ++i)
    out.methods.push_back(parse_method_entry(j["methods"][i], i));
  if (j.contains("diag")) out.diag = parse_diag(j["diag"]);
  return out;
}

// ---------------------------------------------------------------------------
// Presets: the two experiment recipes from the source protocol. Data files
// are user-supplied; everything else is encoded here.

json preset_paper(const std::string& path, double sigma,
                  double randomized_shrink) {
  json ls_exact = {{"sufficient_decrease", 0.3},
                   {"shrink", 0.5},
                   {"init_policy", "unit"}};
  json ls_random = {{"sufficient_decrease", 0.3},
                    {"shrink", randomized_shrink},
                    {"init_policy", "inverse_newton_decrement_sq"}};
  return json{
      {"dataset",
       {{"source", "libsvm"},
        {"path", path},
        {"standardize", true},
        {"subsample", 5000},
        {"subsample_seed", 0}}},
      {"kernel", {{"sigma", sigma}}},
      {"lambda", 1e-5},
      {"loss", "logistic"},
      {"scaling", "experiment"},
      {"w0", "gaussian"},
      {"repeats", 40},
      {"seed_base", 0},
      {"methods",
       json::array(
           {{{"method", "newton"},
             {"max_iterations", 50},
             {"gradient_tolerance", 1e-8},
             {"line_search", ls_exact}},
            {{"method", "lbfgs"},
             {"max_iterations", 500},
             {"gradient_tolerance", 1e-8},
             {"line_search", ls_exact}},
            {{"method", "ssncg"},
             {"max_iterations", 50},
             {"gradient_tolerance", 1e-8},
             {"m_ratio", 0.1},
             {"mu", 1e-4},
             {"cg_tolerance", 1e-6},
             {"line_search", ls_random}},
            {{"method", "rfn"},
             {"max_iterations", 50},
             {"gradient_tolerance", 1e-8},
             {"m_ratio", 0.1},
             {"mu", 1e-4},
             {"line_search", ls_random}}})}};
}

std::optional<json> lookup_preset(const std::string& name) {
  if (name == "covertype-paper")
    return preset_paper("data/covtype.libsvm", 0.5, 0.2);
  if (name == "codrna-paper")
    return preset_paper("data/cod-rna.libsvm", 2.0, 0.25);
  return std::nullopt;
}

json load_config_document(const std::string& config_arg) {
  if (std::filesystem::exists(config_arg)) {
    std::ifstream in(config_arg);
    if (!in) throw ConfigError("cannot open config '" + config_arg + "'");
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw ConfigError("config '" + config_arg + "': " + e.what());
    }
    return j;
  }
  if (auto preset = lookup_preset(config_arg)) return *preset;
  throw ConfigError("config '" + config_arg +
                    "' is neither a file nor a known preset "
                    "(covertype-paper, codrna-paper)");
}

// --set key=value with dotted paths; numeric components index arrays. The
// value is parsed as JSON when possible and treated as a string otherwise.
void apply_override(json& doc, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set expects key=value, got '" + spec + "'");
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string part = dot == std::string::npos
                                 ? path.substr(start)
                                 : path.substr(start, dot - start);
    if (part.empty())
      throw ConfigError("--set: empty path component in '" + path + "'");
    const bool last = dot == std::string::npos;
    const bool numeric =
        part.find_first_not_of("0123456789") == std::string::npos;
    if (numeric && node->is_array()) {
      const std::size_t idx = std::stoul(part);
      if (idx >= node->size())
        throw ConfigError("--set: index " + part + " out of range in '" +
                          path + "'");
      node = &(*node)[idx];
    } else {
      if (!node->is_object() && !node->is_null())
        throw ConfigError("--set: '" + path + "' descends into a non-object");
      node = &(*node)[part];
    }
    if (last) break;
    start = dot + 1;
  }
  *node = value;
}

// ---------------------------------------------------------------------------
// Problem assembly and run helpers.

ProblemState build_problem(const RunConfig& cfg) {
  knewton::Dataset ds;
  if (cfg.dataset.source == "synthetic") {
    ds = knewton::synth_two_gaussians(cfg.dataset.n, cfg.dataset.d,
                                      cfg.dataset.separation,
                                      cfg.dataset.seed);
  } else if (cfg.dataset.source == "libsvm") {
    ds = knewton::load_libsvm(cfg.dataset.path);
  } else {
    ds = knewton::load_csv(cfg.dataset.path, cfg.dataset.label_column,
                           cfg.dataset.has_header);
  }
  if (cfg.dataset.standardize) ds = knewton::standardize(ds);
  if (cfg.dataset.subsample > 0 && cfg.dataset.subsample < ds.n())
    ds = knewton::subsample(ds, cfg.dataset.subsample,
                            cfg.dataset.subsample_seed);
  const knewton::ScalingConvention conv =
      cfg.scaling == "theory" ? knewton::ScalingConvention::kTheory
                              : knewton::ScalingConvention::kExperiment;
  return knewton::make_problem(std::move(ds.x), std::move(ds.y),
                               knewton::KernelSpec{cfg.sigma},
                               knewton::make_loss(cfg.loss), cfg.lambda, conv);
}

Vector start_point(const RunConfig& cfg, Index n, std::uint64_t run_seed) {
  if (cfg.w0 == "zeros") return Vector::Zero(n);
  Rng rng(Rng::substream_seed(run_seed, kW0Stream));
  Vector w(n);
  for (Index i = 0; i < n; ++i) w[i] = rng.gaussian();
  return w;
}

// Loss and cumulative-time curves padded past termination with the final
// state, so aggregation across runs of different lengths is well defined.
double loss_at(const OptimizerTrace& tr, std::size_t t) {
  return t < tr.records.size() ? tr.records[t].loss : tr.final_loss;
}

double time_at(const OptimizerTrace& tr, std::size_t t) {
  if (tr.records.empty()) return 0.0;
  return t < tr.records.size() ? tr.records[t].cumulative_time_s
                               : tr.records.back().cumulative_time_s;
}

struct Output {
  std::string filename;
  std::string content;
};

void flush_outputs(const std::vector<Output>& outputs,
                   const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& o : outputs) {
    const std::string path =
        (std::filesystem::path(out_dir) / o.filename).string();
    knewton::write_file_atomic(path, o.content);
    std::cout << path << "\n";
  }
}

int cmd_train(const RunConfig& cfg, const std::string& out_dir, int jobs,
              bool deterministic) {
  ProblemState p = build_problem(cfg);
  std::vector<OptimizerTrace> traces(cfg.methods.size());
  std::vector<std::function<void()>> work;
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    work.push_back([&, i] {
      OptimizerConfig oc = cfg.methods[i].opt;
      oc.seed = cfg.seed_base;
      oc.record_iterates = cfg.record_iterates;
      traces[i] = knewton::run_optimizer(
          p, start_point(cfg, p.n(), cfg.seed_base), oc);
    });
  }
  knewton::run_jobs(work, jobs);
  std::vector<Output> outputs;
  for (std::size_t i = 0; i < cfg.methods.size(); ++i)
    outputs.push_back({"train_" + cfg.methods[i].name + ".csv",
                       knewton::trace_to_csv(traces[i], deterministic)});
  flush_outputs(outputs, out_dir);
  return 0;
}

int cmd_bench(const RunConfig& cfg, const std::string& out_dir, int jobs,
              bool deterministic) {
  if (cfg.repeats < 2)
    throw ConfigError("bench: repeats must be >= 2 for standard errors");
  ProblemState p = build_problem(cfg);
  const std::size_t r = static_cast<std::size_t>(cfg.repeats);
  std::vector<std::vector<OptimizerTrace>> traces(
      cfg.methods.size(), std::vector<OptimizerTrace>(r));
  std::vector<std::function<void()>> work;
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    for (std::size_t run = 0; run < r; ++run) {
      work.push_back([&, i, run] {
        const std::uint64_t seed =
            cfg.seed_base + static_cast<std::uint64_t>(run);
        try {
          OptimizerConfig oc = cfg.methods[i].opt;
          oc.seed = seed;
          oc.record_iterates = cfg.record_iterates;
          traces[i][run] =
              knewton::run_optimizer(p, start_point(cfg, p.n(), seed), oc);
        } catch (const std::exception& e) {
          throw knewton::Error("bench: " + cfg.methods[i].name +
                               " run with seed " + std::to_string(seed) +
                               " failed: " + e.what());
        }
      });
    }
  }
  knewton::run_jobs(work, jobs);

  std::vector<Output> outputs;
  std::vector<knewton::BenchRow> agg;
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    std::size_t max_len = 0;
    for (std::size_t run = 0; run < r; ++run) {
      outputs.push_back(
          {"bench_" + cfg.methods[i].name + "_run" + std::to_string(run) +
               ".csv",
           knewton::trace_to_csv(traces[i][run], deterministic)});
      max_len = std::max(max_len, traces[i][run].records.size() + 1);
    }
    for (std::size_t t = 0; t < max_len; ++t) {
      knewton::BenchRow row;
      row.method = cfg.methods[i].name;
      row.iter = static_cast<Index>(t);
      row.repeats_used = cfg.repeats;
      double loss_sum = 0.0, time_sum = 0.0;
      for (std::size_t run = 0; run < r; ++run) {
        loss_sum += loss_at(traces[i][run], t);
        time_sum += time_at(traces[i][run], t);
      }
      row.loss_mean = loss_sum / static_cast<double>(r);
      row.time_mean_s = time_sum / static_cast<double>(r);
      double loss_ss = 0.0, time_ss = 0.0;
      for (std::size_t run = 0; run < r; ++run) {
        const double dl = loss_at(traces[i][run], t) - row.loss_mean;
        const double dt = time_at(traces[i][run], t) - row.time_mean_s;
        loss_ss += dl * dl;
        time_ss += dt * dt;
      }
      const double norm = static_cast<double>(r) * static_cast<double>(r - 1);
      row.loss_se = std::sqrt(loss_ss / norm);
      row.time_se_s = std::sqrt(time_ss / norm);
      agg.push_back(row);
    }
  }
  outputs.push_back(
      {"bench_aggregate.csv", knewton::bench_to_csv(agg, deterministic)});
  flush_outputs(outputs, out_dir);
  return 0;
}

// Finds the RFN entry used as the base for the diagnostic sweeps; falls back
// to a default-constructed RFN config when the methods list has none.
OptimizerConfig diag_rfn_base(const RunConfig& cfg) {
  for (const auto& m : cfg.methods)
    if (m.opt.method == knewton::Method::kRfn) return m.opt;
  OptimizerConfig oc;
  oc.method = knewton::Method::kRfn;
  return oc;
}

int cmd_diag(const RunConfig& cfg, const std::string& out_dir, int jobs,
             bool deterministic) {
  (void)deterministic;  // diag emits no timing columns
  ProblemState p = build_problem(cfg);
  const DiagConfig& dg = cfg.diag;
  const OptimizerConfig rfn_base = diag_rfn_base(cfg);

  // mu sweep: mean RFN loss per iteration across seeded runs
  std::vector<knewton::SweepRow> mu_rows;
  {
    std::vector<std::vector<OptimizerTrace>> traces(
        dg.mu_grid.size(),
        std::vector<OptimizerTrace>(static_cast<std::size_t>(dg.mu_runs)));
    std::vector<std::function<void()>> work;
    for (std::size_t g = 0; g < dg.mu_grid.size(); ++g) {
      for (int run = 0; run < dg.mu_runs; ++run) {
        work.push_back([&, g, run] {
          OptimizerConfig oc = rfn_base;
          oc.mu = dg.mu_grid[g];
          oc.m_ratio = dg.mu_ratio;
          oc.m_abs = 0;
          oc.max_iterations = dg.mu_iterations;
          oc.gradient_tolerance = 1e-300;  // run the full budget
          oc.seed = cfg.seed_base + static_cast<std::uint64_t>(run);
          traces[g][static_cast<std::size_t>(run)] = knewton::rfn(
              p, start_point(cfg, p.n(), oc.seed), oc);
        });
      }
    }
    knewton::run_jobs(work, jobs);
    for (std::size_t g = 0; g < dg.mu_grid.size(); ++g) {
      for (Index t = 0; t <= dg.mu_iterations; ++t) {
        double sum = 0.0;
        for (const auto& tr : traces[g])
          sum += loss_at(tr, static_cast<std::size_t>(t));
        mu_rows.push_back({dg.mu_grid[g], t,
                           sum / static_cast<double>(dg.mu_runs)});
      }
    }
  }

  // ratio sweep: RFN m/n grid at the fixed sweep mu
  std::vector<knewton::SweepRow> ratio_rows;
  {
    std::vector<std::vector<OptimizerTrace>> traces(
        dg.ratio_grid.size(),
        std::vector<OptimizerTrace>(static_cast<std::size_t>(dg.ratio_runs)));
    std::vector<std::function<void()>> work;
    for (std::size_t g = 0; g < dg.ratio_grid.size(); ++g) {
      for (int run = 0; run < dg.ratio_runs; ++run) {
        work.push_back([&, g, run] {
          OptimizerConfig oc = rfn_base;
          oc.mu = dg.ratio_mu;
          oc.m_ratio = dg.ratio_grid[g];
          oc.m_abs = 0;
          oc.max_iterations = dg.ratio_iterations;
          oc.gradient_tolerance = 1e-300;
          oc.seed = cfg.seed_base + static_cast<std::uint64_t>(run);
          traces[g][static_cast<std::size_t>(run)] = knewton::rfn(
              p, start_point(cfg, p.n(), oc.seed), oc);
        });
      }
    }
    knewton::run_jobs(work, jobs);
    for (std::size_t g = 0; g < dg.ratio_grid.size(); ++g) {
      for (Index t = 0; t <= dg.ratio_iterations; ++t) {
        double sum = 0.0;
        for (const auto& tr : traces[g])
          sum += loss_at(tr, static_cast<std::size_t>(t));
        ratio_rows.push_back({dg.ratio_grid[g], t,
                              sum / static_cast<double>(dg.ratio_runs)});
      }
    }
  }

  // Lemma-3 spectral sweep at a seeded random reference point
  std::vector<knewton::SpectralRow> spectral_rows;
  {
    Rng wrng(Rng::substream_seed(cfg.seed_base, kW0Stream));
    Vector w(p.n());
    for (Index i = 0; i < p.n(); ++i) w[i] = 0.1 * wrng.gaussian();
    std::vector<knewton::SpectralTrialReport> reports(
        dg.spectral_m_grid.size());
    std::vector<std::function<void()>> work;
    for (std::size_t g = 0; g < dg.spectral_m_grid.size(); ++g) {
      work.push_back([&, g] {
        reports[g] = knewton::spectral_error_trials(
            p, w, dg.spectral_m_grid[g], dg.spectral_trials,
            Rng::substream_seed(cfg.seed_base,
                                static_cast<std::uint64_t>(g)));
      });
    }
    knewton::run_jobs(work, jobs);
    for (std::size_t g = 0; g < dg.spectral_m_grid.size(); ++g)
      for (Index trial = 0; trial < reports[g].trials; ++trial)
        spectral_rows.push_back(
            {dg.spectral_m_grid[g], trial,
             reports[g].errors[static_cast<std::size_t>(trial)],
             reports[g].relative_errors[static_cast<std::size_t>(trial)]});
  }

  // Theorem-1 containment frequency at {m*/16, m*/4, m*}
  std::vector<knewton::ContainmentRow> containment_rows;
  {
    const Theorem1Config& t1 = dg.theorem1;
    const double s_gamma = knewton::effective_dimension(p.k, t1.gamma);
    const Index m_star = knewton::rff_count_bound(
        p.n(), t1.gamma, t1.epsilon, t1.delta, s_gamma);
    const std::vector<Index> m_grid = {
        (m_star + 15) / 16, (m_star + 3) / 4, m_star};
    for (std::size_t g = 0; g < m_grid.size(); ++g) {
      const Index m = std::max<Index>(1, m_grid[g]);
      std::vector<char> pass(static_cast<std::size_t>(t1.trials), 0);
      std::vector<std::function<void()>> work;
      for (Index trial = 0; trial < t1.trials; ++trial) {
        work.push_back([&, g, m, trial] {
          Rng rng(Rng::substream_seed(
              Rng::substream_seed(cfg.seed_base,
                                  0x7431ull + static_cast<std::uint64_t>(g)),
              static_cast<std::uint64_t>(trial)));
          knewton::Matrix gram = knewton::feature_gram(p.x, m, p.kernel, rng);
          pass[static_cast<std::size_t>(trial)] =
              knewton::epsilon_spectral_check_gram(p.k, gram, t1.gamma,
                                                   t1.epsilon)
                  ? 1
                  : 0;
        });
      }
      knewton::run_jobs(work, jobs);
      Index successes = 0;
      for (char c : pass) successes += c;
      auto wi = knewton::wilson_interval(successes, t1.trials);
      containment_rows.push_back(
          {m, static_cast<double>(successes) / static_cast<double>(t1.trials),
           wi.lo, wi.hi});
    }
  }

  flush_outputs({{"diag_mu.csv", knewton::sweep_to_csv(mu_rows)},
                 {"diag_ratio.csv", knewton::sweep_to_csv(ratio_rows)},
                 {"diag_lemma3.csv", knewton::spectral_to_csv(spectral_rows)},
                 {"diag_theorem1.csv",
                  knewton::containment_to_csv(containment_rows)}},
                out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-feature Newton training, benchmarking, and "
               "diagnostics for kernel models"};
  app.require_subcommand(1);

  std::string config_arg;
  std::vector<std::string> overrides;
  int jobs = 1;
  std::string out_dir = "out";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_arg, "config file path or preset name")
        ->required();
    sub->add_option("--set", overrides,
                    "override a config leaf, e.g. --set lambda=1e-4 or "
                    "--set methods.0.mu=1e-8");
    sub->add_option("--jobs", jobs, "max parallel runs");
    sub->add_option("--out", out_dir, "output directory");
  };
  CLI::App* train = app.add_subcommand("train", "single run per method");
  CLI::App* bench =
      app.add_subcommand("bench", "seeded repeats with aggregation");
  CLI::App* diag = app.add_subcommand("diag", "diagnostic sweeps");
  add_common(train);
  add_common(bench);
  add_common(diag);

  CLI11_PARSE(app, argc, argv);

  try {
    const char* det_env = std::getenv("KERNEL_NEWTON_DETERMINISTIC");
    const bool deterministic = det_env && std::string(det_env) == "1";
    if (deterministic) jobs = 1;
    if (jobs < 1)
      throw ConfigError("--jobs must be >= 1");

    json doc = load_config_document(config_arg);
    for (const auto& o : overrides) apply_override(doc, o);
    RunConfig cfg = parse_config(doc);

    if (train->parsed()) return cmd_train(cfg, out_dir, jobs, deterministic);
    if (bench->parsed()) return cmd_bench(cfg, out_dir, jobs, deterministic);
    return cmd_diag(cfg, out_dir, jobs, deterministic);
  } catch (const std::exception& e) {
    std::cerr << "kernel-newton: " << e.what() << "\n";
    return 1;
  }
}

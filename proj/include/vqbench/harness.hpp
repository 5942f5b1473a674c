#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <tuple>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "vqbench/ansatz.hpp"
#include "vqbench/metalearner.hpp"
#include "vqbench/optimizers/bayesian.hpp"
#include "vqbench/optimizers/common.hpp"
#include "vqbench/optimizers/evolutionary.hpp"
#include "vqbench/optimizers/lbfgsb.hpp"
#include "vqbench/optimizers/nelder_mead.hpp"
#include "vqbench/problems.hpp"
#include "vqbench/rng.hpp"
#include "vqbench/simulator.hpp"

namespace vqbench {

// ---------------------------------------------------------------------------
// Metrics

// Gain to the minimum: 1 when the optimizer reaches the global minimum,
// 0 when it never improves on the initial cost, negative when it ends worse.
inline double gain(double f_initial, double f_final, double f_min) {
  if (f_min > f_initial) {
    throw std::invalid_argument("f_min must not exceed the initial cost");
  }
  const double denom = f_min - f_initial;
  if (denom == 0.0) {
    throw std::invalid_argument("degenerate initialization (f_initial == f_min)");
  }
  return (f_final - f_initial) / denom;
}

// Degenerate-safe wrapper: f_initial == f_min yields 1 when the final cost is
// also the minimum, otherwise the run is excluded (nullopt) and flagged.
inline std::optional<double> gain_checked(double f_initial, double f_final,
                                          double f_min, bool* degenerate = nullptr) {
  const double scale = std::max({1.0, std::abs(f_initial), std::abs(f_min)});
  if (std::abs(f_initial - f_min) <= 1e-12 * scale) {
    if (degenerate) *degenerate = true;
    if (std::abs(f_final - f_min) <= 1e-12 * scale) return 1.0;
    return std::nullopt;
  }
  if (degenerate) *degenerate = false;
  return gain(f_initial, f_final, f_min);
}

// Distance to the global minimum as a percentage of the spectrum extent;
// <= 2 is "near-optimal". A constant problem (f_max == f_min) is 0, flagged.
inline double distance(double f_final, double f_min, double f_max,
                       bool* degenerate = nullptr) {
  const double scale = std::max({1.0, std::abs(f_min), std::abs(f_max)});
  if (std::abs(f_max - f_min) <= 1e-12 * scale) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  if (degenerate) *degenerate = false;
  return std::abs(f_min - f_final) / std::abs(f_min - f_max) * 100.0;
}

// ---------------------------------------------------------------------------
// Configuration

enum class OptimizerKind { NelderMead, Lbfgsb, Bayesian, Evolutionary, MetaLearner };

inline std::string optimizer_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::NelderMead: return "nelder_mead";
    case OptimizerKind::Lbfgsb: return "lbfgs_b";
    case OptimizerKind::Bayesian: return "bayesian";
    case OptimizerKind::Evolutionary: return "evolutionary";
    case OptimizerKind::MetaLearner: return "meta_learner";
  }
  return "?";
}

inline OptimizerKind optimizer_from_name(const std::string& s) {
  if (s == "nelder_mead") return OptimizerKind::NelderMead;
  if (s == "lbfgs_b") return OptimizerKind::Lbfgsb;
  if (s == "bayesian") return OptimizerKind::Bayesian;
  if (s == "evolutionary") return OptimizerKind::Evolutionary;
  if (s == "meta_learner") return OptimizerKind::MetaLearner;
  throw std::invalid_argument("unknown optimizer: " + s);
}

struct BenchmarkConfig {
  ProblemClass problem_class = ProblemClass::FermiHubbard;
  EnvMode env_mode = EnvMode::WaveFunction;
  int shots = 1024;
  double sigma = 0.1;
  std::vector<OptimizerKind> optimizers = {
      OptimizerKind::NelderMead, OptimizerKind::Lbfgsb, OptimizerKind::Bayesian,
      OptimizerKind::Evolutionary, OptimizerKind::MetaLearner};
  int n_instances = 20;
  int n_inits = 5;
  int budget = 100;
  int local_budget_factor = 10;  // Nelder-Mead / L-BFGS-B convergence headroom
  int qaoa_p = 3;
  int vqe_blocks = 3;
  std::uint64_t base_seed = 1;
  std::string output_dir = "results";
  std::string models_dir = "models";
  std::string instances_dir;  // optional: load instead of generate
  int threads = 1;
  int meta_max_iter = 100;
  EsConfig es;
  GpConfig gp;

  int es_bits_per_param() const {
    return problem_class == ProblemClass::FermiHubbard ? 11 : 10;
  }

  EnvironmentConfig environment(std::uint64_t run_seed) const {
    EnvironmentConfig env;
    env.mode = env_mode;
    env.shots = shots;
    env.sigma = sigma;
    env.seed = run_seed;
    return env;
  }
};

inline Json benchmark_config_to_json(const BenchmarkConfig& c) {
  Json j;
  j["problem_class"] = problem_class_name(c.problem_class);
  j["environment"] = env_mode_name(c.env_mode);
  j["shots"] = c.shots;
  j["sigma"] = c.sigma;
  Json opts = Json::array();
  for (OptimizerKind k : c.optimizers) opts.push_back(optimizer_name(k));
  j["optimizers"] = std::move(opts);
  j["n_instances"] = c.n_instances;
  j["n_inits"] = c.n_inits;
  j["budget"] = c.budget;
  j["local_budget_factor"] = c.local_budget_factor;
  j["qaoa_p"] = c.qaoa_p;
  j["vqe_blocks"] = c.vqe_blocks;
  j["base_seed"] = c.base_seed;
  j["output_dir"] = c.output_dir;
  j["models_dir"] = c.models_dir;
  j["instances_dir"] = c.instances_dir;
  j["threads"] = c.threads;
  j["meta_max_iter"] = c.meta_max_iter;
  j["es"] = Json{{"population", c.es.population},
                 {"p_crossover", c.es.p_crossover},
                 {"p_mutation", c.es.p_mutation}};
  j["gp"] = Json{{"n_initial", c.gp.n_initial},
                 {"restarts", c.gp.restarts},
                 {"refit_every", c.gp.refit_every},
                 {"fit_iters", c.gp.fit_iters},
                 {"search_points", c.gp.search_points},
                 {"stall_tol", c.gp.stall_tol},
                 {"stall_iters", c.gp.stall_iters}};
  return j;
}

inline BenchmarkConfig benchmark_config_from_json(const Json& j) {
  BenchmarkConfig c;
  c.problem_class = problem_class_from_name(j.at("problem_class").get<std::string>());
  c.env_mode = env_mode_from_name(j.at("environment").get<std::string>());
  if (j.contains("shots")) c.shots = j.at("shots").get<int>();
  if (j.contains("sigma")) c.sigma = j.at("sigma").get<double>();
  if (j.contains("optimizers")) {
    c.optimizers.clear();
    for (const auto& o : j.at("optimizers")) {
      c.optimizers.push_back(optimizer_from_name(o.get<std::string>()));
    }
  }
  if (j.contains("n_instances")) c.n_instances = j.at("n_instances").get<int>();
  if (j.contains("n_inits")) c.n_inits = j.at("n_inits").get<int>();
  if (j.contains("budget")) c.budget = j.at("budget").get<int>();
  if (j.contains("local_budget_factor")) {
    c.local_budget_factor = j.at("local_budget_factor").get<int>();
  }
  if (j.contains("qaoa_p")) c.qaoa_p = j.at("qaoa_p").get<int>();
  if (j.contains("vqe_blocks")) c.vqe_blocks = j.at("vqe_blocks").get<int>();
  if (j.contains("base_seed")) c.base_seed = j.at("base_seed").get<std::uint64_t>();
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("models_dir")) c.models_dir = j.at("models_dir").get<std::string>();
  if (j.contains("instances_dir")) {
    c.instances_dir = j.at("instances_dir").get<std::string>();
  }
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  if (j.contains("meta_max_iter")) c.meta_max_iter = j.at("meta_max_iter").get<int>();
  if (j.contains("es")) {
    const auto& e = j.at("es");
    if (e.contains("population")) c.es.population = e.at("population").get<int>();
    if (e.contains("p_crossover")) c.es.p_crossover = e.at("p_crossover").get<double>();
    if (e.contains("p_mutation")) c.es.p_mutation = e.at("p_mutation").get<double>();
  }
  if (j.contains("gp")) {
    const auto& g = j.at("gp");
    if (g.contains("n_initial")) c.gp.n_initial = g.at("n_initial").get<int>();
    if (g.contains("restarts")) c.gp.restarts = g.at("restarts").get<int>();
    if (g.contains("refit_every")) c.gp.refit_every = g.at("refit_every").get<int>();
    if (g.contains("fit_iters")) c.gp.fit_iters = g.at("fit_iters").get<int>();
    if (g.contains("search_points")) {
      c.gp.search_points = g.at("search_points").get<int>();
    }
    if (g.contains("stall_tol")) c.gp.stall_tol = g.at("stall_tol").get<double>();
    if (g.contains("stall_iters")) c.gp.stall_iters = g.at("stall_iters").get<int>();
  }
  if (c.n_instances < 1 || c.n_inits < 1) {
    throw std::invalid_argument("n_instances and n_inits must be >= 1");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Run summaries and reporting

struct RunSummary {
  std::string environment;
  std::string problem_class;
  std::string optimizer;
  int instance_index = 0;
  int init_index = 0;
  std::uint64_t run_seed = 0;
  double f_initial = 0.0, f_final = 0.0, f_min = 0.0, f_max = 0.0;
  std::optional<double> gain_value;
  double distance_pct = 0.0;
  bool degenerate = false;
  std::string terminated_reason;
  long energy_evals = 0, gradient_evals = 0;
  int m_parameterized = 0;
  int budget = 0;
  std::vector<long> trace_energy;
  std::vector<double> trace_cost;
};

namespace detail {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Best-so-far cost indexed by energy-eval count 1..budget, padded with the
// final value once the run terminates.
inline std::vector<double> best_so_far_curve(const RunSummary& r) {
  std::vector<double> curve(static_cast<std::size_t>(r.budget),
                            std::numeric_limits<double>::quiet_NaN());
  double best = std::numeric_limits<double>::quiet_NaN();
  std::size_t pos = 0;
  for (std::size_t k = 0; k < r.trace_cost.size(); ++k) {
    const long e = r.trace_energy[k];
    best = std::isnan(best) ? r.trace_cost[k] : std::min(best, r.trace_cost[k]);
    while (pos < curve.size() && static_cast<long>(pos) + 1 <= e) {
      curve[pos++] = best;
    }
  }
  while (pos < curve.size()) curve[pos++] = best;
  return curve;
}

// Gain trace of one run (nondecreasing by construction).
inline std::optional<std::vector<double>> gain_curve(const RunSummary& r) {
  if (!r.gain_value.has_value() && r.degenerate) return std::nullopt;
  const auto best = best_so_far_curve(r);
  std::vector<double> g(best.size());
  for (std::size_t i = 0; i < best.size(); ++i) {
    g[i] = gain(r.f_initial, best[i], r.f_min);
  }
  return g;
}

// ES view with only the best individual of each completed generation:
// generation 0 ends at eval 20, later generations every 21 evals.
inline std::optional<std::vector<double>> es_generation_gain_curve(
    const RunSummary& r, int population) {
  if (!r.gain_value.has_value() && r.degenerate) return std::nullopt;
  const auto best = best_so_far_curve(r);
  std::vector<double> g(best.size(), 0.0);
  double current = 0.0;
  long next_boundary = population;  // end of generation 0
  for (std::size_t i = 0; i < best.size(); ++i) {
    if (static_cast<long>(i) + 1 >= next_boundary) {
      current = gain(r.f_initial, best[i], r.f_min);
      next_boundary += population + 1;
    }
    g[i] = current;
  }
  return g;
}

struct CurveStats {
  std::vector<double> mean, stderr_;
  int n = 0;
};

inline CurveStats aggregate_curves(const std::vector<std::vector<double>>& curves) {
  CurveStats out;
  if (curves.empty()) return out;
  const std::size_t len = curves.front().size();
  out.mean.assign(len, 0.0);
  out.stderr_.assign(len, 0.0);
  out.n = static_cast<int>(curves.size());
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < len; ++i) out.mean[i] += c[i];
  }
  for (std::size_t i = 0; i < len; ++i) out.mean[i] /= out.n;
  if (out.n > 1) {
    for (const auto& c : curves) {
      for (std::size_t i = 0; i < len; ++i) {
        const double d = c[i] - out.mean[i];
        out.stderr_[i] += d * d;
      }
    }
    for (std::size_t i = 0; i < len; ++i) {
      out.stderr_[i] = std::sqrt(out.stderr_[i] / (out.n - 1)) /
                       std::sqrt(static_cast<double>(out.n));
    }
  }
  return out;
}

}  // namespace detail

// Writes gain-curve, bubble, per-run, and ES generation-view CSVs.
inline void write_report_csvs(const std::vector<RunSummary>& runs,
                              const std::string& out_dir,
                              int es_population = 20) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  // Deterministic grouping: (environment, class, optimizer) -> runs.
  std::map<std::tuple<std::string, std::string, std::string>,
           std::vector<const RunSummary*>>
      groups;
  for (const RunSummary& r : runs) {
    groups[{r.environment, r.problem_class, r.optimizer}].push_back(&r);
  }

  {
    std::ofstream out(fs::path(out_dir) / "gain_curves.csv");
    out << "environment,problem_class,optimizer,qpu_iteration,mean_gain,stderr\n";
    for (const auto& [key, members] : groups) {
      std::vector<std::vector<double>> curves;
      for (const RunSummary* r : members) {
        if (auto c = detail::gain_curve(*r)) curves.push_back(std::move(*c));
      }
      const auto stats = detail::aggregate_curves(curves);
      for (std::size_t i = 0; i < stats.mean.size(); ++i) {
        out << std::get<0>(key) << ',' << std::get<1>(key) << ','
            << std::get<2>(key) << ',' << (i + 1) << ','
            << detail::format_double(stats.mean[i]) << ','
            << detail::format_double(stats.stderr_[i]) << '\n';
      }
    }
  }

  {
    std::ofstream out(fs::path(out_dir) / "es_generation_curves.csv");
    out << "environment,problem_class,optimizer,qpu_iteration,mean_gain,stderr\n";
    for (const auto& [key, members] : groups) {
      if (std::get<2>(key) != optimizer_name(OptimizerKind::Evolutionary)) continue;
      std::vector<std::vector<double>> curves;
      for (const RunSummary* r : members) {
        if (auto c = detail::es_generation_gain_curve(*r, es_population)) {
          curves.push_back(std::move(*c));
        }
      }
      const auto stats = detail::aggregate_curves(curves);
      for (std::size_t i = 0; i < stats.mean.size(); ++i) {
        out << std::get<0>(key) << ',' << std::get<1>(key) << ','
            << std::get<2>(key) << ',' << (i + 1) << ','
            << detail::format_double(stats.mean[i]) << ','
            << detail::format_double(stats.stderr_[i]) << '\n';
      }
    }
  }

  {
    // Near-optimal (D <= 2%) counts per (environment, optimizer), repetitions
    // included, summed across problem classes.
    std::map<std::pair<std::string, std::string>, std::pair<long, long>> bubbles;
    for (const RunSummary& r : runs) {
      auto& [near, total] = bubbles[{r.environment, r.optimizer}];
      ++total;
      if (r.distance_pct <= 2.0) ++near;
    }
    std::ofstream out(fs::path(out_dir) / "bubbles.csv");
    out << "environment,optimizer,near_optimal_count,total_runs\n";
    for (const auto& [key, counts] : bubbles) {
      out << key.first << ',' << key.second << ',' << counts.first << ','
          << counts.second << '\n';
    }
  }

  {
    std::ofstream out(fs::path(out_dir) / "runs_long.csv");
    out << "environment,problem_class,optimizer,instance_index,init_index,"
           "f_initial,f_final,f_min,f_max,gain,distance_pct,degenerate,"
           "energy_evals,gradient_evals,terminated_reason\n";
    std::vector<const RunSummary*> sorted;
    for (const RunSummary& r : runs) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](const RunSummary* a,
                                               const RunSummary* b) {
      return std::tie(a->environment, a->problem_class, a->optimizer,
                      a->instance_index, a->init_index) <
             std::tie(b->environment, b->problem_class, b->optimizer,
                      b->instance_index, b->init_index);
    });
    for (const RunSummary* r : sorted) {
      out << r->environment << ',' << r->problem_class << ',' << r->optimizer
          << ',' << r->instance_index << ',' << r->init_index << ','
          << detail::format_double(r->f_initial) << ','
          << detail::format_double(r->f_final) << ','
          << detail::format_double(r->f_min) << ','
          << detail::format_double(r->f_max) << ','
          << (r->gain_value ? detail::format_double(*r->gain_value) : "excluded")
          << ',' << detail::format_double(r->distance_pct) << ','
          << (r->degenerate ? 1 : 0) << ',' << r->energy_evals << ','
          << r->gradient_evals << ',' << r->terminated_reason << '\n';
    }
  }
}

inline Json run_summary_to_json(const RunSummary& r) {
  Json j;
  j["environment"] = r.environment;
  j["problem_class"] = r.problem_class;
  j["optimizer"] = r.optimizer;
  j["instance_index"] = r.instance_index;
  j["init_index"] = r.init_index;
  j["run_seed"] = r.run_seed;
  j["f_initial"] = r.f_initial;
  j["f_final"] = r.f_final;
  j["f_min"] = r.f_min;
  j["f_max"] = r.f_max;
  if (r.gain_value) {
    j["gain"] = *r.gain_value;
  } else {
    j["gain"] = nullptr;
  }
  j["distance_pct"] = r.distance_pct;
  j["degenerate"] = r.degenerate;
  j["terminated_reason"] = r.terminated_reason;
  j["energy_evals"] = r.energy_evals;
  j["gradient_evals"] = r.gradient_evals;
  j["m_parameterized"] = r.m_parameterized;
  j["budget"] = r.budget;
  Json trace;
  trace["energy_evals"] = r.trace_energy;
  trace["cost"] = r.trace_cost;
  j["trace"] = std::move(trace);
  return j;
}

inline RunSummary run_summary_from_json(const Json& j) {
  RunSummary r;
  r.environment = j.at("environment").get<std::string>();
  r.problem_class = j.at("problem_class").get<std::string>();
  r.optimizer = j.at("optimizer").get<std::string>();
  r.instance_index = j.at("instance_index").get<int>();
  r.init_index = j.at("init_index").get<int>();
  r.run_seed = j.at("run_seed").get<std::uint64_t>();
  r.f_initial = j.at("f_initial").get<double>();
  r.f_final = j.at("f_final").get<double>();
  r.f_min = j.at("f_min").get<double>();
  r.f_max = j.at("f_max").get<double>();
  if (!j.at("gain").is_null()) r.gain_value = j.at("gain").get<double>();
  r.distance_pct = j.at("distance_pct").get<double>();
  r.degenerate = j.at("degenerate").get<bool>();
  r.terminated_reason = j.at("terminated_reason").get<std::string>();
  r.energy_evals = j.at("energy_evals").get<long>();
  r.gradient_evals = j.at("gradient_evals").get<long>();
  r.m_parameterized = j.at("m_parameterized").get<int>();
  r.budget = j.at("budget").get<int>();
  r.trace_energy = j.at("trace").at("energy_evals").get<std::vector<long>>();
  r.trace_cost = j.at("trace").at("cost").get<std::vector<double>>();
  return r;
}

// ---------------------------------------------------------------------------
// Benchmark protocol

namespace detail {

inline void parallel_for(int n_tasks, int threads,
                         const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n_tasks));
  if (threads == 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n_tasks) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline std::string meta_model_filename(ProblemClass klass, EnvMode env) {
  return "meta_" + problem_class_name(klass) + "_" + env_mode_name(env) + ".json";
}

}  // namespace detail

inline void save_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return Json::parse(in);
}

inline MetaModel load_meta_model(const std::string& models_dir,
                                 ProblemClass klass, EnvMode env) {
  namespace fs = std::filesystem;
  const fs::path path =
      fs::path(models_dir) / detail::meta_model_filename(klass, env);
  if (!fs::exists(path)) {
    throw std::runtime_error(
        "meta-learner model not found: " + path.string() +
        " (train one first: vqbench train-meta --class " +
        problem_class_name(klass) + " --env " + env_mode_name(env) + ")");
  }
  MetaModel model = meta_model_from_json(load_json_file(path.string()));
  if (model.problem_class != problem_class_name(klass) ||
      model.environment != env_mode_name(env)) {
    std::cerr << "[warning] model " << path.string() << " was trained for ("
              << model.problem_class << ", " << model.environment
              << ") but is deployed on (" << problem_class_name(klass) << ", "
              << env_mode_name(env) << ")\n";
  }
  return model;
}

struct BenchmarkOutput {
  std::vector<RunSummary> runs;
};

// Full protocol for one (problem class, environment) pair: shared initial
// points for the local optimizers, per-run derived seeds, one JSON file per
// run, summary CSVs at the output root.
inline BenchmarkOutput run_benchmark(const BenchmarkConfig& cfg) {
  namespace fs = std::filesystem;
  const std::string class_name = problem_class_name(cfg.problem_class);
  const std::string env_name = env_mode_name(cfg.env_mode);

  const bool wants_meta =
      std::count(cfg.optimizers.begin(), cfg.optimizers.end(),
                 OptimizerKind::MetaLearner) > 0;
  std::optional<MetaModel> meta_model;
  if (wants_meta) {
    meta_model = load_meta_model(cfg.models_dir, cfg.problem_class, cfg.env_mode);
  }

  // Instances (generated or loaded) and their circuits, shared read-only.
  struct InstanceBundle {
    ProblemInstance instance;
    ParameterizedCircuit circuit;
    PauliSum hamiltonian{0};
    int m_occurrences = 0;
  };
  std::vector<InstanceBundle> bundles;
  for (int i = 0; i < cfg.n_instances; ++i) {
    InstanceBundle b;
    if (!cfg.instances_dir.empty()) {
      const fs::path p = fs::path(cfg.instances_dir) /
                         (class_name + "_" + std::to_string(i) + ".json");
      b.instance = instance_from_json(load_json_file(p.string()));
    } else {
      b.instance = generate_instance(
          cfg.problem_class,
          derive_stream(cfg.base_seed, class_name, "instance", i));
    }
    b.circuit = build_ansatz(
        b.instance, default_ansatz(cfg.problem_class, cfg.qaoa_p, cfg.vqe_blocks));
    b.hamiltonian = problem_hamiltonian(b.instance);
    b.m_occurrences = parameterized_occurrence_count(b.circuit);
    bundles.push_back(std::move(b));
  }
  const int dim = bundles.front().circuit.n_params;

  // Shared initial points for L-BFGS-B / Nelder-Mead / meta-learner.
  std::vector<std::vector<std::vector<double>>> inits(
      static_cast<std::size_t>(cfg.n_instances));
  for (int i = 0; i < cfg.n_instances; ++i) {
    for (int k = 0; k < cfg.n_inits; ++k) {
      Rng rng(derive_stream(cfg.base_seed, class_name, "init", i, k));
      std::vector<double> x(static_cast<std::size_t>(dim));
      for (auto& v : x) {
        v = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
      }
      inits[static_cast<std::size_t>(i)].push_back(std::move(x));
    }
  }

  struct Task {
    OptimizerKind optimizer;
    int instance_index, init_index;
  };
  std::vector<Task> tasks;
  for (OptimizerKind opt : cfg.optimizers) {
    for (int i = 0; i < cfg.n_instances; ++i) {
      for (int k = 0; k < cfg.n_inits; ++k) tasks.push_back({opt, i, k});
    }
  }

  for (OptimizerKind opt : cfg.optimizers) {
    fs::create_directories(fs::path(cfg.output_dir) / env_name / class_name /
                           optimizer_name(opt));
  }

  std::vector<RunSummary> runs(tasks.size());
  detail::parallel_for(
      static_cast<int>(tasks.size()), cfg.threads, [&](int task_index) {
        const Task& task = tasks[static_cast<std::size_t>(task_index)];
        const InstanceBundle& b =
            bundles[static_cast<std::size_t>(task.instance_index)];
        const std::string opt_name = optimizer_name(task.optimizer);
        const std::uint64_t run_seed =
            derive_stream(cfg.base_seed, class_name, task.instance_index,
                          task.init_index, opt_name, env_name);
        CircuitObjective obj(b.circuit, b.hamiltonian,
                             cfg.environment(run_seed));
        const std::vector<double>& x0 =
            inits[static_cast<std::size_t>(task.instance_index)]
                 [static_cast<std::size_t>(task.init_index)];

        RunRecord record;
        switch (task.optimizer) {
          case OptimizerKind::NelderMead:
            record = run_nelder_mead(
                obj, x0, static_cast<long>(cfg.budget) * cfg.local_budget_factor);
            break;
          case OptimizerKind::Lbfgsb:
            record = run_lbfgsb(
                obj, x0, static_cast<long>(cfg.budget) * cfg.local_budget_factor);
            break;
          case OptimizerKind::Bayesian: {
            GpConfig gp = cfg.gp;
            gp.learn_noise = cfg.env_mode != EnvMode::WaveFunction;
            record = run_bayesian(obj, cfg.budget, gp,
                                  derive_stream(run_seed, "bayes-driver"));
            break;
          }
          case OptimizerKind::Evolutionary: {
            EsConfig es = cfg.es;
            es.bits_total = dim * cfg.es_bits_per_param();
            record = run_evolutionary(obj, es, cfg.budget,
                                      derive_stream(run_seed, "es-driver"));
            break;
          }
          case OptimizerKind::MetaLearner:
            record = meta_optimize(*meta_model, obj, x0,
                                   std::min(cfg.meta_max_iter, cfg.budget));
            break;
        }

        RunSummary& r = runs[static_cast<std::size_t>(task_index)];
        r.environment = env_name;
        r.problem_class = class_name;
        r.optimizer = opt_name;
        r.instance_index = task.instance_index;
        r.init_index = task.init_index;
        r.run_seed = run_seed;
        r.f_initial = record.f_initial;
        r.f_final = record.f_final;
        r.f_min = b.instance.bounds.f_min;
        r.f_max = b.instance.bounds.f_max;
        bool gain_degenerate = false;
        r.gain_value =
            gain_checked(r.f_initial, r.f_final, r.f_min, &gain_degenerate);
        bool dist_degenerate = false;
        r.distance_pct = distance(r.f_final, r.f_min, r.f_max, &dist_degenerate);
        r.degenerate = gain_degenerate || dist_degenerate;
        r.terminated_reason = termination_name(record.reason);
        r.energy_evals = obj.counter().energy_evals;
        r.gradient_evals = obj.counter().gradient_evals;
        r.m_parameterized = b.m_occurrences;
        r.budget = cfg.budget;
        for (const TraceEntry& e : record.trace) {
          r.trace_energy.push_back(e.energy_evals);
          r.trace_cost.push_back(e.cost);
        }

        Json j = run_summary_to_json(r);
        // Parameter vectors worth keeping: initial and best (full per-entry
        // vectors would be gigabytes across a protocol run).
        j["initial_params"] = record.trace.empty()
                                  ? std::vector<double>{}
                                  : record.trace.front().params;
        j["best_params"] =
            record.trace.empty() ? std::vector<double>{} : record.best().params;
        const fs::path path =
            fs::path(cfg.output_dir) / env_name / class_name / opt_name /
            ("run_" + std::to_string(task.instance_index) + "_" +
             std::to_string(task.init_index) + ".json");
        save_json_file(j, path.string());
      });

  write_report_csvs(runs, cfg.output_dir, cfg.es.population);
  return {std::move(runs)};
}

// Rebuilds the summary CSVs from the per-run JSON files under `results_dir`.
// Unreadable files are listed on stderr and skipped.
inline std::vector<RunSummary> report(const std::string& results_dir) {
  namespace fs = std::filesystem;
  std::vector<RunSummary> runs;
  std::vector<std::string> paths;
  if (fs::exists(results_dir)) {
    for (const auto& entry : fs::recursive_directory_iterator(results_dir)) {
      if (!entry.is_regular_file()) continue;
      const std::string name = entry.path().filename().string();
      if (name.rfind("run_", 0) == 0 && entry.path().extension() == ".json") {
        paths.push_back(entry.path().string());
      }
    }
  }
  std::sort(paths.begin(), paths.end());
  for (const std::string& p : paths) {
    try {
      runs.push_back(run_summary_from_json(load_json_file(p)));
    } catch (const std::exception& e) {
      std::cerr << "[report] skipping corrupt run file " << p << ": " << e.what()
                << '\n';
    }
  }
  write_report_csvs(runs, results_dir);
  return runs;
}

// ---------------------------------------------------------------------------
// Meta-learner training entry point used by the CLI and the acceptance suite.

struct MetaTrainingSetup {
  int hidden = 20;
  double output_scale = 0.1;
  double preprocess_r = 10.0;
  int n_problems = 0;  // 0: spec default (200, or 100 for Fermi-Hubbard)
  int qaoa_p = 3;
  int vqe_blocks = 3;
};

// Trains one (problem class, environment) model on freshly generated
// instances, per the published schedule.
inline MetaModel train_meta_for(ProblemClass klass, EnvMode env_mode, int shots,
                                double sigma, std::uint64_t seed,
                                const MetaTrainingSetup& setup = {}) {
  TrainConfig cfg;
  cfg.n_train_problems =
      setup.n_problems > 0
          ? setup.n_problems
          : (klass == ProblemClass::FermiHubbard ? 100 : 200);

  ProblemSampler sampler = [=](int index, std::uint64_t stream) {
    const ProblemInstance instance = generate_instance(klass, stream);
    auto circuit = std::make_shared<ParameterizedCircuit>(build_ansatz(
        instance, default_ansatz(klass, setup.qaoa_p, setup.vqe_blocks)));
    auto h = std::make_shared<PauliSum>(problem_hamiltonian(instance));
    EnvironmentConfig env;
    env.mode = env_mode;
    env.shots = shots;
    env.sigma = sigma;
    env.seed = derive_stream(stream, "train-env", index);
    auto counter = std::make_shared<QpuCounter>();
    MetaTrainProblem problem;
    problem.dimension = circuit->n_params;
    problem.cost = [circuit, h, env, counter](const std::vector<double>& p) {
      return evaluate_energy(*circuit, p, *h, env, *counter);
    };
    problem.grad = [circuit, h, env, counter](const std::vector<double>& p) {
      return gradient(*circuit, p, *h, env, *counter);
    };
    return problem;
  };

  Rng init_rng(derive_stream(seed, "model-init"));
  MetaModel model = meta_model_init(setup.hidden, setup.output_scale,
                                    setup.preprocess_r, init_rng);
  model = train_meta(std::move(model), sampler, cfg, seed);
  model.problem_class = problem_class_name(klass);
  model.environment = env_mode_name(env_mode);
  return model;
}

}  // namespace vqbench

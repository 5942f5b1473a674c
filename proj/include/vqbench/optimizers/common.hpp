#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqbench/gradients.hpp"
#include "vqbench/pauli.hpp"
#include "vqbench/simulator.hpp"

namespace vqbench {

enum class TerminationReason { Converged, Budget, Stalled };

inline std::string termination_name(TerminationReason r) {
  switch (r) {
    case TerminationReason::Converged: return "converged";
    case TerminationReason::Budget: return "budget";
    case TerminationReason::Stalled: return "stalled";
  }
  return "?";
}

struct TraceEntry {
  long energy_evals = 0;
  long gradient_evals = 0;
  double cost = 0.0;
  std::vector<double> params;
};

// One optimizer trajectory. f_initial is the first recorded cost, f_final
// the best recorded cost.
struct RunRecord {
  std::vector<TraceEntry> trace;
  double f_initial = std::numeric_limits<double>::quiet_NaN();
  double f_final = std::numeric_limits<double>::quiet_NaN();
  TerminationReason reason = TerminationReason::Budget;

  void finalize(TerminationReason r) {
    reason = r;
    if (trace.empty()) return;
    f_initial = trace.front().cost;
    f_final = trace.front().cost;
    for (const TraceEntry& e : trace) f_final = std::min(f_final, e.cost);
  }

  const TraceEntry& best() const {
    if (trace.empty()) throw std::logic_error("empty trace");
    const TraceEntry* b = &trace.front();
    for (const TraceEntry& e : trace) {
      if (e.cost < b->cost) b = &e;
    }
    return *b;
  }
};

// Counter-aware cost function handed to every optimizer.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double evaluate(const std::vector<double>& params) = 0;
  virtual bool has_gradient() const { return false; }
  virtual std::vector<double> gradient(const std::vector<double>&) {
    throw std::logic_error("objective has no gradient");
  }
  virtual const QpuCounter& counter() const = 0;
  virtual int dimension() const = 0;
  virtual const std::vector<std::pair<double, double>>& bounds() const = 0;
};

inline std::vector<std::pair<double, double>> default_angle_bounds(int dim) {
  return std::vector<std::pair<double, double>>(
      static_cast<std::size_t>(dim),
      {-std::numbers::pi / 2.0, std::numbers::pi / 2.0});
}

// <H> of a parameterized circuit in one execution environment.
class CircuitObjective : public Objective {
 public:
  CircuitObjective(ParameterizedCircuit circuit, PauliSum h,
                   EnvironmentConfig env)
      : circuit_(std::move(circuit)),
        h_(std::move(h)),
        env_(env),
        bounds_(default_angle_bounds(circuit_.n_params)) {}

  double evaluate(const std::vector<double>& params) override {
    return evaluate_energy(circuit_, params, h_, env_, counter_);
  }

  bool has_gradient() const override { return true; }

  std::vector<double> gradient(const std::vector<double>& params) override {
    return vqbench::gradient(circuit_, params, h_, env_, counter_);
  }

  const QpuCounter& counter() const override { return counter_; }
  int dimension() const override { return circuit_.n_params; }
  const std::vector<std::pair<double, double>>& bounds() const override {
    return bounds_;
  }

  const ParameterizedCircuit& circuit() const { return circuit_; }
  int occurrence_count() const { return parameterized_occurrence_count(circuit_); }

 private:
  ParameterizedCircuit circuit_;
  PauliSum h_;
  EnvironmentConfig env_;
  QpuCounter counter_;
  std::vector<std::pair<double, double>> bounds_;
};

// Analytic objective for tests and meta-learner sanity families. Counters
// mimic the circuit discipline: 1 energy eval per cost, 2*dim per gradient.
class FunctionObjective : public Objective {
 public:
  using CostFn = std::function<double(const std::vector<double>&)>;
  using GradFn = std::function<std::vector<double>(const std::vector<double>&)>;

  FunctionObjective(int dim, CostFn cost,
                    std::vector<std::pair<double, double>> bounds)
      : dim_(dim), cost_(std::move(cost)), bounds_(std::move(bounds)) {}

  FunctionObjective(int dim, CostFn cost, GradFn grad,
                    std::vector<std::pair<double, double>> bounds)
      : dim_(dim),
        cost_(std::move(cost)),
        grad_(std::move(grad)),
        bounds_(std::move(bounds)) {}

  double evaluate(const std::vector<double>& params) override {
    ++counter_.energy_evals;
    return cost_(params);
  }

  bool has_gradient() const override { return static_cast<bool>(grad_); }

  std::vector<double> gradient(const std::vector<double>& params) override {
    if (!grad_) throw std::logic_error("objective has no gradient");
    counter_.gradient_evals += 2 * dim_;
    return grad_(params);
  }

  const QpuCounter& counter() const override { return counter_; }
  int dimension() const override { return dim_; }
  const std::vector<std::pair<double, double>>& bounds() const override {
    return bounds_;
  }

 private:
  int dim_;
  CostFn cost_;
  GradFn grad_;
  QpuCounter counter_;
  std::vector<std::pair<double, double>> bounds_;
};

namespace detail {

// Records a trace entry (with current counter values) per cost evaluation.
class TracedObjective {
 public:
  TracedObjective(Objective& obj, RunRecord& record)
      : obj_(obj), record_(record) {}

  double evaluate(const std::vector<double>& x) {
    const double c = obj_.evaluate(x);
    record_.trace.push_back({obj_.counter().energy_evals,
                             obj_.counter().gradient_evals, c, x});
    return c;
  }

  std::vector<double> gradient(const std::vector<double>& x) {
    return obj_.gradient(x);
  }

  long energy_evals() const { return obj_.counter().energy_evals; }
  int dimension() const { return obj_.dimension(); }
  const std::vector<std::pair<double, double>>& bounds() const {
    return obj_.bounds();
  }

 private:
  Objective& obj_;
  RunRecord& record_;
};

inline std::vector<double> clamp_to_bounds(
    std::vector<double> x, const std::vector<std::pair<double, double>>& bounds) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::clamp(x[i], bounds[i].first, bounds[i].second);
  }
  return x;
}

}  // namespace detail

}  // namespace vqbench

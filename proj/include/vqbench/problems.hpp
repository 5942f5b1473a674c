#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "vqbench/pauli.hpp"
#include "vqbench/rng.hpp"

namespace vqbench {

// ---------------------------------------------------------------------------
// MAX-2-SAT

struct Literal {
  int var = 0;
  int sign = +1;  // +1 for x, -1 for !x
};

struct Clause {
  Literal a, b;  // normalized: a.var < b.var

  bool operator==(const Clause& o) const {
    return a.var == o.a.var && a.sign == o.a.sign && b.var == o.b.var &&
           b.sign == o.b.sign;
  }
};

struct Max2SatInstance {
  int n_vars = 8;
  std::vector<Clause> clauses;

  void validate() const {
    if (clauses.size() != 8) throw std::invalid_argument("expected 8 clauses");
    for (std::size_t i = 0; i < clauses.size(); ++i) {
      const Clause& c = clauses[i];
      if (c.a.var < 0 || c.a.var >= n_vars || c.b.var < 0 || c.b.var >= n_vars) {
        throw std::invalid_argument("clause variable out of range");
      }
      if (c.a.var >= c.b.var) {
        throw std::invalid_argument("clause not normalized (a.var < b.var)");
      }
      for (std::size_t j = i + 1; j < clauses.size(); ++j) {
        if (clauses[j] == c) throw std::invalid_argument("duplicate clause");
      }
    }
  }
};

inline Max2SatInstance generate_max2sat(Rng& rng) {
  Max2SatInstance inst;
  while (inst.clauses.size() < 8) {
    const int i = rng.uniform_int(0, inst.n_vars - 1);
    int j = rng.uniform_int(0, inst.n_vars - 2);
    if (j >= i) ++j;
    Clause c;
    c.a = {std::min(i, j), rng.bernoulli(0.5) ? +1 : -1};
    c.b = {std::max(i, j), rng.bernoulli(0.5) ? +1 : -1};
    bool dup = false;
    for (const Clause& existing : inst.clauses) {
      if (existing == c) {
        dup = true;
        break;
      }
    }
    if (!dup) inst.clauses.push_back(c);
  }
  return inst;
}

namespace detail {

inline bool literal_satisfied(const Literal& l, std::uint32_t assignment_mask) {
  const bool value = (assignment_mask >> l.var) & 1u;
  return l.sign > 0 ? value : !value;
}

}  // namespace detail

// Number of UNSATISFIED clauses, so every problem class is a minimization.
inline int max2sat_cost_mask(const Max2SatInstance& inst, std::uint32_t mask) {
  int unsat = 0;
  for (const Clause& c : inst.clauses) {
    if (!detail::literal_satisfied(c.a, mask) &&
        !detail::literal_satisfied(c.b, mask)) {
      ++unsat;
    }
  }
  return unsat;
}

inline int max2sat_cost(const Max2SatInstance& inst,
                        const std::vector<int>& assignment) {
  if (assignment.size() != static_cast<std::size_t>(inst.n_vars)) {
    throw std::invalid_argument("assignment length mismatch");
  }
  std::uint32_t mask = 0;
  for (int v = 0; v < inst.n_vars; ++v) {
    if (assignment[static_cast<std::size_t>(v)]) mask |= (1u << v);
  }
  return max2sat_cost_mask(inst, mask);
}

// Sum over clauses of (1 + s_i Z_i)(1 + s_j Z_j) / 4; diagonal value equals
// the unsatisfied-clause count on every basis state (|0> <-> x = 0).
inline PauliSum max2sat_hamiltonian(const Max2SatInstance& inst) {
  PauliSum h(inst.n_vars);
  for (const Clause& c : inst.clauses) {
    const double si = static_cast<double>(c.a.sign);
    const double sj = static_cast<double>(c.b.sign);
    h.add(0.25, PauliString{});
    h.add(0.25 * si, PauliString{{{c.a.var, PauliOp::Z}}});
    h.add(0.25 * sj, PauliString{{{c.b.var, PauliOp::Z}}});
    h.add(0.25 * si * sj,
          PauliString{{{c.a.var, PauliOp::Z}, {c.b.var, PauliOp::Z}}});
  }
  return h;
}

// ---------------------------------------------------------------------------
// Graph Bisection

struct GraphBisectionInstance {
  int n_nodes = 8;
  std::vector<std::pair<int, int>> edges;  // normalized first < second
  std::vector<int> init_string;            // Hamming weight n/2

  void validate() const {
    if (n_nodes % 2 != 0) throw std::invalid_argument("node count must be even");
    if (edges.size() != 8) throw std::invalid_argument("expected 8 edges");
    std::set<std::pair<int, int>> seen;
    for (const auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n_nodes || v >= n_nodes) {
        throw std::invalid_argument("edge endpoint out of range");
      }
      if (u >= v) throw std::invalid_argument("edge not normalized / self-loop");
      if (!seen.insert({u, v}).second) {
        throw std::invalid_argument("duplicate edge");
      }
    }
    if (init_string.size() != static_cast<std::size_t>(n_nodes)) {
      throw std::invalid_argument("init string length mismatch");
    }
    int weight = 0;
    for (int b : init_string) weight += b ? 1 : 0;
    if (weight != n_nodes / 2) {
      throw std::invalid_argument("init string must have weight n/2");
    }
  }
};

inline GraphBisectionInstance generate_graph_bisection(Rng& rng) {
  GraphBisectionInstance inst;
  std::set<std::pair<int, int>> seen;
  while (inst.edges.size() < 8) {
    const int i = rng.uniform_int(0, inst.n_nodes - 1);
    int j = rng.uniform_int(0, inst.n_nodes - 2);
    if (j >= i) ++j;
    const std::pair<int, int> e{std::min(i, j), std::max(i, j)};
    if (seen.insert(e).second) inst.edges.push_back(e);
  }
  // Uniform weight-n/2 string via partial Fisher-Yates.
  std::vector<int> order(static_cast<std::size_t>(inst.n_nodes));
  for (int k = 0; k < inst.n_nodes; ++k) order[static_cast<std::size_t>(k)] = k;
  inst.init_string.assign(static_cast<std::size_t>(inst.n_nodes), 0);
  for (int k = 0; k < inst.n_nodes / 2; ++k) {
    const int pick = rng.uniform_int(k, inst.n_nodes - 1);
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick)]);
    inst.init_string[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = 1;
  }
  return inst;
}

inline int graph_bisection_cost_mask(const GraphBisectionInstance& inst,
                                     std::uint32_t mask) {
  int cut = 0;
  for (const auto& [u, v] : inst.edges) {
    const bool bu = (mask >> u) & 1u;
    const bool bv = (mask >> v) & 1u;
    if (bu != bv) ++cut;
  }
  return cut;
}

inline int graph_bisection_cost(const GraphBisectionInstance& inst,
                                const std::vector<int>& x) {
  if (x.size() != static_cast<std::size_t>(inst.n_nodes)) {
    throw std::invalid_argument("assignment length mismatch");
  }
  std::uint32_t mask = 0;
  for (int v = 0; v < inst.n_nodes; ++v) {
    if (x[static_cast<std::size_t>(v)]) mask |= (1u << v);
  }
  return graph_bisection_cost_mask(inst, mask);
}

// (1 - Z_i Z_j) / 2 summed over edges.
inline PauliSum graph_bisection_hamiltonian(const GraphBisectionInstance& inst) {
  PauliSum h(inst.n_nodes);
  for (const auto& [u, v] : inst.edges) {
    h.add(0.5, PauliString{});
    h.add(-0.5, PauliString{{{u, PauliOp::Z}, {v, PauliOp::Z}}});
  }
  return h;
}

// ---------------------------------------------------------------------------
// Fermi-Hubbard (spinless 3-site, U = mu = 0, Jordan-Wigner form)

struct FermiHubbardInstance {
  double t12 = 0.0, t13 = 0.0, t23 = 0.0;

  void validate() const {
    for (double t : {t12, t13, t23}) {
      if (t < -2.0 || t > 2.0) {
        throw std::invalid_argument("coupling outside [-2, 2]");
      }
    }
  }
};

inline FermiHubbardInstance generate_fermi_hubbard(Rng& rng) {
  FermiHubbardInstance inst;
  inst.t12 = rng.uniform(-2.0, 2.0);
  inst.t13 = rng.uniform(-2.0, 2.0);
  inst.t23 = rng.uniform(-2.0, 2.0);
  return inst;
}

// (t12 X1X2 + t12 Y1Y2 + t23 X2X3 + t23 Y2Y3 + t13 X1Z2X3 + t13 Y1Z2Y3) / 2,
// site labels 1,2,3 on qubits 0,1,2. All six terms are kept verbatim.
inline PauliSum fermi_hubbard_hamiltonian(const FermiHubbardInstance& inst) {
  PauliSum h(3);
  h.append(0.5 * inst.t12, PauliString{{{0, PauliOp::X}, {1, PauliOp::X}}});
  h.append(0.5 * inst.t12, PauliString{{{0, PauliOp::Y}, {1, PauliOp::Y}}});
  h.append(0.5 * inst.t23, PauliString{{{1, PauliOp::X}, {2, PauliOp::X}}});
  h.append(0.5 * inst.t23, PauliString{{{1, PauliOp::Y}, {2, PauliOp::Y}}});
  h.append(0.5 * inst.t13,
           PauliString{{{0, PauliOp::X}, {1, PauliOp::Z}, {2, PauliOp::X}}});
  h.append(0.5 * inst.t13,
           PauliString{{{0, PauliOp::Y}, {1, PauliOp::Z}, {2, PauliOp::Y}}});
  return h;
}

// ---------------------------------------------------------------------------
// Exact bounds

struct Bounds {
  double f_min = 0.0;
  double f_max = 0.0;
};

inline Bounds exact_bounds(const Max2SatInstance& inst) {
  const std::uint32_t total = 1u << inst.n_vars;
  int lo = max2sat_cost_mask(inst, 0);
  int hi = lo;
  for (std::uint32_t m = 1; m < total; ++m) {
    const int c = max2sat_cost_mask(inst, m);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return {static_cast<double>(lo), static_cast<double>(hi)};
}

// Restricted to the feasible (weight n/2) subspace the XY mixer preserves.
inline Bounds exact_bounds(const GraphBisectionInstance& inst) {
  const std::uint32_t total = 1u << inst.n_nodes;
  const int half = inst.n_nodes / 2;
  bool first = true;
  int lo = 0, hi = 0;
  for (std::uint32_t m = 0; m < total; ++m) {
    if (std::popcount(m) != half) continue;
    const int c = graph_bisection_cost_mask(inst, m);
    if (first) {
      lo = hi = c;
      first = false;
    } else {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
  }
  return {static_cast<double>(lo), static_cast<double>(hi)};
}

inline Bounds exact_bounds(const FermiHubbardInstance& inst) {
  const PauliSum h = fermi_hubbard_hamiltonian(inst);
  return {min_eigenpair(h).energy, max_eigenvalue(h)};
}

// ---------------------------------------------------------------------------
// Tagged instance + JSON files

enum class ProblemClass { Max2Sat, GraphBisection, FermiHubbard };

inline std::string problem_class_name(ProblemClass c) {
  switch (c) {
    case ProblemClass::Max2Sat: return "max2sat";
    case ProblemClass::GraphBisection: return "graph_bisection";
    case ProblemClass::FermiHubbard: return "fermi_hubbard";
  }
  return "?";
}

inline ProblemClass problem_class_from_name(const std::string& s) {
  if (s == "max2sat") return ProblemClass::Max2Sat;
  if (s == "graph_bisection") return ProblemClass::GraphBisection;
  if (s == "fermi_hubbard") return ProblemClass::FermiHubbard;
  throw std::invalid_argument("unknown problem class: " + s);
}

struct ProblemInstance {
  ProblemClass klass = ProblemClass::Max2Sat;
  std::variant<Max2SatInstance, GraphBisectionInstance, FermiHubbardInstance> data;
  std::uint64_t seed = 0;
  Bounds bounds;

  const Max2SatInstance& max2sat() const {
    return std::get<Max2SatInstance>(data);
  }
  const GraphBisectionInstance& graph_bisection() const {
    return std::get<GraphBisectionInstance>(data);
  }
  const FermiHubbardInstance& fermi_hubbard() const {
    return std::get<FermiHubbardInstance>(data);
  }
};

inline ProblemInstance generate_instance(ProblemClass klass, std::uint64_t seed) {
  Rng rng(seed);
  ProblemInstance inst;
  inst.klass = klass;
  inst.seed = seed;
  switch (klass) {
    case ProblemClass::Max2Sat: {
      auto m = generate_max2sat(rng);
      inst.bounds = exact_bounds(m);
      inst.data = std::move(m);
      break;
    }
    case ProblemClass::GraphBisection: {
      auto g = generate_graph_bisection(rng);
      inst.bounds = exact_bounds(g);
      inst.data = std::move(g);
      break;
    }
    case ProblemClass::FermiHubbard: {
      auto f = generate_fermi_hubbard(rng);
      inst.bounds = exact_bounds(f);
      inst.data = std::move(f);
      break;
    }
  }
  return inst;
}

inline PauliSum problem_hamiltonian(const ProblemInstance& inst) {
  switch (inst.klass) {
    case ProblemClass::Max2Sat: return max2sat_hamiltonian(inst.max2sat());
    case ProblemClass::GraphBisection:
      return graph_bisection_hamiltonian(inst.graph_bisection());
    case ProblemClass::FermiHubbard:
      return fermi_hubbard_hamiltonian(inst.fermi_hubbard());
  }
  throw std::logic_error("unreachable");
}

inline Json instance_to_json(const ProblemInstance& inst) {
  Json j;
  j["class"] = problem_class_name(inst.klass);
  switch (inst.klass) {
    case ProblemClass::Max2Sat: {
      const auto& m = inst.max2sat();
      j["n_vars"] = m.n_vars;
      Json clauses = Json::array();
      for (const Clause& c : m.clauses) {
        clauses.push_back(Json::array({c.a.var, c.a.sign, c.b.var, c.b.sign}));
      }
      j["clauses"] = std::move(clauses);
      break;
    }
    case ProblemClass::GraphBisection: {
      const auto& g = inst.graph_bisection();
      j["n_nodes"] = g.n_nodes;
      Json edges = Json::array();
      for (const auto& [u, v] : g.edges) edges.push_back(Json::array({u, v}));
      j["edges"] = std::move(edges);
      std::string bits;
      for (int b : g.init_string) bits.push_back(b ? '1' : '0');
      j["init_string"] = bits;
      break;
    }
    case ProblemClass::FermiHubbard: {
      const auto& f = inst.fermi_hubbard();
      j["t12"] = f.t12;
      j["t13"] = f.t13;
      j["t23"] = f.t23;
      break;
    }
  }
  j["seed"] = inst.seed;
  j["f_min"] = inst.bounds.f_min;
  j["f_max"] = inst.bounds.f_max;
  return j;
}

inline ProblemInstance instance_from_json(const Json& j) {
  ProblemInstance inst;
  inst.klass = problem_class_from_name(j.at("class").get<std::string>());
  switch (inst.klass) {
    case ProblemClass::Max2Sat: {
      Max2SatInstance m;
      m.n_vars = j.at("n_vars").get<int>();
      for (const auto& c : j.at("clauses")) {
        m.clauses.push_back(Clause{{c.at(0).get<int>(), c.at(1).get<int>()},
                                   {c.at(2).get<int>(), c.at(3).get<int>()}});
      }
      m.validate();
      inst.data = std::move(m);
      break;
    }
    case ProblemClass::GraphBisection: {
      GraphBisectionInstance g;
      g.n_nodes = j.at("n_nodes").get<int>();
      for (const auto& e : j.at("edges")) {
        g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      }
      for (char b : j.at("init_string").get<std::string>()) {
        g.init_string.push_back(b == '1' ? 1 : 0);
      }
      g.validate();
      inst.data = std::move(g);
      break;
    }
    case ProblemClass::FermiHubbard: {
      FermiHubbardInstance f;
      f.t12 = j.at("t12").get<double>();
      f.t13 = j.at("t13").get<double>();
      f.t23 = j.at("t23").get<double>();
      f.validate();
      inst.data = std::move(f);
      break;
    }
  }
  inst.seed = j.at("seed").get<std::uint64_t>();
  inst.bounds = {j.at("f_min").get<double>(), j.at("f_max").get<double>()};
  return inst;
}

}  // namespace vqbench

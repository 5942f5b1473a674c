// Shared helpers for randomized circuit tests.
#pragma once

#include <vector>

#include "vqbench/rng.hpp"
#include "vqbench/simulator.hpp"

namespace test_util {

// Random circuit over the full gate set; every slot is referenced at least
// once and some gates use fixed angles.
inline vqbench::ParameterizedCircuit random_circuit(int n_qubits, int n_gates,
                                                    int n_params,
                                                    vqbench::Rng& rng) {
  using namespace vqbench;
  ParameterizedCircuit c;
  c.n_qubits = n_qubits;
  c.n_params = n_params;
  switch (rng.uniform_int(0, 2)) {
    case 0: c.initial_state = InitialStateSpec::all_zeros(); break;
    case 1: c.initial_state = InitialStateSpec::uniform(); break;
    default: {
      std::vector<int> bits(static_cast<std::size_t>(n_qubits));
      for (auto& b : bits) b = rng.uniform_int(0, 1);
      c.initial_state = InitialStateSpec::basis(bits);
    }
  }
  const auto random_gate = [&](int slot) {
    const int q = rng.uniform_int(0, n_qubits - 1);
    int q2 = n_qubits > 1 ? rng.uniform_int(0, n_qubits - 2) : q;
    if (q2 >= q) ++q2;
    const bool fixed = slot < 0;
    const double angle = rng.uniform(-2.0, 2.0);
    const double coeff = rng.uniform(0.25, 2.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    const int kind = rng.uniform_int(0, n_qubits > 1 ? 5 : 2);
    switch (kind) {
      case 0: return fixed ? Gate::rx_fixed(q, angle) : Gate::rx(q, slot, coeff);
      case 1: return fixed ? Gate::ry_fixed(q, angle) : Gate::ry(q, slot, coeff);
      case 2: return fixed ? Gate::rz_fixed(q, angle) : Gate::rz(q, slot, coeff);
      case 3: {
        std::vector<int> targets = rng.bernoulli(0.5) ? std::vector<int>{q}
                                                      : std::vector<int>{q, q2};
        return fixed ? Gate::z_phase_fixed(targets, angle)
                     : Gate::z_phase(targets, slot, coeff);
      }
      case 4:
        return fixed ? Gate{GateKind::XXPlusYY, {q, q2}, -1, angle, 1.0}
                     : Gate::xx_plus_yy(q, q2, slot, coeff);
      default: return Gate::cnot(q, q2);
    }
  };
  for (int s = 0; s < n_params; ++s) {
    Gate g = random_gate(s);
    while (g.kind == GateKind::CNOT) g = random_gate(s);
    c.gates.push_back(g);
  }
  for (int k = n_params; k < n_gates; ++k) {
    const int slot = rng.bernoulli(0.5) ? rng.uniform_int(0, n_params - 1) : -1;
    c.gates.push_back(random_gate(slot));
  }
  c.validate();
  return c;
}

inline std::vector<double> random_params(int n, vqbench::Rng& rng,
                                         double lo = -1.6, double hi = 1.6) {
  std::vector<double> p(static_cast<std::size_t>(n));
  for (auto& v : p) v = rng.uniform(lo, hi);
  return p;
}

}  // namespace test_util

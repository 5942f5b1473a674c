#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "vqbench/problems.hpp"
#include "vqbench/simulator.hpp"

namespace vqbench {

struct AnsatzSpec {
  enum class Kind { QaoaStandard, QaoaXY, VqeBlocks };
  Kind kind = Kind::QaoaStandard;
  int depth = 3;  // QAOA p or VQE block count

  static AnsatzSpec qaoa_standard(int p = 3) { return {Kind::QaoaStandard, p}; }
  static AnsatzSpec qaoa_xy(int p = 3) { return {Kind::QaoaXY, p}; }
  static AnsatzSpec vqe_blocks(int blocks = 3) { return {Kind::VqeBlocks, blocks}; }
};

namespace detail {

// Phase separator exp(-i gamma C) built term-by-term from the diagonal cost
// Hamiltonian; identity terms contribute only a global phase and are dropped.
inline void append_phase_gates(ParameterizedCircuit& circuit, const PauliSum& cost,
                               int gamma_slot) {
  for (const auto& t : cost.terms) {
    if (t.paulis.is_identity()) continue;
    if (!t.paulis.is_diagonal()) {
      throw std::invalid_argument("phase separator needs a diagonal Hamiltonian");
    }
    std::vector<int> qubits;
    for (const auto& [q, op] : t.paulis.ops) {
      (void)op;
      qubits.push_back(q);
    }
    circuit.gates.push_back(Gate::z_phase(std::move(qubits), gamma_slot, t.coeff));
  }
}

}  // namespace detail

// Standard QAOA: |s> initial state, exp(-i gamma C) phases, RX(2 beta) mixer.
// Slots interleave as (gamma_1, beta_1, ..., gamma_p, beta_p).
inline ParameterizedCircuit build_qaoa_standard(const Max2SatInstance& inst,
                                                int p = 3) {
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  const PauliSum cost = max2sat_hamiltonian(inst);
  ParameterizedCircuit circuit;
  circuit.n_qubits = inst.n_vars;
  circuit.n_params = 2 * p;
  circuit.initial_state = InitialStateSpec::uniform();
  for (int layer = 0; layer < p; ++layer) {
    const int gamma_slot = 2 * layer;
    const int beta_slot = 2 * layer + 1;
    detail::append_phase_gates(circuit, cost, gamma_slot);
    for (int q = 0; q < circuit.n_qubits; ++q) {
      circuit.gates.push_back(Gate::rx(q, beta_slot, 2.0));
    }
  }
  circuit.validate();
  return circuit;
}

// XY-mixer QAOA: feasible basis-string initial state, same phase separator,
// ring of XX+YY partial mixers U_n ... U_2 U_1 (U_1 applied first) sharing
// one beta slot per layer.
inline ParameterizedCircuit build_qaoa_xy(const GraphBisectionInstance& inst,
                                          int p = 3) {
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  const PauliSum cost = graph_bisection_hamiltonian(inst);
  ParameterizedCircuit circuit;
  circuit.n_qubits = inst.n_nodes;
  circuit.n_params = 2 * p;
  circuit.initial_state = InitialStateSpec::basis(inst.init_string);
  for (int layer = 0; layer < p; ++layer) {
    const int gamma_slot = 2 * layer;
    const int beta_slot = 2 * layer + 1;
    detail::append_phase_gates(circuit, cost, gamma_slot);
    for (int j = 0; j < circuit.n_qubits; ++j) {
      circuit.gates.push_back(
          Gate::xx_plus_yy(j, (j + 1) % circuit.n_qubits, beta_slot));
    }
  }
  circuit.validate();
  return circuit;
}

// Hardware-efficient VQE ansatz on 3 qubits: per block, RZ-RY-RZ on every
// qubit (each rotation with its own slot), then CNOT(0,1), CNOT(1,2).
inline ParameterizedCircuit build_vqe_ansatz(int blocks = 3) {
  if (blocks < 1) throw std::invalid_argument("blocks must be >= 1");
  ParameterizedCircuit circuit;
  circuit.n_qubits = 3;
  circuit.n_params = 9 * blocks;
  circuit.initial_state = InitialStateSpec::all_zeros();
  int slot = 0;
  for (int b = 0; b < blocks; ++b) {
    for (int q = 0; q < 3; ++q) {
      circuit.gates.push_back(Gate::rz(q, slot++));
      circuit.gates.push_back(Gate::ry(q, slot++));
      circuit.gates.push_back(Gate::rz(q, slot++));
    }
    circuit.gates.push_back(Gate::cnot(0, 1));
    circuit.gates.push_back(Gate::cnot(1, 2));
  }
  circuit.validate();
  return circuit;
}

inline ParameterizedCircuit build_ansatz(const ProblemInstance& inst,
                                         const AnsatzSpec& spec) {
  switch (spec.kind) {
    case AnsatzSpec::Kind::QaoaStandard:
      return build_qaoa_standard(inst.max2sat(), spec.depth);
    case AnsatzSpec::Kind::QaoaXY:
      return build_qaoa_xy(inst.graph_bisection(), spec.depth);
    case AnsatzSpec::Kind::VqeBlocks:
      return build_vqe_ansatz(spec.depth);
  }
  throw std::logic_error("unreachable");
}

inline AnsatzSpec default_ansatz(ProblemClass klass, int qaoa_p = 3,
                                 int vqe_blocks = 3) {
  switch (klass) {
    case ProblemClass::Max2Sat: return AnsatzSpec::qaoa_standard(qaoa_p);
    case ProblemClass::GraphBisection: return AnsatzSpec::qaoa_xy(qaoa_p);
    case ProblemClass::FermiHubbard: return AnsatzSpec::vqe_blocks(vqe_blocks);
  }
  throw std::logic_error("unreachable");
}

}  // namespace vqbench

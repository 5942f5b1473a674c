#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vqbench/pauli.hpp"
#include "vqbench/rng.hpp"
#include "vqbench/simulator.hpp"

namespace vqbench {

// One differentiable gate occurrence. The shift is applied in gate-angle
// space (after the coefficient is folded in); the scale carries the chain
// rule back to the bound parameter.
//   RX/RY/RZ with angle a = c*phi = exp(-i a P/2): dE/dphi = c/2 [E(a+pi/2) - E(a-pi/2)]
//   ZPhase   with angle a = c*phi = exp(-i a Z..Z): dE/dphi = c   [E(a+pi/4) - E(a-pi/4)]
//   XXPlusYY(a) = exp(-i a XX) exp(-i a YY): two occurrences, pi/4 shift each.
struct ShiftOccurrence {
  int gate_index = -1;
  int factor = 0;  // XXPlusYY: 0 = XX factor, 1 = YY factor
  int slot = -1;
  double shift = 0.0;
  double scale = 1.0;
};

inline std::vector<ShiftOccurrence> shift_occurrences(
    const ParameterizedCircuit& c) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  constexpr double quarter_pi = std::numbers::pi / 4.0;
  std::vector<ShiftOccurrence> occs;
  for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
    const Gate& g = c.gates[gi];
    if (g.param_slot < 0) continue;
    const int idx = static_cast<int>(gi);
    switch (g.kind) {
      case GateKind::RX:
      case GateKind::RY:
      case GateKind::RZ:
        occs.push_back({idx, 0, g.param_slot, half_pi, 0.5 * g.coeff});
        break;
      case GateKind::ZPhase:
        occs.push_back({idx, 0, g.param_slot, quarter_pi, g.coeff});
        break;
      case GateKind::XXPlusYY:
        occs.push_back({idx, 0, g.param_slot, quarter_pi, g.coeff});
        occs.push_back({idx, 1, g.param_slot, quarter_pi, g.coeff});
        break;
      case GateKind::CNOT:
        break;
    }
  }
  return occs;
}

// m: parameterized gate occurrences after XXPlusYY decomposition; one
// gradient call costs 2m auxiliary circuit evaluations.
inline int parameterized_occurrence_count(const ParameterizedCircuit& c) {
  return static_cast<int>(shift_occurrences(c).size());
}

// Parameter-shift gradient of <H> with shared-slot accumulation. Every
// shifted evaluation runs in the given environment with its own stochastic
// stream keyed by (seed, gradient ordinal, occurrence, sign); increments
// counter.gradient_evals by exactly 2m.
inline std::vector<double> gradient(const ParameterizedCircuit& c,
                                    const std::vector<double>& params,
                                    const PauliSum& h,
                                    const EnvironmentConfig& env,
                                    QpuCounter& counter) {
  detail::check_params(c, params);
  const auto occs = shift_occurrences(c);
  const std::uint64_t base = derive_stream(
      env.seed, "gradient", static_cast<std::uint64_t>(counter.gradient_evals));
  std::vector<double> grad(static_cast<std::size_t>(c.n_params), 0.0);
  for (std::size_t k = 0; k < occs.size(); ++k) {
    const ShiftOccurrence& occ = occs[k];
    detail::AngleShift plus{occ.gate_index, occ.factor, occ.shift};
    detail::AngleShift minus{occ.gate_index, occ.factor, -occ.shift};
    const double e_plus = detail::evaluate_energy_shifted(
        c, params, h, env, counter, &plus, derive_stream(base, k, "+"));
    const double e_minus = detail::evaluate_energy_shifted(
        c, params, h, env, counter, &minus, derive_stream(base, k, "-"));
    grad[static_cast<std::size_t>(occ.slot)] += occ.scale * (e_plus - e_minus);
  }
  counter.gradient_evals += 2 * static_cast<long>(occs.size());
  return grad;
}

// Central-difference oracle (exact wave function only).
inline std::vector<double> finite_difference_gradient(
    const ParameterizedCircuit& c, const std::vector<double>& params,
    const PauliSum& h, double step) {
  if (step <= 0.0) throw std::invalid_argument("step must be positive");
  detail::check_params(c, params);
  std::vector<double> grad(static_cast<std::size_t>(c.n_params), 0.0);
  std::vector<double> work = params;
  for (int s = 0; s < c.n_params; ++s) {
    const std::size_t si = static_cast<std::size_t>(s);
    work[si] = params[si] + step;
    const double e_plus = expectation(run_circuit(c, work), h);
    work[si] = params[si] - step;
    const double e_minus = expectation(run_circuit(c, work), h);
    work[si] = params[si];
    grad[si] = (e_plus - e_minus) / (2.0 * step);
  }
  return grad;
}

}  // namespace vqbench

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vqbench/pauli.hpp"
#include "vqbench/rng.hpp"

namespace vqbench {

enum class GateKind { RX, RY, RZ, CNOT, ZPhase, XXPlusYY };

// Convention: RP(theta) = exp(-i theta P / 2) for P in {X, Y, Z};
// ZPhase(a) = exp(-i a Z...Z) with a = coeff * bound parameter;
// XXPlusYY(b) = exp(-i b (XX + YY)).
struct Gate {
  GateKind kind{};
  std::vector<int> targets;
  int param_slot = -1;                 // -1: not bound to a parameter
  std::optional<double> fixed_angle;   // set iff param_slot < 0 (non-CNOT)
  double coeff = 1.0;                  // multiplier on the bound parameter

  static Gate rx(int q, int slot, double coeff = 1.0) {
    return {GateKind::RX, {q}, slot, std::nullopt, coeff};
  }
  static Gate ry(int q, int slot, double coeff = 1.0) {
    return {GateKind::RY, {q}, slot, std::nullopt, coeff};
  }
  static Gate rz(int q, int slot, double coeff = 1.0) {
    return {GateKind::RZ, {q}, slot, std::nullopt, coeff};
  }
  static Gate rx_fixed(int q, double angle) {
    return {GateKind::RX, {q}, -1, angle, 1.0};
  }
  static Gate ry_fixed(int q, double angle) {
    return {GateKind::RY, {q}, -1, angle, 1.0};
  }
  static Gate rz_fixed(int q, double angle) {
    return {GateKind::RZ, {q}, -1, angle, 1.0};
  }
  static Gate cnot(int control, int target) {
    return {GateKind::CNOT, {control, target}, -1, std::nullopt, 1.0};
  }
  static Gate z_phase(std::vector<int> qubits, int slot, double coeff) {
    return {GateKind::ZPhase, std::move(qubits), slot, std::nullopt, coeff};
  }
  static Gate z_phase_fixed(std::vector<int> qubits, double angle) {
    return {GateKind::ZPhase, std::move(qubits), -1, angle, 1.0};
  }
  static Gate xx_plus_yy(int q1, int q2, int slot, double coeff = 1.0) {
    return {GateKind::XXPlusYY, {q1, q2}, slot, std::nullopt, coeff};
  }

  bool is_parameterized() const { return kind != GateKind::CNOT; }

  // Noisy environment perturbs angles of single-qubit rotations only.
  bool is_single_qubit_rotation() const {
    switch (kind) {
      case GateKind::RX:
      case GateKind::RY:
      case GateKind::RZ:
        return true;
      case GateKind::ZPhase:
        return targets.size() == 1;
      default:
        return false;
    }
  }
};

struct InitialStateSpec {
  enum class Kind { AllZeros, UniformSuperposition, BasisString };
  Kind kind = Kind::AllZeros;
  std::vector<int> bits;  // bits[q] for BasisString

  static InitialStateSpec all_zeros() { return {Kind::AllZeros, {}}; }
  static InitialStateSpec uniform() { return {Kind::UniformSuperposition, {}}; }
  static InitialStateSpec basis(std::vector<int> bits) {
    return {Kind::BasisString, std::move(bits)};
  }
};

struct ParameterizedCircuit {
  int n_qubits = 0;
  int n_params = 0;
  InitialStateSpec initial_state;
  std::vector<Gate> gates;

  void validate() const {
    if (n_qubits < 1) throw std::invalid_argument("circuit needs >= 1 qubit");
    std::vector<bool> slot_used(static_cast<std::size_t>(n_params), false);
    for (const auto& g : gates) {
      if (g.targets.empty() || g.targets.size() > 2) {
        throw std::invalid_argument("gate target count must be 1 or 2");
      }
      for (int q : g.targets) {
        if (q < 0 || q >= n_qubits) {
          throw std::invalid_argument("gate target out of range");
        }
      }
      if (g.targets.size() == 2 && g.targets[0] == g.targets[1]) {
        throw std::invalid_argument("gate targets must be distinct");
      }
      if (g.kind == GateKind::CNOT) {
        if (g.param_slot >= 0 || g.fixed_angle.has_value()) {
          throw std::invalid_argument("CNOT takes no angle");
        }
        if (g.targets.size() != 2) {
          throw std::invalid_argument("CNOT needs control and target");
        }
      } else {
        const bool has_slot = g.param_slot >= 0;
        if (has_slot == g.fixed_angle.has_value()) {
          throw std::invalid_argument(
              "parameterized gate needs exactly one of slot / fixed angle");
        }
        if (has_slot) {
          if (g.param_slot >= n_params) {
            throw std::invalid_argument("param slot out of range");
          }
          slot_used[static_cast<std::size_t>(g.param_slot)] = true;
        }
      }
      if (g.kind == GateKind::XXPlusYY && g.targets.size() != 2) {
        throw std::invalid_argument("XXPlusYY needs two targets");
      }
    }
    for (int s = 0; s < n_params; ++s) {
      if (!slot_used[static_cast<std::size_t>(s)]) {
        throw std::invalid_argument("unused parameter slot " + std::to_string(s));
      }
    }
  }
};

enum class EnvMode { WaveFunction, Sampling, Noisy };

inline std::string env_mode_name(EnvMode m) {
  switch (m) {
    case EnvMode::WaveFunction: return "wave_function";
    case EnvMode::Sampling: return "sampling";
    case EnvMode::Noisy: return "noisy";
  }
  return "?";
}

inline EnvMode env_mode_from_name(const std::string& s) {
  if (s == "wave_function") return EnvMode::WaveFunction;
  if (s == "sampling") return EnvMode::Sampling;
  if (s == "noisy") return EnvMode::Noisy;
  throw std::invalid_argument("unknown environment: " + s);
}

struct EnvironmentConfig {
  EnvMode mode = EnvMode::WaveFunction;
  int shots = 1024;      // Sampling
  double sigma = 0.1;    // Noisy
  std::uint64_t seed = 0;

  static EnvironmentConfig wave_function(std::uint64_t seed = 0) {
    return {EnvMode::WaveFunction, 1024, 0.1, seed};
  }
  static EnvironmentConfig sampling(int shots, std::uint64_t seed) {
    return {EnvMode::Sampling, shots, 0.1, seed};
  }
  static EnvironmentConfig noisy(double sigma, std::uint64_t seed) {
    return {EnvMode::Noisy, 1024, sigma, seed};
  }
};

// energy_evals counts <H> evaluations (the paper's QPU iteration);
// gradient_evals counts auxiliary shifted-circuit executions (2m per call);
// circuit_executions is a raw diagnostic including per-group state preps.
struct QpuCounter {
  long energy_evals = 0;
  long gradient_evals = 0;
  long circuit_executions = 0;
};

namespace detail {

inline State initial_state_vector(const ParameterizedCircuit& c) {
  const std::size_t dim = std::size_t{1} << c.n_qubits;
  State state(dim, Complex(0.0, 0.0));
  switch (c.initial_state.kind) {
    case InitialStateSpec::Kind::AllZeros:
      state[0] = Complex(1.0, 0.0);
      break;
    case InitialStateSpec::Kind::UniformSuperposition: {
      const double amp = 1.0 / std::sqrt(static_cast<double>(dim));
      std::fill(state.begin(), state.end(), Complex(amp, 0.0));
      break;
    }
    case InitialStateSpec::Kind::BasisString: {
      if (c.initial_state.bits.size() != static_cast<std::size_t>(c.n_qubits)) {
        throw std::invalid_argument("basis string length mismatch");
      }
      std::size_t idx = 0;
      for (int q = 0; q < c.n_qubits; ++q) {
        if (c.initial_state.bits[static_cast<std::size_t>(q)]) {
          idx |= (std::size_t{1} << q);
        }
      }
      state[idx] = Complex(1.0, 0.0);
      break;
    }
  }
  return state;
}

inline void apply_single_qubit(State& state, int q, Complex m00, Complex m01,
                               Complex m10, Complex m11) {
  const std::size_t dim = state.size();
  const std::size_t bit = std::size_t{1} << q;
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & bit) continue;
    const std::size_t j = i | bit;
    const Complex v0 = state[i];
    const Complex v1 = state[j];
    state[i] = m00 * v0 + m01 * v1;
    state[j] = m10 * v0 + m11 * v1;
  }
}

inline void apply_rx(State& state, int q, double theta) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  apply_single_qubit(state, q, Complex(c, 0), Complex(0, -s), Complex(0, -s),
                     Complex(c, 0));
}

inline void apply_ry(State& state, int q, double theta) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  apply_single_qubit(state, q, Complex(c, 0), Complex(-s, 0), Complex(s, 0),
                     Complex(c, 0));
}

inline void apply_rz(State& state, int q, double theta) {
  const Complex e0 = std::polar(1.0, -theta / 2.0);
  const Complex e1 = std::polar(1.0, theta / 2.0);
  const std::size_t bit = std::size_t{1} << q;
  for (std::size_t i = 0; i < state.size(); ++i) {
    state[i] *= (i & bit) ? e1 : e0;
  }
}

inline void apply_cnot(State& state, int control, int target) {
  const std::size_t cbit = std::size_t{1} << control;
  const std::size_t tbit = std::size_t{1} << target;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if ((i & cbit) && !(i & tbit)) {
      std::swap(state[i], state[i | tbit]);
    }
  }
}

// exp(-i a Z...Z) over the given qubits (weight 1 or 2 here).
inline void apply_z_phase(State& state, const std::vector<int>& qubits,
                          double a) {
  const Complex e_plus = std::polar(1.0, -a);   // parity +1 subspace
  const Complex e_minus = std::polar(1.0, +a);  // parity -1 subspace
  std::size_t mask = 0;
  for (int q : qubits) mask |= (std::size_t{1} << q);
  for (std::size_t i = 0; i < state.size(); ++i) {
    const bool odd = std::popcount(i & mask) & 1u;
    state[i] *= odd ? e_minus : e_plus;
  }
}

// exp(-i a XX) over (q1, q2): couples i <-> i with both bits flipped.
inline void apply_xx(State& state, int q1, int q2, double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  const std::size_t mask = (std::size_t{1} << q1) | (std::size_t{1} << q2);
  for (std::size_t i = 0; i < state.size(); ++i) {
    const std::size_t j = i ^ mask;
    if (j < i) continue;
    const Complex v0 = state[i];
    const Complex v1 = state[j];
    state[i] = c * v0 - Complex(0, s) * v1;
    state[j] = c * v1 - Complex(0, s) * v0;
  }
}

// exp(-i a YY): as XX but the coupling sign depends on the bit pair.
inline void apply_yy(State& state, int q1, int q2, double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  const std::size_t b1 = std::size_t{1} << q1;
  const std::size_t b2 = std::size_t{1} << q2;
  const std::size_t mask = b1 | b2;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const std::size_t j = i ^ mask;
    if (j < i) continue;
    // <j|YY|i>: -1 when the two bits of i are equal, +1 when they differ.
    const bool equal_bits = ((i & b1) != 0) == ((i & b2) != 0);
    const double sign = equal_bits ? -1.0 : 1.0;
    const Complex v0 = state[i];
    const Complex v1 = state[j];
    state[i] = c * v0 - Complex(0, s * sign) * v1;
    state[j] = c * v1 - Complex(0, s * sign) * v0;
  }
}

// One shifted-angle request aimed at a single gate occurrence; XXPlusYY
// differentiates per commuting factor (0 = XX, 1 = YY).
struct AngleShift {
  int gate_index = -1;
  int factor = 0;
  double delta = 0.0;
};

// Per-execution angle noise: one draw per qualifying slot plus one draw per
// qualifying fixed-angle gate, in that order.
struct NoiseRealization {
  std::vector<double> slot_offsets;   // size n_params
  std::vector<double> fixed_offsets;  // size gates.size()
};

inline std::vector<bool> noise_qualifying_slots(const ParameterizedCircuit& c) {
  std::vector<bool> qual(static_cast<std::size_t>(c.n_params), false);
  for (const auto& g : c.gates) {
    if (g.param_slot >= 0 && g.is_single_qubit_rotation()) {
      qual[static_cast<std::size_t>(g.param_slot)] = true;
    }
  }
  return qual;
}

inline NoiseRealization draw_parameter_noise(const ParameterizedCircuit& c,
                                             double sigma, Rng& rng) {
  NoiseRealization noise;
  noise.slot_offsets.assign(static_cast<std::size_t>(c.n_params), 0.0);
  noise.fixed_offsets.assign(c.gates.size(), 0.0);
  if (sigma <= 0.0) return noise;
  const auto qual = noise_qualifying_slots(c);
  for (int s = 0; s < c.n_params; ++s) {
    if (qual[static_cast<std::size_t>(s)]) {
      noise.slot_offsets[static_cast<std::size_t>(s)] = rng.normal(0.0, sigma);
    }
  }
  for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
    const Gate& g = c.gates[gi];
    if (g.param_slot < 0 && g.fixed_angle.has_value() &&
        g.is_single_qubit_rotation()) {
      noise.fixed_offsets[gi] = rng.normal(0.0, sigma);
    }
  }
  return noise;
}

inline State run_circuit_internal(const ParameterizedCircuit& c,
                                  const std::vector<double>& params,
                                  const AngleShift* shift,
                                  const NoiseRealization* noise) {
  State state = initial_state_vector(c);
  for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
    const Gate& g = c.gates[gi];
    if (g.kind == GateKind::CNOT) {
      apply_cnot(state, g.targets[0], g.targets[1]);
      continue;
    }
    double angle;
    if (g.param_slot >= 0) {
      double p = params[static_cast<std::size_t>(g.param_slot)];
      if (noise) p += noise->slot_offsets[static_cast<std::size_t>(g.param_slot)];
      angle = g.coeff * p;
    } else {
      angle = *g.fixed_angle;
      if (noise) angle += noise->fixed_offsets[gi];
    }
    const bool shifted = shift && shift->gate_index == static_cast<int>(gi);
    if (g.kind == GateKind::XXPlusYY) {
      const double a_xx = angle + (shifted && shift->factor == 0 ? shift->delta : 0.0);
      const double a_yy = angle + (shifted && shift->factor == 1 ? shift->delta : 0.0);
      apply_xx(state, g.targets[0], g.targets[1], a_xx);
      apply_yy(state, g.targets[0], g.targets[1], a_yy);
      continue;
    }
    if (shifted) angle += shift->delta;
    switch (g.kind) {
      case GateKind::RX: apply_rx(state, g.targets[0], angle); break;
      case GateKind::RY: apply_ry(state, g.targets[0], angle); break;
      case GateKind::RZ: apply_rz(state, g.targets[0], angle); break;
      case GateKind::ZPhase: apply_z_phase(state, g.targets, angle); break;
      default: break;
    }
  }
  return state;
}

inline void check_params(const ParameterizedCircuit& c,
                         const std::vector<double>& params) {
  if (params.size() != static_cast<std::size_t>(c.n_params)) {
    throw std::invalid_argument("parameter vector length mismatch");
  }
  for (double p : params) {
    if (!std::isfinite(p)) throw std::invalid_argument("non-finite parameter");
  }
}

inline std::size_t sample_index(const std::vector<double>& cumulative,
                                Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  const std::size_t idx =
      static_cast<std::size_t>(std::distance(cumulative.begin(), it));
  return std::min(idx, cumulative.size() - 1);
}

inline std::vector<double> probability_cumulative(const State& state) {
  std::vector<double> cum(state.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    acc += std::norm(state[i]);
    cum[i] = acc;
  }
  return cum;
}

}  // namespace detail

inline State run_circuit(const ParameterizedCircuit& c,
                         const std::vector<double>& params) {
  detail::check_params(c, params);
  return detail::run_circuit_internal(c, params, nullptr, nullptr);
}

// Copy of params with one N(0, sigma^2) draw added to every slot that is
// bound to at least one single-qubit rotation gate; slots bound only to
// two-qubit gates are left unchanged.
inline std::vector<double> perturb_parameters(const ParameterizedCircuit& c,
                                              const std::vector<double>& params,
                                              double sigma, Rng& rng) {
  detail::check_params(c, params);
  if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
  std::vector<double> out = params;
  if (sigma == 0.0) return out;
  const auto qual = detail::noise_qualifying_slots(c);
  for (int s = 0; s < c.n_params; ++s) {
    if (qual[static_cast<std::size_t>(s)]) {
      out[static_cast<std::size_t>(s)] += rng.normal(0.0, sigma);
    }
  }
  return out;
}

namespace detail {

// Qubit-wise compatibility: at each qubit the letters are equal or one side
// is identity.
inline bool qubitwise_compatible(const PauliString& a, const PauliString& b) {
  for (const auto& [q, op] : a.ops) {
    const auto it = b.ops.find(q);
    if (it != b.ops.end() && it->second != op) return false;
  }
  return true;
}

inline bool strings_commute(const PauliString& a, const PauliString& b) {
  int anti = 0;
  for (const auto& [q, op] : a.ops) {
    const auto it = b.ops.find(q);
    if (it != b.ops.end() && it->second != op) ++anti;
  }
  return (anti % 2) == 0;
}

struct MeasurementGroup {
  std::vector<PauliTerm> terms;
  bool qubitwise = true;
};

// Greedy qubit-wise grouping followed by a merge pass over globally commuting
// groups. Identity terms are excluded (handled exactly).
inline std::vector<MeasurementGroup> commuting_groups(const PauliSum& h) {
  std::vector<MeasurementGroup> groups;
  for (const auto& t : h.terms) {
    if (t.paulis.is_identity()) continue;
    bool placed = false;
    for (auto& g : groups) {
      bool ok = true;
      for (const auto& member : g.terms) {
        if (!qubitwise_compatible(t.paulis, member.paulis)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        g.terms.push_back(t);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({{t}, true});
  }
  // Merge pass: fold groups that commute globally (measured jointly via an
  // entangled eigenbasis rather than per-qubit rotations).
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < groups.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < groups.size() && !merged; ++j) {
        bool ok = true;
        for (const auto& a : groups[i].terms) {
          for (const auto& b : groups[j].terms) {
            if (!strings_commute(a.paulis, b.paulis)) {
              ok = false;
              break;
            }
          }
          if (!ok) break;
        }
        if (ok) {
          bool qw = groups[i].qubitwise && groups[j].qubitwise;
          for (const auto& a : groups[i].terms) {
            for (const auto& b : groups[j].terms) {
              qw = qw && qubitwise_compatible(a.paulis, b.paulis);
            }
          }
          for (auto& t : groups[j].terms) groups[i].terms.push_back(std::move(t));
          groups[i].qubitwise = qw;
          groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
        }
      }
    }
  }
  return groups;
}

inline int measurement_group_count(const PauliSum& h) {
  return static_cast<int>(commuting_groups(h).size());
}

// Hadamard / (H S^dagger) rotations mapping the group's X/Y letters onto Z,
// then Z-basis sampling. Valid for qubit-wise commuting groups.
inline double sample_qubitwise_group(const MeasurementGroup& g, State state,
                                     int n_qubits, int shots, Rng& rng) {
  std::vector<char> basis(static_cast<std::size_t>(n_qubits), 'I');
  for (const auto& t : g.terms) {
    for (const auto& [q, op] : t.paulis.ops) {
      basis[static_cast<std::size_t>(q)] = pauli_op_char(op);
    }
  }
  const Complex inv_sqrt2(1.0 / std::sqrt(2.0), 0.0);
  for (int q = 0; q < n_qubits; ++q) {
    const char b = basis[static_cast<std::size_t>(q)];
    if (b == 'X') {
      apply_single_qubit(state, q, inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2);
    } else if (b == 'Y') {
      // S^dagger then H: maps the Y eigenbasis onto the Z eigenbasis.
      apply_single_qubit(state, q, Complex(1, 0), Complex(0, 0), Complex(0, 0),
                         Complex(0, -1));
      apply_single_qubit(state, q, inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2);
    }
  }
  const auto cum = probability_cumulative(state);
  double acc = 0.0;
  for (int s = 0; s < shots; ++s) {
    const std::size_t idx = sample_index(cum, rng);
    for (const auto& t : g.terms) {
      acc += t.coeff * diagonal_sign(t.paulis, idx);
    }
  }
  return acc / static_cast<double>(shots);
}

// General commuting group: sample joint eigenvalues of the group operator.
inline double sample_general_group(const MeasurementGroup& g,
                                   const State& state, int n_qubits, int shots,
                                   Rng& rng) {
  PauliSum part(n_qubits);
  for (const auto& t : g.terms) part.append(t.coeff, t.paulis);
  const Eigen::MatrixXcd m = dense_matrix(part);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("group eigendecomposition failed");
  }
  const std::size_t dim = state.size();
  Eigen::VectorXcd psi(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) psi(static_cast<Eigen::Index>(i)) = state[i];
  const Eigen::VectorXcd overlaps = solver.eigenvectors().adjoint() * psi;
  std::vector<double> cum(dim);
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    acc += std::norm(overlaps(static_cast<Eigen::Index>(i)));
    cum[i] = acc;
  }
  double sum = 0.0;
  for (int s = 0; s < shots; ++s) {
    const std::size_t idx = sample_index(cum, rng);
    sum += solver.eigenvalues()(static_cast<Eigen::Index>(idx));
  }
  return sum / static_cast<double>(shots);
}

// Full energy evaluation with an optional per-occurrence angle shift; the
// stream key scopes all stochastic draws for this one evaluation.
inline double evaluate_energy_shifted(const ParameterizedCircuit& c,
                                      const std::vector<double>& params,
                                      const PauliSum& h,
                                      const EnvironmentConfig& env,
                                      QpuCounter& counter,
                                      const AngleShift* shift,
                                      std::uint64_t stream_key) {
  if (h.n_qubits != c.n_qubits) {
    throw std::invalid_argument("Hamiltonian / circuit qubit count mismatch");
  }
  check_params(c, params);
  switch (env.mode) {
    case EnvMode::WaveFunction: {
      const State state = run_circuit_internal(c, params, shift, nullptr);
      ++counter.circuit_executions;
      return expectation(state, h);
    }
    case EnvMode::Sampling: {
      if (env.shots <= 0) {
        throw std::invalid_argument("shot count must be positive");
      }
      const auto groups = commuting_groups(h);
      double energy = h.constant_offset();
      int group_idx = 0;
      for (const auto& g : groups) {
        State state = run_circuit_internal(c, params, shift, nullptr);
        ++counter.circuit_executions;
        Rng rng(derive_stream(stream_key, "group", group_idx));
        if (g.qubitwise) {
          energy += sample_qubitwise_group(g, std::move(state), c.n_qubits,
                                           env.shots, rng);
        } else {
          energy += sample_general_group(g, state, c.n_qubits, env.shots, rng);
        }
        ++group_idx;
      }
      return energy;
    }
    case EnvMode::Noisy: {
      Rng rng(derive_stream(stream_key, "noise"));
      const NoiseRealization noise = draw_parameter_noise(c, env.sigma, rng);
      const State state = run_circuit_internal(c, params, shift, &noise);
      ++counter.circuit_executions;
      return expectation(state, h);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace detail

// One <H> evaluation in the given environment; increments energy_evals.
// Stochastic draws are scoped by (env.seed, energy eval ordinal) so repeated
// calls see fresh noise while a rerun of the same sequence is bit-identical.
inline double evaluate_energy(const ParameterizedCircuit& c,
                              const std::vector<double>& params,
                              const PauliSum& h, const EnvironmentConfig& env,
                              QpuCounter& counter) {
  const std::uint64_t key =
      derive_stream(env.seed, "energy", static_cast<std::uint64_t>(counter.energy_evals));
  const double e =
      detail::evaluate_energy_shifted(c, params, h, env, counter, nullptr, key);
  ++counter.energy_evals;
  return e;
}

// `shots` computational-basis draws from the circuit's output distribution.
// String position j holds qubit j's bit.
inline std::vector<std::string> sample_bitstrings(const ParameterizedCircuit& c,
                                                  const std::vector<double>& params,
                                                  int shots, std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  const State state = run_circuit(c, params);
  const auto cum = detail::probability_cumulative(state);
  Rng rng(derive_stream(seed, "bitstrings"));
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(shots));
  for (int s = 0; s < shots; ++s) {
    const std::size_t idx = detail::sample_index(cum, rng);
    std::string bits(static_cast<std::size_t>(c.n_qubits), '0');
    for (int q = 0; q < c.n_qubits; ++q) {
      if ((idx >> q) & 1u) bits[static_cast<std::size_t>(q)] = '1';
    }
    out.push_back(std::move(bits));
  }
  return out;
}

// Monte-Carlo estimate of the effective fidelity of an arbitrary rotation
// R_Z(alpha) R_Y(beta) R_Z(gamma) on |0> when each angle picks up N(0, sigma^2)
// noise. The calibration composite uses full-angle rotations exp(-i theta P),
// matching the ~99% single-qubit gate fidelity anchor at sigma = 0.1.
inline double fidelity_vs_sigma(double sigma, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  Rng rng(derive_stream(seed, "fidelity"));
  const double two_pi = 2.0 * std::numbers::pi;

  const auto compose = [](double alpha, double beta, double gamma,
                          Complex& a0, Complex& a1) {
    // exp(-i gamma Z)|0> is a pure phase; track amplitudes directly.
    const Complex p0 = std::polar(1.0, -gamma);
    // exp(-i beta Y): [[cos b, -sin b], [sin b, cos b]]
    const double cb = std::cos(beta), sb = std::sin(beta);
    const Complex y0 = cb * p0;
    const Complex y1 = sb * p0;
    a0 = std::polar(1.0, -alpha) * y0;
    a1 = std::polar(1.0, +alpha) * y1;
  };

  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    const double alpha = rng.uniform(0.0, two_pi);
    const double beta = rng.uniform(0.0, two_pi);
    const double gamma = rng.uniform(0.0, two_pi);
    Complex i0, i1, n0, n1;
    compose(alpha, beta, gamma, i0, i1);
    if (sigma > 0.0) {
      compose(alpha + rng.normal(0.0, sigma), beta + rng.normal(0.0, sigma),
              gamma + rng.normal(0.0, sigma), n0, n1);
    } else {
      n0 = i0;
      n1 = i1;
    }
    const Complex overlap = std::conj(i0) * n0 + std::conj(i1) * n1;
    acc += std::norm(overlap);
  }
  return acc / static_cast<double>(trials);
}

}  // namespace vqbench

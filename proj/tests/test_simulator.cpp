#include "vqbench/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_util.hpp"
#include "vqbench/ansatz.hpp"
#include "vqbench/problems.hpp"

using namespace vqbench;

namespace {

// Dense oracle for a full circuit: multiply per-gate matrices built from
// exp(-i angle G) with explicitly assembled generators.
oracles::Vector oracle_run(const ParameterizedCircuit& c,
                           const std::vector<double>& params) {
  using namespace oracles;
  const Eigen::Index dim = Eigen::Index(1) << c.n_qubits;
  Vector psi = Vector::Zero(dim);
  switch (c.initial_state.kind) {
    case InitialStateSpec::Kind::AllZeros: psi(0) = 1.0; break;
    case InitialStateSpec::Kind::UniformSuperposition:
      psi.setConstant(1.0 / std::sqrt(static_cast<double>(dim)));
      break;
    case InitialStateSpec::Kind::BasisString: {
      std::size_t idx = 0;
      for (int q = 0; q < c.n_qubits; ++q) {
        if (c.initial_state.bits[static_cast<std::size_t>(q)]) idx |= (1u << q);
      }
      psi(static_cast<Eigen::Index>(idx)) = 1.0;
      break;
    }
  }
  for (const Gate& g : c.gates) {
    Matrix u;
    const double angle =
        g.param_slot >= 0
            ? g.coeff * params[static_cast<std::size_t>(g.param_slot)]
            : *g.fixed_angle;
    switch (g.kind) {
      case GateKind::RX:
        u = exp_minus_i(single_qubit_op(c.n_qubits, g.targets[0], pauli_x()),
                        angle / 2.0);
        break;
      case GateKind::RY:
        u = exp_minus_i(single_qubit_op(c.n_qubits, g.targets[0], pauli_y()),
                        angle / 2.0);
        break;
      case GateKind::RZ:
        u = exp_minus_i(single_qubit_op(c.n_qubits, g.targets[0], pauli_z()),
                        angle / 2.0);
        break;
      case GateKind::ZPhase: {
        Matrix gen = single_qubit_op(c.n_qubits, g.targets[0], pauli_z());
        if (g.targets.size() == 2) {
          gen = gen * single_qubit_op(c.n_qubits, g.targets[1], pauli_z());
        }
        u = exp_minus_i(gen, angle);
        break;
      }
      case GateKind::XXPlusYY: {
        const Matrix gen =
            single_qubit_op(c.n_qubits, g.targets[0], pauli_x()) *
                single_qubit_op(c.n_qubits, g.targets[1], pauli_x()) +
            single_qubit_op(c.n_qubits, g.targets[0], pauli_y()) *
                single_qubit_op(c.n_qubits, g.targets[1], pauli_y());
        u = exp_minus_i(gen, angle);
        break;
      }
      case GateKind::CNOT: {
        u = Matrix::Zero(dim, dim);
        const std::size_t cbit = std::size_t{1} << g.targets[0];
        const std::size_t tbit = std::size_t{1} << g.targets[1];
        for (std::size_t i = 0; i < static_cast<std::size_t>(dim); ++i) {
          const std::size_t j = (i & cbit) ? (i ^ tbit) : i;
          u(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
        }
        break;
      }
    }
    psi = u * psi;
  }
  return psi;
}

}  // namespace

TEST(Simulator, EmptyCircuitAllZeros) {
  ParameterizedCircuit c;
  c.n_qubits = 2;
  c.initial_state = InitialStateSpec::all_zeros();
  const State s = run_circuit(c, {});
  EXPECT_NEAR(std::abs(s[0] - Complex(1, 0)), 0.0, 1e-15);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_NEAR(std::abs(s[i]), 0.0, 1e-15);
}

TEST(Simulator, RyPiFlipsQubit) {
  ParameterizedCircuit c;
  c.n_qubits = 1;
  c.n_params = 1;
  c.initial_state = InitialStateSpec::all_zeros();
  c.gates.push_back(Gate::ry(0, 0));
  const State s = run_circuit(c, {std::numbers::pi});
  EXPECT_NEAR(std::abs(s[0]), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(s[1] - Complex(1, 0)), 0.0, 1e-12);
}

TEST(Simulator, XXPlusYYPreservesHammingWeight) {
  ParameterizedCircuit c;
  c.n_qubits = 2;
  c.n_params = 1;
  c.initial_state = InitialStateSpec::basis({1, 0});  // |01> in qubit order
  c.gates.push_back(Gate::xx_plus_yy(0, 1, 0));
  const State s = run_circuit(c, {std::numbers::pi / 4.0});
  // Population stays on the single-excitation pair {01, 10}.
  EXPECT_NEAR(std::norm(s[0]), 0.0, 1e-12);
  EXPECT_NEAR(std::norm(s[3]), 0.0, 1e-12);
  EXPECT_NEAR(std::norm(s[1]) + std::norm(s[2]), 1.0, 1e-12);
  // Against the dense exponential oracle.
  const auto psi = oracle_run(c, {std::numbers::pi / 4.0});
  EXPECT_LT(oracles::state_distance_up_to_phase(psi, oracles::to_eigen(s)), 1e-12);
}

TEST(Simulator, RandomCircuitsMatchDenseOracle) {
  Rng rng(31337);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = rng.uniform_int(1, 4);
    const int n_params = rng.uniform_int(1, 4);
    const auto c = test_util::random_circuit(n, rng.uniform_int(4, 12), n_params, rng);
    const auto params = test_util::random_params(n_params, rng);
    const State s = run_circuit(c, params);
    const auto psi = oracle_run(c, params);
    EXPECT_LT(oracles::state_distance_up_to_phase(psi, oracles::to_eigen(s)), 1e-10)
        << "rep " << rep;
  }
}

TEST(Simulator, NormPreservedOnLongRandomCircuits) {
  Rng rng(777);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = rng.uniform_int(2, 6);
    const auto c = test_util::random_circuit(n, 60, 4, rng);
    const auto params = test_util::random_params(4, rng);
    const State s = run_circuit(c, params);
    double norm2 = 0.0;
    for (const auto& a : s) norm2 += std::norm(a);
    EXPECT_NEAR(norm2, 1.0, 1e-10);
  }
}

TEST(Simulator, ParamLengthMismatchRejected) {
  ParameterizedCircuit c;
  c.n_qubits = 1;
  c.n_params = 1;
  c.gates.push_back(Gate::rx(0, 0));
  EXPECT_THROW(run_circuit(c, {}), std::invalid_argument);
  EXPECT_THROW(run_circuit(c, {0.1, 0.2}), std::invalid_argument);
}

TEST(Simulator, WaveFunctionEnergyPlusStateZ) {
  ParameterizedCircuit c;
  c.n_qubits = 1;
  c.n_params = 0;
  c.initial_state = InitialStateSpec::uniform();
  PauliSum h(1);
  h.append(1.0, PauliString{{{0, PauliOp::Z}}});
  QpuCounter counter;
  const double e =
      evaluate_energy(c, {}, h, EnvironmentConfig::wave_function(1), counter);
  EXPECT_NEAR(e, 0.0, 1e-12);
  EXPECT_EQ(counter.energy_evals, 1);
  EXPECT_EQ(counter.circuit_executions, 1);
}

TEST(Simulator, SamplingPlusStateZStatistics) {
  // <Z> estimator on |+>: mean ~ 0, std ~ 1/sqrt(1024) over 200 repeats.
  ParameterizedCircuit c;
  c.n_qubits = 1;
  c.n_params = 0;
  c.initial_state = InitialStateSpec::uniform();
  PauliSum h(1);
  h.append(1.0, PauliString{{{0, PauliOp::Z}}});
  const EnvironmentConfig env = EnvironmentConfig::sampling(1024, 99);
  QpuCounter counter;
  double sum = 0.0, sum2 = 0.0;
  const int repeats = 200;
  for (int r = 0; r < repeats; ++r) {
    const double e = evaluate_energy(c, {}, h, env, counter);
    sum += e;
    sum2 += e * e;
  }
  const double mean = sum / repeats;
  const double stddev = std::sqrt(sum2 / repeats - mean * mean);
  const double expected_std = 1.0 / std::sqrt(1024.0);
  EXPECT_NEAR(mean, 0.0, 4.0 * expected_std / std::sqrt(repeats) + 1e-3);
  EXPECT_NEAR(stddev, expected_std, 0.25 * expected_std);
  EXPECT_EQ(counter.energy_evals, repeats);
}

TEST(Simulator, SamplingGroupCounts) {
  // Diagonal Hamiltonians need one measurement group, the Fermi-Hubbard
  // Hamiltonian three (XX, YY, and the commuting XZX/YZY pair).
  Rng rng(4);
  const Max2SatInstance m2s = generate_max2sat(rng);
  EXPECT_EQ(detail::measurement_group_count(max2sat_hamiltonian(m2s)), 1);
  FermiHubbardInstance fh{1.0, 0.8, -0.6};
  EXPECT_EQ(detail::measurement_group_count(fermi_hubbard_hamiltonian(fh)), 3);

  // Circuit execution accounting: one state prep per group per energy eval.
  const auto circuit = build_vqe_ansatz(1);
  const auto params = std::vector<double>(9, 0.3);
  QpuCounter counter;
  evaluate_energy(circuit, params, fermi_hubbard_hamiltonian(fh),
                  EnvironmentConfig::sampling(64, 5), counter);
  EXPECT_EQ(counter.energy_evals, 1);
  EXPECT_EQ(counter.circuit_executions, 3);
}

TEST(Simulator, SamplingUnbiasedAgainstWaveFunction) {
  Rng rng(12);
  FermiHubbardInstance fh{1.4, -1.1, 0.7};
  const PauliSum h = fermi_hubbard_hamiltonian(fh);
  const auto circuit = build_vqe_ansatz(2);
  const auto params = test_util::random_params(18, rng);
  QpuCounter counter;
  const double exact = evaluate_energy(circuit, params, h,
                                       EnvironmentConfig::wave_function(0), counter);
  const EnvironmentConfig env = EnvironmentConfig::sampling(1024, 321);
  const int repeats = 200;
  double sum = 0.0;
  for (int r = 0; r < repeats; ++r) {
    sum += evaluate_energy(circuit, params, h, env, counter);
  }
  const double mean = sum / repeats;
  // Standard error ~ spectral-width / sqrt(repeats * shots).
  EXPECT_NEAR(mean, exact, 0.05);
}

TEST(Simulator, NoisyFixedRyGivesGaussianCosineMoment) {
  // |0> prepared via fixed RY(0) under sigma = 0.1 noise:
  // E[<Z>] = E[cos eps] = exp(-sigma^2/2) ~= 0.9950.
  ParameterizedCircuit c;
  c.n_qubits = 1;
  c.n_params = 0;
  c.initial_state = InitialStateSpec::all_zeros();
  c.gates.push_back(Gate::ry_fixed(0, 0.0));
  PauliSum h(1);
  h.append(1.0, PauliString{{{0, PauliOp::Z}}});
  const EnvironmentConfig env = EnvironmentConfig::noisy(0.1, 2718);
  QpuCounter counter;
  double sum = 0.0;
  const int repeats = 10000;
  for (int r = 0; r < repeats; ++r) {
    sum += evaluate_energy(c, {}, h, env, counter);
  }
  EXPECT_NEAR(sum / repeats, std::exp(-0.005), 0.001);
}

TEST(Simulator, DeterminismAcrossReruns) {
  Rng rng(55);
  const auto c = test_util::random_circuit(3, 10, 2, rng);
  const auto params = test_util::random_params(2, rng);
  PauliSum h(3);
  h.append(0.7, PauliString{{{0, PauliOp::Z}, {2, PauliOp::Z}}});
  h.append(-0.4, PauliString{{{1, PauliOp::X}}});
  for (EnvMode mode : {EnvMode::WaveFunction, EnvMode::Sampling, EnvMode::Noisy}) {
    EnvironmentConfig env;
    env.mode = mode;
    env.shots = 128;
    env.sigma = 0.1;
    env.seed = 42;
    QpuCounter c1, c2;
    std::vector<double> first, second;
    for (int k = 0; k < 3; ++k) first.push_back(evaluate_energy(c, params, h, env, c1));
    for (int k = 0; k < 3; ++k) second.push_back(evaluate_energy(c, params, h, env, c2));
    EXPECT_EQ(first, second);
  }
  const auto s1 = sample_bitstrings(c, params, 50, 9);
  const auto s2 = sample_bitstrings(c, params, 50, 9);
  EXPECT_EQ(s1, s2);
}

TEST(Simulator, SampleBitstringsBasisState) {
  ParameterizedCircuit c;
  c.n_qubits = 2;
  c.n_params = 0;
  c.initial_state = InitialStateSpec::basis({1, 0});
  const auto samples = sample_bitstrings(c, {}, 25, 1);
  for (const auto& s : samples) EXPECT_EQ(s, "10");
}

TEST(Simulator, SampleBitstringsPlusStateFrequencies) {
  ParameterizedCircuit c;
  c.n_qubits = 1;
  c.n_params = 0;
  c.initial_state = InitialStateSpec::uniform();
  const auto samples = sample_bitstrings(c, {}, 10000, 7);
  const double zeros = static_cast<double>(
      std::count(samples.begin(), samples.end(), std::string("0")));
  const double freq = zeros / 10000.0;
  EXPECT_GE(freq, 0.485);
  EXPECT_LE(freq, 0.515);
}

TEST(Simulator, PerturbParametersRules) {
  // VQE ansatz: all slots feed single-qubit rotations -> all perturbed.
  const auto vqe = build_vqe_ansatz(1);
  std::vector<double> params(9, 0.25);
  {
    Rng rng(3);
    const auto out = perturb_parameters(vqe, params, 0.0, rng);
    EXPECT_EQ(out, params);
  }
  {
    Rng rng(3);
    const auto out = perturb_parameters(vqe, params, 0.1, rng);
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NE(out[i], params[i]);
  }
  // Slot bound only to XXPlusYY mixers stays unchanged.
  ParameterizedCircuit mixer;
  mixer.n_qubits = 4;
  mixer.n_params = 1;
  mixer.initial_state = InitialStateSpec::basis({1, 1, 0, 0});
  for (int j = 0; j < 4; ++j) {
    mixer.gates.push_back(Gate::xx_plus_yy(j, (j + 1) % 4, 0));
  }
  mixer.validate();
  Rng rng(3);
  const auto out = perturb_parameters(mixer, {0.7}, 0.1, rng);
  EXPECT_EQ(out[0], 0.7);
}

TEST(Simulator, PerturbParametersGaussianStats) {
  const auto vqe = build_vqe_ansatz(1);
  std::vector<double> params(9, 0.0);
  Rng rng(11);
  std::vector<double> sum(9, 0.0), sum2(9, 0.0);
  const int draws = 100000;
  for (int r = 0; r < draws; ++r) {
    const auto out = perturb_parameters(vqe, params, 0.1, rng);
    for (int i = 0; i < 9; ++i) {
      sum[static_cast<std::size_t>(i)] += out[static_cast<std::size_t>(i)];
      sum2[static_cast<std::size_t>(i)] +=
          out[static_cast<std::size_t>(i)] * out[static_cast<std::size_t>(i)];
    }
  }
  for (int i = 0; i < 9; ++i) {
    const double mean = sum[static_cast<std::size_t>(i)] / draws;
    const double stddev =
        std::sqrt(sum2[static_cast<std::size_t>(i)] / draws - mean * mean);
    EXPECT_GE(stddev, 0.098);
    EXPECT_LE(stddev, 0.102);
  }
}

TEST(Simulator, FidelityCalibration) {
  EXPECT_DOUBLE_EQ(fidelity_vs_sigma(0.0, 1000, 1), 1.0);
  const double f01 = fidelity_vs_sigma(0.1, 100000, 1);
  EXPECT_GE(f01, 0.985);
  EXPECT_LE(f01, 0.995);
  const double f02 = fidelity_vs_sigma(0.2, 100000, 1);
  EXPECT_LT(f02, f01);
}

TEST(Simulator, NonpositiveShotsRejected) {
  ParameterizedCircuit c;
  c.n_qubits = 1;
  c.n_params = 0;
  PauliSum h(1);
  h.append(1.0, PauliString{{{0, PauliOp::Z}}});
  EnvironmentConfig env = EnvironmentConfig::sampling(0, 1);
  QpuCounter counter;
  EXPECT_THROW(evaluate_energy(c, {}, h, env, counter), std::invalid_argument);
}

#include "vqbench/pauli.hpp"

#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vqbench/problems.hpp"
#include "vqbench/rng.hpp"

using namespace vqbench;

namespace {

State random_unit_state(int n_qubits, Rng& rng) {
  State s(std::size_t{1} << n_qubits);
  double norm2 = 0.0;
  for (auto& a : s) {
    a = Complex(rng.normal(0.0, 1.0), rng.normal(0.0, 1.0));
    norm2 += std::norm(a);
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& a : s) a *= inv;
  return s;
}

PauliSum random_three_term_sum(int n_qubits, Rng& rng) {
  PauliSum h(n_qubits);
  for (int t = 0; t < 3; ++t) {
    PauliString ps;
    const int weight = rng.uniform_int(0, std::min(2, n_qubits));
    while (static_cast<int>(ps.ops.size()) < weight) {
      const int q = rng.uniform_int(0, n_qubits - 1);
      const int letter = rng.uniform_int(0, 2);
      ps.ops[q] = letter == 0 ? PauliOp::X : (letter == 1 ? PauliOp::Y : PauliOp::Z);
    }
    h.append(rng.uniform(-2.0, 2.0), ps);
  }
  return h;
}

}  // namespace

TEST(Pauli, ZeroStateZExpectation) {
  PauliSum h(1);
  h.append(1.0, PauliString{{{0, PauliOp::Z}}});
  State zero{Complex(1, 0), Complex(0, 0)};
  EXPECT_DOUBLE_EQ(expectation(zero, h), 1.0);
}

TEST(Pauli, BellStateXXPlusYYExpectation) {
  // (|01> + |10>)/sqrt(2) against (X0X1 + Y0Y1)/2: dense oracle gives +1.
  PauliSum h(2);
  h.append(0.5, PauliString{{{0, PauliOp::X}, {1, PauliOp::X}}});
  h.append(0.5, PauliString{{{0, PauliOp::Y}, {1, PauliOp::Y}}});
  const double inv = 1.0 / std::sqrt(2.0);
  State bell{Complex(0, 0), Complex(inv, 0), Complex(inv, 0), Complex(0, 0)};
  const double oracle =
      oracles::expectation(oracles::to_eigen(bell), oracles::pauli_sum_matrix(h));
  EXPECT_NEAR(oracle, 1.0, 1e-12);
  EXPECT_NEAR(expectation(bell, h), 1.0, 1e-10);
}

TEST(Pauli, IdentityCoefficient) {
  PauliSum h(2);
  h.append(3.5, PauliString{});
  State plus(4, Complex(0.5, 0.0));
  EXPECT_NEAR(expectation(plus, h), 3.5, 1e-12);
}

TEST(Pauli, ExpectationMatchesDenseOracleOnRandomInputs) {
  Rng rng(2024);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = rng.uniform_int(1, 4);
    const PauliSum h = random_three_term_sum(n, rng);
    const State s = random_unit_state(n, rng);
    const double oracle =
        oracles::expectation(oracles::to_eigen(s), oracles::pauli_sum_matrix(h));
    EXPECT_NEAR(expectation(s, h), oracle, 1e-10);
  }
}

TEST(Pauli, ExpectationRejectsBadInputs) {
  PauliSum h(2);
  h.append(1.0, PauliString{{{0, PauliOp::Z}}});
  State wrong_dim(2, Complex(1, 0));
  EXPECT_THROW(expectation(wrong_dim, h), std::invalid_argument);
  State unnormalized(4, Complex(1.0, 0.0));
  EXPECT_THROW(expectation(unnormalized, h), std::invalid_argument);
}

TEST(Pauli, ExpectationLinearInHamiltonian) {
  Rng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 3;
    const PauliSum h1 = random_three_term_sum(n, rng);
    const PauliSum h2 = random_three_term_sum(n, rng);
    const double a = rng.uniform(-2.0, 2.0);
    const double b = rng.uniform(-2.0, 2.0);
    PauliSum combo(n);
    for (const auto& t : h1.terms) combo.append(a * t.coeff, t.paulis);
    for (const auto& t : h2.terms) combo.append(b * t.coeff, t.paulis);
    const State s = random_unit_state(n, rng);
    EXPECT_NEAR(expectation(s, combo),
                a * expectation(s, h1) + b * expectation(s, h2), 1e-10);
  }
}

TEST(Pauli, MinEigenpairFermiHubbardSingleCoupling) {
  // t12 = 1, others 0: ground energy -1, ground state (|01> - |10>)/sqrt(2)
  // on the first two qubits.
  FermiHubbardInstance inst{1.0, 0.0, 0.0};
  const PauliSum h = fermi_hubbard_hamiltonian(inst);
  const EigenPair pair = min_eigenpair(h);
  EXPECT_NEAR(pair.energy, -1.0, 1e-10);
  EXPECT_NEAR(expectation(pair.ground_state, h), -1.0, 1e-10);
  // Oracle eigenvalue for cross-checking.
  Eigen::SelfAdjointEigenSolver<oracles::Matrix> solver(
      oracles::pauli_sum_matrix(h));
  EXPECT_NEAR(solver.eigenvalues()(0), -1.0, 1e-12);
}

TEST(Pauli, MinEigenpairZeroHamiltonian) {
  FermiHubbardInstance inst{0.0, 0.0, 0.0};
  const PauliSum h = fermi_hubbard_hamiltonian(inst);
  EXPECT_NEAR(min_eigenpair(h).energy, 0.0, 1e-12);
  EXPECT_NEAR(max_eigenvalue(h), 0.0, 1e-12);
}

TEST(Pauli, SingleClauseEigenBounds) {
  // One clause (x1 or x2) padded to 8 qubits: 3/4 assignments satisfy -> min 0,
  // one violates -> max 1. Enumeration oracle over the diagonal.
  Max2SatInstance inst;
  inst.clauses.push_back({{1, +1}, {2, +1}});
  PauliSum h(8);
  {
    const Clause& c = inst.clauses[0];
    h.add(0.25, PauliString{});
    h.add(0.25, PauliString{{{c.a.var, PauliOp::Z}}});
    h.add(0.25, PauliString{{{c.b.var, PauliOp::Z}}});
    h.add(0.25, PauliString{{{c.a.var, PauliOp::Z}, {c.b.var, PauliOp::Z}}});
  }
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < 256; ++i) {
    const double v = diagonal_value(h, i);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_NEAR(lo, 0.0, 1e-12);
  EXPECT_NEAR(hi, 1.0, 1e-12);
  EXPECT_NEAR(min_eigenpair(h).energy, 0.0, 1e-12);
  EXPECT_NEAR(max_eigenvalue(h), 1.0, 1e-12);
}

TEST(Pauli, FourCycleCutMaxEigenvalue) {
  // (1 - Z_i Z_j)/2 over a 4-cycle: alternating partition cuts all 4 edges.
  GraphBisectionInstance inst;
  inst.n_nodes = 4;
  inst.edges = {{0, 1}, {1, 2}, {2, 3}, {0, 3}};
  inst.init_string = {1, 1, 0, 0};
  PauliSum h(4);
  for (const auto& [u, v] : inst.edges) {
    h.add(0.5, PauliString{});
    h.add(-0.5, PauliString{{{u, PauliOp::Z}, {v, PauliOp::Z}}});
  }
  EXPECT_NEAR(max_eigenvalue(h), 4.0, 1e-12);
}

TEST(Pauli, EigenBoundsBracketRandomStates) {
  Rng rng(99);
  FermiHubbardInstance inst{1.3, -0.7, 0.4};
  const PauliSum h = fermi_hubbard_hamiltonian(inst);
  const double lo = min_eigenpair(h).energy;
  const double hi = max_eigenvalue(h);
  for (int rep = 0; rep < 100; ++rep) {
    const State s = random_unit_state(3, rng);
    const double e = expectation(s, h);
    EXPECT_GE(e, lo - 1e-10);
    EXPECT_LE(e, hi + 1e-10);
  }
}

TEST(Pauli, DiagonalMinMatchesBasisScan) {
  Rng rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    const Max2SatInstance inst = generate_max2sat(rng);
    const PauliSum h = max2sat_hamiltonian(inst);
    double best = 1e300;
    for (std::size_t i = 0; i < 256; ++i) {
      State basis(256, Complex(0, 0));
      basis[i] = Complex(1, 0);
      best = std::min(best, expectation(basis, h));
    }
    EXPECT_NEAR(min_eigenpair(h).energy, best, 1e-10);
  }
}

TEST(Pauli, DenseLimitEnforced) {
  PauliSum h(11);
  h.append(1.0, PauliString{{{0, PauliOp::Z}}});
  EXPECT_THROW(min_eigenpair(h), std::invalid_argument);
  EXPECT_THROW(max_eigenvalue(h), std::invalid_argument);
}

TEST(Pauli, JsonRoundTrip) {
  PauliSum h(4);
  h.append(0.25, PauliString{});
  h.append(-1.5, PauliString{{{0, PauliOp::Z}, {3, PauliOp::X}}});
  h.append(0.125, PauliString{{{2, PauliOp::Y}}});
  const PauliSum back = pauli_sum_from_json(pauli_sum_to_json(h));
  ASSERT_EQ(back.n_qubits, h.n_qubits);
  ASSERT_EQ(back.terms.size(), h.terms.size());
  for (std::size_t i = 0; i < h.terms.size(); ++i) {
    EXPECT_EQ(back.terms[i].coeff, h.terms[i].coeff);
    EXPECT_TRUE(back.terms[i].paulis == h.terms[i].paulis);
  }
}

// Test-only dense linear-algebra oracles, independent of the simulator's
// gate kernels: operators are assembled from explicit 2x2 matrices via
// Kronecker products and exponentiated through Hermitian eigendecomposition.
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "vqbench/pauli.hpp"

namespace oracles {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline Matrix identity2() { return Matrix::Identity(2, 2); }

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Operator embedding with qubit 0 as the LEAST significant bit of the basis
// index: full = op_{n-1} (x) ... (x) op_1 (x) op_0.
inline Matrix embed(const std::vector<Matrix>& per_qubit_ops) {
  Matrix out = per_qubit_ops.back();
  for (std::size_t q = per_qubit_ops.size() - 1; q-- > 0;) {
    out = kron(out, per_qubit_ops[q]);
  }
  return out;
}

inline Matrix single_qubit_op(int n_qubits, int qubit, const Matrix& op) {
  std::vector<Matrix> ops(static_cast<std::size_t>(n_qubits), identity2());
  ops[static_cast<std::size_t>(qubit)] = op;
  return embed(ops);
}

inline Matrix pauli_string_matrix(const vqbench::PauliString& ps, int n_qubits) {
  std::vector<Matrix> ops(static_cast<std::size_t>(n_qubits), identity2());
  for (const auto& [q, op] : ps.ops) {
    switch (op) {
      case vqbench::PauliOp::X: ops[static_cast<std::size_t>(q)] = pauli_x(); break;
      case vqbench::PauliOp::Y: ops[static_cast<std::size_t>(q)] = pauli_y(); break;
      case vqbench::PauliOp::Z: ops[static_cast<std::size_t>(q)] = pauli_z(); break;
    }
  }
  return embed(ops);
}

inline Matrix pauli_sum_matrix(const vqbench::PauliSum& h) {
  const Eigen::Index dim = Eigen::Index(1) << h.n_qubits;
  Matrix out = Matrix::Zero(dim, dim);
  for (const auto& t : h.terms) {
    out += t.coeff * pauli_string_matrix(t.paulis, h.n_qubits);
  }
  return out;
}

// exp(-i angle H) for Hermitian H, via eigendecomposition.
inline Matrix exp_minus_i(const Matrix& hermitian, double angle) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
  const Eigen::Index n = hermitian.rows();
  Matrix phases = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    phases(i, i) = std::polar(1.0, -angle * solver.eigenvalues()(i));
  }
  return solver.eigenvectors() * phases * solver.eigenvectors().adjoint();
}

inline Vector to_eigen(const vqbench::State& s) {
  Vector v(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) v(static_cast<Eigen::Index>(i)) = s[i];
  return v;
}

inline double expectation(const Vector& psi, const Matrix& h) {
  const Complex val = psi.adjoint() * h * psi;
  return val.real();
}

// Largest |amplitude difference| up to a global phase.
inline double state_distance_up_to_phase(const Vector& a, const Vector& b) {
  const Complex overlap = a.adjoint() * b;
  const double mag = std::abs(overlap);
  const Complex phase = mag > 1e-14 ? overlap / mag : Complex(1.0, 0.0);
  return (a * phase - b).cwiseAbs().maxCoeff();
}

}  // namespace oracles

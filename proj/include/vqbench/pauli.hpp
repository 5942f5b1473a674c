#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace vqbench {

using Complex = std::complex<double>;
using State = std::vector<Complex>;
using Json = nlohmann::ordered_json;

enum class PauliOp : std::uint8_t { X, Y, Z };

inline char pauli_op_char(PauliOp op) {
  switch (op) {
    case PauliOp::X: return 'X';
    case PauliOp::Y: return 'Y';
    case PauliOp::Z: return 'Z';
  }
  return '?';
}

inline PauliOp pauli_op_from_char(char c) {
  switch (c) {
    case 'X': return PauliOp::X;
    case 'Y': return PauliOp::Y;
    case 'Z': return PauliOp::Z;
    default: throw std::invalid_argument("unknown Pauli letter");
  }
}

// Sparse Pauli string: qubit index -> letter, identity elsewhere.
// Problem Hamiltonians here have weight <= 3, so a map beats a letter array.
struct PauliString {
  std::map<int, PauliOp> ops;

  bool is_identity() const { return ops.empty(); }

  bool is_diagonal() const {
    for (const auto& [q, op] : ops) {
      if (op != PauliOp::Z) return false;
    }
    return true;
  }

  bool operator==(const PauliString& other) const { return ops == other.ops; }
  bool operator<(const PauliString& other) const { return ops < other.ops; }
};

struct PauliTerm {
  double coeff = 0.0;
  PauliString paulis;
};

// Real-coefficient sum of Pauli strings on a fixed qubit register.
struct PauliSum {
  int n_qubits = 0;
  std::vector<PauliTerm> terms;

  explicit PauliSum(int n = 0) : n_qubits(n) {}

  // Appends verbatim, keeping duplicates and zero coefficients.
  void append(double coeff, PauliString ps) {
    check_string(ps);
    terms.push_back({coeff, std::move(ps)});
  }

  // Adds with like-term combination; terms cancelling below 1e-12 are erased.
  void add(double coeff, PauliString ps) {
    check_string(ps);
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (terms[i].paulis == ps) {
        terms[i].coeff += coeff;
        if (std::abs(terms[i].coeff) < 1e-12) {
          terms.erase(terms.begin() + static_cast<std::ptrdiff_t>(i));
        }
        return;
      }
    }
    if (std::abs(coeff) >= 1e-12) {
      terms.push_back({coeff, std::move(ps)});
    }
  }

  bool is_diagonal() const {
    for (const auto& t : terms) {
      if (!t.paulis.is_diagonal()) return false;
    }
    return true;
  }

  // Sum of identity-term coefficients.
  double constant_offset() const {
    double c = 0.0;
    for (const auto& t : terms) {
      if (t.paulis.is_identity()) c += t.coeff;
    }
    return c;
  }

  std::size_t dim() const { return std::size_t{1} << n_qubits; }

 private:
  void check_string(const PauliString& ps) const {
    for (const auto& [q, op] : ps.ops) {
      (void)op;
      if (q < 0 || q >= n_qubits) {
        throw std::invalid_argument("Pauli qubit index out of range");
      }
    }
  }
};

namespace detail {

// Action of a Pauli string on basis state |i>: P|i> = phase * |j>.
struct BasisAction {
  std::size_t flip_mask = 0;
  // phase as one of {1, i, -1, -i} times sign contributions; computed per index.
};

// For basis index i, returns (j, phase) with P|i> = phase |j>.
inline void pauli_basis_action(const PauliString& ps, std::size_t i,
                               std::size_t& j, Complex& phase) {
  j = i;
  phase = Complex(1.0, 0.0);
  for (const auto& [q, op] : ps.ops) {
    const std::size_t bit = (i >> q) & 1u;
    switch (op) {
      case PauliOp::X:
        j ^= (std::size_t{1} << q);
        break;
      case PauliOp::Y:
        j ^= (std::size_t{1} << q);
        // Y|0> = i|1>, Y|1> = -i|0>
        phase *= bit == 0 ? Complex(0.0, 1.0) : Complex(0.0, -1.0);
        break;
      case PauliOp::Z:
        if (bit == 1) phase = -phase;
        break;
    }
  }
}

// Diagonal value <i|P|i> for a Z-only string (+-1).
inline double diagonal_sign(const PauliString& ps, std::size_t i) {
  double s = 1.0;
  for (const auto& [q, op] : ps.ops) {
    (void)op;
    if ((i >> q) & 1u) s = -s;
  }
  return s;
}

}  // namespace detail

// <i|H|i> for diagonal H (valid for arbitrary H only when H is diagonal).
inline double diagonal_value(const PauliSum& h, std::size_t basis_index) {
  double v = 0.0;
  for (const auto& t : h.terms) {
    v += t.coeff * detail::diagonal_sign(t.paulis, basis_index);
  }
  return v;
}

// <psi|H|psi> for a unit-norm dense state. Term-by-term, O(terms * 2^n);
// no matrix is materialized.
inline double expectation(const State& state, const PauliSum& h) {
  const std::size_t dim = h.dim();
  if (state.size() != dim) {
    throw std::invalid_argument("state dimension does not match Hamiltonian");
  }
  double norm2 = 0.0;
  for (const Complex& a : state) norm2 += std::norm(a);
  if (std::abs(norm2 - 1.0) > 1e-10) {
    throw std::invalid_argument("state is not normalized");
  }
  Complex acc(0.0, 0.0);
  for (const auto& t : h.terms) {
    Complex term_acc(0.0, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      std::size_t j;
      Complex phase;
      detail::pauli_basis_action(t.paulis, i, j, phase);
      term_acc += std::conj(state[j]) * phase * state[i];
    }
    acc += t.coeff * term_acc;
  }
  if (std::abs(acc.imag()) >= 1e-10) {
    throw std::runtime_error("expectation has non-negligible imaginary part");
  }
  return acc.real();
}

namespace detail {

inline Eigen::MatrixXcd dense_matrix(const PauliSum& h) {
  const std::size_t dim = h.dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  for (const auto& t : h.terms) {
    for (std::size_t i = 0; i < dim; ++i) {
      std::size_t j;
      Complex phase;
      pauli_basis_action(t.paulis, i, j, phase);
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) +=
          t.coeff * phase;
    }
  }
  return m;
}

inline void check_dense_ok(const PauliSum& h) {
  if (h.n_qubits > 10) {
    throw std::invalid_argument("dense diagonalization limited to <= 10 qubits");
  }
  if (h.n_qubits < 1) {
    throw std::invalid_argument("Hamiltonian has no qubits");
  }
}

}  // namespace detail

struct EigenPair {
  double energy = 0.0;
  State ground_state;
};

// Smallest eigenvalue and a unit eigenvector. Diagonal sums are scanned over
// basis states; anything else goes through a dense Hermitian solve.
inline EigenPair min_eigenpair(const PauliSum& h) {
  detail::check_dense_ok(h);
  const std::size_t dim = h.dim();
  if (h.is_diagonal()) {
    std::size_t best = 0;
    double best_v = diagonal_value(h, 0);
    for (std::size_t i = 1; i < dim; ++i) {
      const double v = diagonal_value(h, i);
      if (v < best_v) {
        best_v = v;
        best = i;
      }
    }
    State gs(dim, Complex(0.0, 0.0));
    gs[best] = Complex(1.0, 0.0);
    return {best_v, std::move(gs)};
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(detail::dense_matrix(h));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }
  const Eigen::VectorXcd v = solver.eigenvectors().col(0);
  State gs(dim);
  for (std::size_t i = 0; i < dim; ++i) gs[i] = v(static_cast<Eigen::Index>(i));
  return {solver.eigenvalues()(0), std::move(gs)};
}

inline double max_eigenvalue(const PauliSum& h) {
  detail::check_dense_ok(h);
  const std::size_t dim = h.dim();
  if (h.is_diagonal()) {
    double best_v = diagonal_value(h, 0);
    for (std::size_t i = 1; i < dim; ++i) {
      best_v = std::max(best_v, diagonal_value(h, i));
    }
    return best_v;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(detail::dense_matrix(h));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }
  return solver.eigenvalues()(static_cast<Eigen::Index>(dim) - 1);
}

inline Json pauli_sum_to_json(const PauliSum& h) {
  Json terms = Json::array();
  for (const auto& t : h.terms) {
    Json ops = Json::object();
    for (const auto& [q, op] : t.paulis.ops) {
      ops[std::to_string(q)] = std::string(1, pauli_op_char(op));
    }
    terms.push_back(Json{{"coeff", t.coeff}, {"ops", std::move(ops)}});
  }
  return Json{{"n_qubits", h.n_qubits}, {"terms", std::move(terms)}};
}

inline PauliSum pauli_sum_from_json(const Json& j) {
  PauliSum h(j.at("n_qubits").get<int>());
  for (const auto& jt : j.at("terms")) {
    PauliString ps;
    for (const auto& [key, val] : jt.at("ops").items()) {
      ps.ops[std::stoi(key)] = pauli_op_from_char(val.get<std::string>().at(0));
    }
    h.append(jt.at("coeff").get<double>(), std::move(ps));
  }
  return h;
}

}  // namespace vqbench

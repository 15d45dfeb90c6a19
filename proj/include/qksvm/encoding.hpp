#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qksvm/pauli.hpp"
#include "qksvm/statevector.hpp"

namespace qksvm::qsim {

// Defines the data encoding unitary U(x) = (prod_j e^{-i x_j P_j t/s})^s and
// hence the quantum feature map x -> U(x)|0^n>.
struct EncodingSpec {
  std::size_t num_qubits;
  std::vector<PauliString> paulis;
  double evolution_time;   // t > 0
  std::size_t trotter_steps;  // s >= 1

  EncodingSpec(std::size_t n, std::vector<PauliString> p, double t, std::size_t s)
      : num_qubits(n), paulis(std::move(p)), evolution_time(t), trotter_steps(s) {
    if (n < 1) throw std::invalid_argument("EncodingSpec: need n >= 1");
    if (paulis.empty()) throw std::invalid_argument("EncodingSpec: need d >= 1");
    if (!(t > 0.0) || !std::isfinite(t))
      throw std::invalid_argument("EncodingSpec: need t > 0");
    if (s < 1) throw std::invalid_argument("EncodingSpec: need s >= 1");
    for (const PauliString& ps : paulis)
      if (ps.num_qubits() != n)
        throw std::invalid_argument("EncodingSpec: Pauli string length != n");
  }

  std::size_t dim() const { return paulis.size(); }
  bool all_commuting() const {
    for (std::size_t a = 0; a < paulis.size(); ++a)
      for (std::size_t b = a + 1; b < paulis.size(); ++b)
        if (!paulis[a].commutes_with(paulis[b])) return false;
    return true;
  }
};

namespace detail {

inline void check_input(std::span<const double> x, const EncodingSpec& spec,
                        const char* who) {
  if (x.size() != spec.dim())
    throw std::invalid_argument(std::string(who) + ": input length != d");
  for (double v : x)
    if (!std::isfinite(v))
      throw std::invalid_argument(std::string(who) + ": non-finite component");
}

constexpr std::size_t kDenseQubitCap = 10;

}  // namespace detail

// U(x)|0^n> via the first-order product formula: within each of the s
// repetitions the factors are applied in ascending j (j = 1 acts first).
inline StateVector encode(std::span<const double> x, const EncodingSpec& spec) {
  detail::check_input(x, spec, "encode");
  StateVector state = StateVector::zero_state(spec.num_qubits);
  const double step = spec.evolution_time / static_cast<double>(spec.trotter_steps);
  for (std::size_t rep = 0; rep < spec.trotter_steps; ++rep)
    for (std::size_t j = 0; j < spec.dim(); ++j)
      state = apply_pauli_exponential(state, spec.paulis[j], x[j] * step);
  return state;
}

// Dense 2^n x 2^n matrix of H(x) = sum_j x_j P_j.
inline Eigen::MatrixXcd dense_hamiltonian(std::span<const double> x,
                                          const EncodingSpec& spec) {
  detail::check_input(x, spec, "dense_hamiltonian");
  if (spec.num_qubits > detail::kDenseQubitCap)
    throw std::invalid_argument("dense_hamiltonian: n exceeds dense limit of 10");
  const std::size_t dim = std::size_t{1} << spec.num_qubits;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t j = 0; j < spec.dim(); ++j) {
    const PauliString& p = spec.paulis[j];
    for (std::uint64_t col = 0; col < dim; ++col)
      h(col ^ p.x_mask(), col) += x[j] * detail::basis_phase(p, col);
  }
  return h;
}

// e^{-i H(x) t} |0^n> by eigendecomposition; the s -> infinity reference for
// encode().
inline StateVector exact_evolution(std::span<const double> x,
                                   const EncodingSpec& spec) {
  if (spec.num_qubits > detail::kDenseQubitCap)
    throw std::invalid_argument("exact_evolution: n exceeds dense limit of 10");
  const Eigen::MatrixXcd h = dense_hamiltonian(x, spec);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("exact_evolution: eigendecomposition failed");
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  const std::size_t dim = std::size_t{1} << spec.num_qubits;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
  for (Eigen::Index k = 0; k < vals.size(); ++k) {
    const Complex phase = std::exp(Complex{0.0, -vals[k] * spec.evolution_time});
    // column k applied to |0^n>: coefficient is conj(vecs(0, k)).
    out += phase * std::conj(vecs(0, k)) * vecs.col(k);
  }
  std::vector<Complex> amps(out.data(), out.data() + out.size());
  return StateVector(std::move(amps));
}

namespace detail {

inline double clamp_kernel(double k) {
  if (k < 0.0) {
    if (k < -1e-12) throw std::runtime_error("kernel value below 0 beyond tolerance");
    return 0.0;
  }
  if (k > 1.0) {
    if (k > 1.0 + 1e-12) throw std::runtime_error("kernel value above 1 beyond tolerance");
    return 1.0;
  }
  return k;
}

}  // namespace detail

// |<0^n| U^dag(x) U(x') |0^n>|^2, in [0, 1].
inline double kernel_value(std::span<const double> x, std::span<const double> x2,
                           const EncodingSpec& spec) {
  detail::check_input(x, spec, "kernel_value");
  detail::check_input(x2, spec, "kernel_value");
  return detail::clamp_kernel(fidelity(encode(x, spec), encode(x2, spec)));
}

// Tr[rho(x) rho(x')] via dense density matrices; test oracle for kernel_value.
inline double kernel_via_density(std::span<const double> x,
                                 std::span<const double> x2,
                                 const EncodingSpec& spec) {
  if (spec.num_qubits > detail::kDenseQubitCap)
    throw std::invalid_argument("kernel_via_density: n exceeds dense limit of 10");
  const StateVector a = encode(x, spec);
  const StateVector b = encode(x2, spec);
  const std::size_t dim = a.dim();
  Eigen::Map<const Eigen::VectorXcd> va(a.amplitudes().data(), dim);
  Eigen::Map<const Eigen::VectorXcd> vb(b.amplitudes().data(), dim);
  const Eigen::MatrixXcd rho_a = va * va.adjoint();
  const Eigen::MatrixXcd rho_b = vb * vb.adjoint();
  return detail::clamp_kernel((rho_a * rho_b).trace().real());
}

// <0^n| H(x) |0^n> in closed form: a Pauli string contributes 1 iff every
// symbol is I or Z.
inline double hamiltonian_expectation_zero(std::span<const double> x,
                                           const EncodingSpec& spec) {
  detail::check_input(x, spec, "hamiltonian_expectation_zero");
  double acc = 0.0;
  for (std::size_t j = 0; j < spec.dim(); ++j)
    if (spec.paulis[j].is_diagonal()) acc += x[j];
  return acc;
}

}  // namespace qksvm::qsim

#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qksvm/pauli.hpp"

namespace qksvm::qsim {

using Complex = std::complex<double>;

// 2^n complex amplitudes of a pure n-qubit state; unit norm by construction.
class StateVector {
 public:
  explicit StateVector(std::vector<Complex> amplitudes)
      : amps_(std::move(amplitudes)) {
    if (amps_.empty() || !std::has_single_bit(amps_.size()))
      throw std::invalid_argument("StateVector: dimension must be a power of two");
  }

  // |0^n>: amplitude 1 at index 0.
  static StateVector zero_state(std::size_t num_qubits) {
    if (num_qubits == 0 || num_qubits > 63)
      throw std::invalid_argument("StateVector: qubit count out of range");
    std::vector<Complex> amps(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
    amps[0] = Complex{1.0, 0.0};
    return StateVector(std::move(amps));
  }

  std::size_t dim() const { return amps_.size(); }
  std::size_t num_qubits() const {
    return static_cast<std::size_t>(std::countr_zero(amps_.size()));
  }
  const std::vector<Complex>& amplitudes() const { return amps_; }
  Complex amplitude(std::size_t i) const { return amps_.at(i); }

  double norm() const {
    double s = 0.0;
    for (const Complex& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

 private:
  friend StateVector apply_pauli_string(const StateVector&, const PauliString&);
  friend StateVector apply_pauli_exponential(const StateVector&, const PauliString&, double);
  std::vector<Complex> amps_;
};

inline Complex inner_product(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("inner_product: dimension mismatch");
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i)
    acc += std::conj(a.amplitude(i)) * b.amplitude(i);
  return acc;
}

// |<a|b>|^2
inline double fidelity(const StateVector& a, const StateVector& b) {
  return std::norm(inner_product(a, b));
}

namespace detail {

// Phase picked up by P acting on basis state |i>: P|i> = phase(i) |i ^ x_mask>,
// phase(i) = i^{#Y} * (-1)^{popcount(i & z_mask)}.
inline Complex basis_phase(const PauliString& p, std::uint64_t index) {
  static constexpr Complex kI_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  Complex phase = kI_pow[p.y_count() % 4];
  if (std::popcount(index & p.z_mask()) % 2 != 0) phase = -phase;
  return phase;
}

}  // namespace detail

// P|psi> without materializing the dense operator.
inline StateVector apply_pauli_string(const StateVector& state, const PauliString& p) {
  if (state.dim() != (std::size_t{1} << p.num_qubits()))
    throw std::invalid_argument("apply_pauli_string: dimension mismatch");
  std::vector<Complex> out(state.dim());
  const std::uint64_t x = p.x_mask();
  for (std::uint64_t i = 0; i < state.dim(); ++i)
    out[i ^ x] = detail::basis_phase(p, i) * state.amps_[i];
  return StateVector(std::move(out));
}

// e^{-i theta P} |psi> = cos(theta)|psi> - i sin(theta) P|psi>, valid because
// P^2 = identity.
inline StateVector apply_pauli_exponential(const StateVector& state,
                                           const PauliString& p, double theta) {
  if (state.dim() != (std::size_t{1} << p.num_qubits()))
    throw std::invalid_argument("apply_pauli_exponential: dimension mismatch");
  if (!std::isfinite(theta))
    throw std::invalid_argument("apply_pauli_exponential: non-finite angle");
  const double c = std::cos(theta);
  const Complex minus_i_s{0.0, -std::sin(theta)};
  const std::uint64_t x = p.x_mask();
  std::vector<Complex> out(state.dim());
  if (x == 0) {
    // Diagonal: each amplitude picks up e^{-i theta} or e^{+i theta}.
    for (std::uint64_t i = 0; i < state.dim(); ++i)
      out[i] = (c + minus_i_s * detail::basis_phase(p, i)) * state.amps_[i];
  } else {
    for (std::uint64_t i = 0; i < state.dim(); ++i) {
      const std::uint64_t j = i ^ x;
      out[i] = c * state.amps_[i] + minus_i_s * detail::basis_phase(p, j) * state.amps_[j];
    }
  }
  return StateVector(std::move(out));
}

}  // namespace qksvm::qsim

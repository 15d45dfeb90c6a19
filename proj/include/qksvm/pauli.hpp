#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qksvm::qsim {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  throw std::logic_error("pauli_char: invalid symbol");
}

// An n-fold tensor product of single-qubit operators from {I, X, Y, Z}.
// symbol(0) acts on qubit 0, the least significant bit of a basis index.
// The operator factors as i^{#Y} * (bit flips on x_mask) * (phases on z_mask),
// which lets it act on a statevector without materializing a 2^n x 2^n matrix.
class PauliString {
 public:
  explicit PauliString(std::vector<Pauli> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.empty())
      throw std::invalid_argument("PauliString: empty symbol sequence");
    if (symbols_.size() > 63)
      throw std::invalid_argument("PauliString: more than 63 qubits unsupported");
    for (std::size_t q = 0; q < symbols_.size(); ++q) {
      const Pauli p = symbols_[q];
      if (p == Pauli::X || p == Pauli::Y) x_mask_ |= std::uint64_t{1} << q;
      if (p == Pauli::Z || p == Pauli::Y) z_mask_ |= std::uint64_t{1} << q;
      if (p == Pauli::Y) ++y_count_;
    }
  }

  static PauliString parse(std::string_view text) {
    std::vector<Pauli> symbols;
    symbols.reserve(text.size());
    for (char c : text) {
      switch (c) {
        case 'I': symbols.push_back(Pauli::I); break;
        case 'X': symbols.push_back(Pauli::X); break;
        case 'Y': symbols.push_back(Pauli::Y); break;
        case 'Z': symbols.push_back(Pauli::Z); break;
        default:
          throw std::invalid_argument("PauliString: unknown symbol '" +
                                      std::string(1, c) + "'");
      }
    }
    return PauliString(std::move(symbols));
  }

  std::size_t num_qubits() const { return symbols_.size(); }
  Pauli symbol(std::size_t q) const { return symbols_.at(q); }
  const std::vector<Pauli>& symbols() const { return symbols_; }

  std::uint64_t x_mask() const { return x_mask_; }
  std::uint64_t z_mask() const { return z_mask_; }
  unsigned y_count() const { return y_count_; }

  // True when every symbol is I or Z, i.e. the operator is diagonal in the
  // computational basis.
  bool is_diagonal() const { return x_mask_ == 0; }

  // Two Pauli strings commute iff they anticommute on an even number of
  // qubit positions.
  bool commutes_with(const PauliString& other) const {
    if (other.num_qubits() != num_qubits())
      throw std::invalid_argument("commutes_with: qubit count mismatch");
    unsigned anti = 0;
    for (std::size_t q = 0; q < symbols_.size(); ++q) {
      const Pauli a = symbols_[q];
      const Pauli b = other.symbols_[q];
      if (a != Pauli::I && b != Pauli::I && a != b) ++anti;
    }
    return anti % 2 == 0;
  }

  std::string to_string() const {
    std::string s;
    s.reserve(symbols_.size());
    for (Pauli p : symbols_) s.push_back(pauli_char(p));
    return s;
  }

  friend bool operator==(const PauliString& a, const PauliString& b) {
    return a.symbols_ == b.symbols_;
  }

 private:
  std::vector<Pauli> symbols_;
  std::uint64_t x_mask_ = 0;
  std::uint64_t z_mask_ = 0;
  unsigned y_count_ = 0;
};

}  // namespace qksvm::qsim

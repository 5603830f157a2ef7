#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "qkad/rng.hpp"

namespace qkad {

using cd = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Unitary for one or two qubits. For two-qubit gates the first listed target
// is the first tensor factor: basis index = 2 * bit_first + bit_second.
class GateMatrix {
 public:
  static GateMatrix one_qubit(const std::array<cd, 4>& m);
  static GateMatrix two_qubit(const std::array<cd, 16>& m);

  int arity() const { return arity_; }
  int dim() const { return arity_ == 1 ? 2 : 4; }
  cd at(int r, int c) const { return m_[static_cast<std::size_t>(r) * dim() + c]; }
  const cd* data() const { return m_.data(); }

 private:
  GateMatrix(const cd* m, int arity);

  std::array<cd, 16> m_{};
  int arity_;
};

enum class GateId { h, sdg, x, sx, rx, rz, cx, ecr, rxx };

struct GateInfo {
  GateId id;
  std::string_view name;
  int arity;
  int num_params;
};

// Throws std::invalid_argument for names outside the supported set.
const GateInfo& gate_info(std::string_view name);
const GateInfo& gate_info(GateId id);

GateMatrix make_gate(GateId id, std::span<const double> params = {});
GateMatrix make_gate(std::string_view name, std::span<const double> params = {});

// Normalized pure state on num_qubits qubits, little endian: qubit 0 is the
// least significant bit of the amplitude index.
class StateVector {
 public:
  explicit StateVector(int num_qubits);  // |0...0>
  static StateVector from_amplitudes(std::vector<cd> amps);

  int num_qubits() const { return num_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  const std::vector<cd>& amplitudes() const { return amps_; }
  cd amplitude(std::size_t i) const { return amps_[i]; }
  double norm() const;

  void apply(const GateMatrix& gate, std::span<const int> targets);
  // |amp|^2 for every basis state.
  std::vector<double> probabilities() const;

 private:
  StateVector() = default;

  int num_qubits_ = 0;
  std::vector<cd> amps_;
};

enum class RdmKind { exact, estimated };

// 2x2 one-qubit reduced density matrix. Hermitian with unit trace; exact RDMs
// are positive semidefinite while estimated ones only need eigenvalues in
// [-1, 2] (single snapshots have eigenvalues exactly {2, -1}).
class OneQubitRdm {
 public:
  OneQubitRdm(const std::array<cd, 4>& m, RdmKind kind);

  cd at(int r, int c) const { return m_[static_cast<std::size_t>(r) * 2 + c]; }
  RdmKind kind() const { return kind_; }

  // Row-major [re00, im00, re01, im01, re10, im10, re11, im11]; squared
  // euclidean distance between two coordinate blocks equals the squared
  // Frobenius distance of the matrices.
  std::array<double, 8> coords() const;
  static OneQubitRdm from_coords(std::span<const double> c, RdmKind kind);

 private:
  std::array<cd, 4> m_;
  RdmKind kind_;
};

double frobenius_distance(const OneQubitRdm& a, const OneQubitRdm& b);

OneQubitRdm partial_trace_one_qubit(const StateVector& state, int qubit);

enum class PauliBasis { x, y, z };

PauliBasis pauli_basis_from_char(char c);
char pauli_basis_char(PauliBasis b);

// One computational-basis measurement of every qubit after the per-qubit
// basis rotation (x -> H, y -> H S\dagger, z -> identity). Bit k of the result
// is qubit k's outcome.
std::uint64_t sample_measurement(const StateVector& state,
                                 std::span<const PauliBasis> bases, Rng& rng);

}  // namespace qkad

// Copyright 2026 The QCBNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace qcbnn {

using complex_t = std::complex<double>;

inline constexpr std::size_t kMaxQubits = 12;

enum class GateKind { H, RX, RY, RZ, PHASE, U3, CNOT, CRX, CRY, CRZ, ZZ };

std::string_view gate_name(GateKind kind);
GateKind parse_gate_kind(std::string_view name);

/// Number of angles a gate of this kind consumes.
std::size_t angle_count(GateKind kind);
/// Number of wires a gate of this kind acts on (1 or 2).
std::size_t wire_count(GateKind kind);
bool is_controlled_rotation(GateKind kind);

/// Dense pure state of `n_qubits` wires. Qubit 0 is the most significant bit
/// of the basis index, so |q0 q1 ... q(n-1)> has index q0*2^(n-1) + ... .
class StateVector {
 public:
  explicit StateVector(std::size_t n_qubits);
  StateVector(std::size_t n_qubits, std::vector<complex_t> amplitudes);

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const complex_t> amplitudes() const { return amps_; }
  const complex_t& operator[](std::size_t i) const { return amps_[i]; }

  double norm_squared() const;

  void apply_single(std::size_t target, const complex_t (&m)[2][2]);
  void apply_controlled(std::size_t control, std::size_t target, const complex_t (&m)[2][2]);
  void apply_zz(std::size_t a, std::size_t b, double angle);

 private:
  std::size_t bit(std::size_t qubit) const { return std::size_t{1} << (n_qubits_ - 1 - qubit); }

  std::size_t n_qubits_;
  std::vector<complex_t> amps_;
};

/// |0...0> on `n_qubits` wires; throws std::invalid_argument outside [1, kMaxQubits].
StateVector init_state(std::size_t n_qubits);

/// A concrete gate: kind plus wire indices. Angles are supplied separately so
/// that templates can resolve them from parameter and input tables.
struct Gate {
  GateKind kind;
  std::vector<std::size_t> targets;
};

/// Validates arity and wire indices, then applies the unitary in place.
void apply_gate(StateVector& state, const Gate& gate, std::span<const double> angles);
StateVector with_gate(const StateVector& state, const Gate& gate, std::span<const double> angles);

/// Single-qubit 2x2 matrix for the rotation kinds (also the target block of
/// the controlled rotations).
void rotation_matrix(GateKind kind, std::span<const double> angles, complex_t (&m)[2][2]);

/// Pauli-Z readout on each flagged wire.
struct ZObservable {
  std::vector<bool> wires;

  static ZObservable all(std::size_t n_qubits) { return {std::vector<bool>(n_qubits, true)}; }
  std::size_t flagged() const;
};

double expectation_z(const StateVector& state, std::size_t qubit);
/// Expectations for the flagged wires, in wire order.
std::vector<double> measure(const StateVector& state, const ZObservable& obs);
std::vector<double> expectation_z_all(const StateVector& state);
std::vector<double> born_probabilities(const StateVector& state);

}  // namespace qcbnn

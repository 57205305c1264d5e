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

#include "qcbnn/statevector.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qcbnn {

namespace {

struct KindInfo {
  GateKind kind;
  std::string_view name;
  std::size_t angles;
  std::size_t wires;
};

constexpr std::array<KindInfo, 11> kKinds{{
    {GateKind::H, "H", 0, 1},
    {GateKind::RX, "RX", 1, 1},
    {GateKind::RY, "RY", 1, 1},
    {GateKind::RZ, "RZ", 1, 1},
    {GateKind::PHASE, "PHASE", 1, 1},
    {GateKind::U3, "U3", 3, 1},
    {GateKind::CNOT, "CNOT", 0, 2},
    {GateKind::CRX, "CRX", 1, 2},
    {GateKind::CRY, "CRY", 1, 2},
    {GateKind::CRZ, "CRZ", 1, 2},
    {GateKind::ZZ, "ZZ", 1, 2},
}};

const KindInfo& info(GateKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw std::logic_error("unknown gate kind");
}

}  // namespace

std::string_view gate_name(GateKind kind) { return info(kind).name; }

GateKind parse_gate_kind(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.name == name) return k.kind;
  }
  throw std::invalid_argument("unknown gate kind '" + std::string(name) + "'");
}

std::size_t angle_count(GateKind kind) { return info(kind).angles; }
std::size_t wire_count(GateKind kind) { return info(kind).wires; }

bool is_controlled_rotation(GateKind kind) {
  return kind == GateKind::CRX || kind == GateKind::CRY || kind == GateKind::CRZ;
}

StateVector::StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("qubit budget exceeded: n_qubits must be in [1, " +
                                std::to_string(kMaxQubits) + "], got " +
                                std::to_string(n_qubits));
  }
  amps_.assign(std::size_t{1} << n_qubits, complex_t{0.0, 0.0});
  amps_[0] = 1.0;
}

StateVector::StateVector(std::size_t n_qubits, std::vector<complex_t> amplitudes)
    : StateVector(n_qubits) {
  if (amplitudes.size() != amps_.size()) {
    throw std::invalid_argument("amplitude count does not match 2^n_qubits");
  }
  amps_ = std::move(amplitudes);
}

double StateVector::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return s;
}

void StateVector::apply_single(std::size_t target, const complex_t (&m)[2][2]) {
  const std::size_t tb = bit(target);
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (i & tb) continue;
    const complex_t a0 = amps_[i];
    const complex_t a1 = amps_[i | tb];
    amps_[i] = m[0][0] * a0 + m[0][1] * a1;
    amps_[i | tb] = m[1][0] * a0 + m[1][1] * a1;
  }
}

void StateVector::apply_controlled(std::size_t control, std::size_t target,
                                   const complex_t (&m)[2][2]) {
  const std::size_t cb = bit(control);
  const std::size_t tb = bit(target);
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (!(i & cb) || (i & tb)) continue;
    const complex_t a0 = amps_[i];
    const complex_t a1 = amps_[i | tb];
    amps_[i] = m[0][0] * a0 + m[0][1] * a1;
    amps_[i | tb] = m[1][0] * a0 + m[1][1] * a1;
  }
}

void StateVector::apply_zz(std::size_t a, std::size_t b, double angle) {
  // exp(-i angle/2 Z_a Z_b)
  const std::size_t ab = bit(a);
  const std::size_t bb = bit(b);
  const complex_t same = std::polar(1.0, -angle / 2);
  const complex_t diff = std::polar(1.0, angle / 2);
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    const bool pa = (i & ab) != 0;
    const bool pb = (i & bb) != 0;
    amps_[i] *= (pa == pb) ? same : diff;
  }
}

StateVector init_state(std::size_t n_qubits) { return StateVector(n_qubits); }

void rotation_matrix(GateKind kind, std::span<const double> angles, complex_t (&m)[2][2]) {
  using namespace std::complex_literals;
  switch (kind) {
    case GateKind::RX:
    case GateKind::CRX: {
      const double c = std::cos(angles[0] / 2), s = std::sin(angles[0] / 2);
      m[0][0] = c;
      m[0][1] = -1i * s;
      m[1][0] = -1i * s;
      m[1][1] = c;
      return;
    }
    case GateKind::RY:
    case GateKind::CRY: {
      const double c = std::cos(angles[0] / 2), s = std::sin(angles[0] / 2);
      m[0][0] = c;
      m[0][1] = -s;
      m[1][0] = s;
      m[1][1] = c;
      return;
    }
    case GateKind::RZ:
    case GateKind::CRZ:
      m[0][0] = std::polar(1.0, -angles[0] / 2);
      m[0][1] = 0.0;
      m[1][0] = 0.0;
      m[1][1] = std::polar(1.0, angles[0] / 2);
      return;
    case GateKind::PHASE:
      m[0][0] = 1.0;
      m[0][1] = 0.0;
      m[1][0] = 0.0;
      m[1][1] = std::polar(1.0, angles[0]);
      return;
    case GateKind::U3: {
      // U3(theta, phi, lambda), the OpenQASM convention.
      const double c = std::cos(angles[0] / 2), s = std::sin(angles[0] / 2);
      m[0][0] = c;
      m[0][1] = -std::polar(1.0, angles[2]) * s;
      m[1][0] = std::polar(1.0, angles[1]) * s;
      m[1][1] = std::polar(1.0, angles[1] + angles[2]) * c;
      return;
    }
    case GateKind::H: {
      const double r = 1.0 / std::sqrt(2.0);
      m[0][0] = r;
      m[0][1] = r;
      m[1][0] = r;
      m[1][1] = -r;
      return;
    }
    case GateKind::CNOT:
      m[0][0] = 0.0;
      m[0][1] = 1.0;
      m[1][0] = 1.0;
      m[1][1] = 0.0;
      return;
    case GateKind::ZZ:
      break;
  }
  throw std::invalid_argument("gate kind has no single-qubit matrix");
}

void apply_gate(StateVector& state, const Gate& gate, std::span<const double> angles) {
  const auto& ki = info(gate.kind);
  if (angles.size() != ki.angles) {
    throw std::invalid_argument("angle-count mismatch for " + std::string(ki.name) +
                                ": expected " + std::to_string(ki.angles) + ", got " +
                                std::to_string(angles.size()));
  }
  if (gate.targets.size() != ki.wires) {
    throw std::invalid_argument("wrong number of targets for " + std::string(ki.name));
  }
  for (auto t : gate.targets) {
    if (t >= state.n_qubits()) {
      throw std::invalid_argument("target out of range for " + std::string(ki.name));
    }
  }
  if (ki.wires == 2 && gate.targets[0] == gate.targets[1]) {
    throw std::invalid_argument("targets must be distinct for " + std::string(ki.name));
  }

  if (gate.kind == GateKind::ZZ) {
    state.apply_zz(gate.targets[0], gate.targets[1], angles[0]);
    return;
  }
  complex_t m[2][2];
  rotation_matrix(gate.kind, angles, m);
  if (ki.wires == 1) {
    state.apply_single(gate.targets[0], m);
  } else {
    state.apply_controlled(gate.targets[0], gate.targets[1], m);
  }
}

StateVector with_gate(const StateVector& state, const Gate& gate, std::span<const double> angles) {
  StateVector out = state;
  apply_gate(out, gate, angles);
  return out;
}

std::size_t ZObservable::flagged() const {
  std::size_t n = 0;
  for (bool w : wires) n += w ? 1 : 0;
  return n;
}

double expectation_z(const StateVector& state, std::size_t qubit) {
  if (qubit >= state.n_qubits()) throw std::invalid_argument("qubit index out of range");
  const std::size_t b = std::size_t{1} << (state.n_qubits() - 1 - qubit);
  double e = 0.0;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    e += (i & b) ? -std::norm(amps[i]) : std::norm(amps[i]);
  }
  // Rounding can push |e| a few ulps past 1.
  return std::clamp(e, -1.0, 1.0);
}

std::vector<double> measure(const StateVector& state, const ZObservable& obs) {
  if (obs.wires.size() != state.n_qubits() || obs.flagged() == 0) {
    throw std::invalid_argument("observable must flag at least one wire of the state");
  }
  std::vector<double> out;
  out.reserve(obs.flagged());
  for (std::size_t q = 0; q < obs.wires.size(); ++q) {
    if (obs.wires[q]) out.push_back(expectation_z(state, q));
  }
  return out;
}

std::vector<double> expectation_z_all(const StateVector& state) {
  return measure(state, ZObservable::all(state.n_qubits()));
}

std::vector<double> born_probabilities(const StateVector& state) {
  std::vector<double> p;
  p.reserve(state.dim());
  for (const auto& a : state.amplitudes()) p.push_back(std::norm(a));
  return p;
}

}  // namespace qcbnn

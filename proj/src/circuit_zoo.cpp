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

#include "qcbnn/circuit_zoo.hpp"

#include <stdexcept>

namespace qcbnn {

namespace {

struct ArchInfo {
  ArchitectureId id;
  std::string_view token;
  std::string_view name;
};

constexpr std::array<ArchInfo, 8> kArchInfo{{
    {ArchitectureId::MaticI, "matic_i", "Matic I"},
    {ArchitectureId::MaticII, "matic_ii", "Matic II"},
    {ArchitectureId::Nikoloska, "nikoloska", "Nikoloska"},
    {ArchitectureId::Romero, "romero", "Romero"},
    {ArchitectureId::CircuitI, "circuit_i", "Circuit I"},
    {ArchitectureId::CircuitII, "circuit_ii", "Circuit II"},
    {ArchitectureId::CircuitIII, "circuit_iii", "Circuit III"},
    {ArchitectureId::CircuitIV, "circuit_iv", "Circuit IV"},
}};

const ArchInfo& arch_info(ArchitectureId id) {
  for (const auto& a : kArchInfo) {
    if (a.id == id) return a;
  }
  throw std::logic_error("unknown architecture");
}

void push(CircuitTemplate& t, GateKind kind, std::vector<std::size_t> targets,
          std::vector<AngleRef> angles = {}) {
  t.gates.push_back({kind, std::move(targets), std::move(angles)});
}

// One rotation per wire; returns the next free parameter slot.
std::size_t rotation_layer(CircuitTemplate& t, GateKind kind, std::size_t first_slot) {
  std::size_t slot = first_slot;
  for (std::size_t q = 0; q < t.n_qubits; ++q) {
    std::vector<AngleRef> refs;
    for (std::size_t k = 0; k < angle_count(kind); ++k) refs.push_back(AngleRef::param(slot++));
    push(t, kind, {q}, std::move(refs));
  }
  return slot;
}

void cnot_chain(CircuitTemplate& t, bool close_ring) {
  for (std::size_t q = 0; q + 1 < t.n_qubits; ++q) push(t, GateKind::CNOT, {q, q + 1});
  if (close_ring) push(t, GateKind::CNOT, {t.n_qubits - 1, 0});
}

std::size_t controlled_chain(CircuitTemplate& t, GateKind axis, std::size_t first_slot) {
  std::size_t slot = first_slot;
  for (std::size_t q = 0; q + 1 < t.n_qubits; ++q) {
    push(t, axis, {q, q + 1}, {AngleRef::param(slot++)});
  }
  return slot;
}

}  // namespace

std::string_view architecture_token(ArchitectureId id) { return arch_info(id).token; }
std::string_view architecture_name(ArchitectureId id) { return arch_info(id).name; }

std::string valid_architecture_tokens() {
  std::string out;
  for (const auto& a : kArchInfo) {
    if (!out.empty()) out += ", ";
    out += a.token;
  }
  return out;
}

ArchitectureId parse_architecture(std::string_view token) {
  for (const auto& a : kArchInfo) {
    if (a.token == token) return a.id;
  }
  throw std::invalid_argument("unknown architecture '" + std::string(token) +
                              "'; valid ids: " + valid_architecture_tokens());
}

CircuitTemplate build_embedding(std::size_t n_qubits, const ZooOptions& options) {
  if (n_qubits < 2) throw std::invalid_argument("embedding needs at least 2 qubits");
  CircuitTemplate t = empty_template(n_qubits);
  t.input_slots = n_qubits;
  t.label = "embedding";
  for (std::size_t q = 0; q < n_qubits; ++q) push(t, GateKind::H, {q});
  for (std::size_t q = 0; q < n_qubits; ++q) {
    push(t, GateKind::RZ, {q}, {AngleRef::input(q, 2.0)});
  }
  auto entangle = [&](std::size_t i, std::size_t j) {
    push(t, GateKind::CNOT, {i, j});
    push(t, GateKind::RZ, {j}, {AngleRef::input_pair(i, j, 2.0)});
    push(t, GateKind::CNOT, {i, j});
  };
  if (options.embedding_pairs == PairTopology::FullPairwise) {
    for (std::size_t i = 0; i < n_qubits; ++i) {
      for (std::size_t j = i + 1; j < n_qubits; ++j) entangle(i, j);
    }
  } else {
    for (std::size_t i = 0; i + 1 < n_qubits; ++i) entangle(i, i + 1);
  }
  return t;
}

CircuitTemplate build_calculation_layer(ArchitectureId arch, std::size_t n_qubits,
                                        const ZooOptions& options) {
  if (n_qubits < 2) throw std::invalid_argument("calculation layer needs at least 2 qubits");
  if (!is_controlled_rotation(options.controlled_axis)) {
    throw std::invalid_argument("controlled_axis must be CRX, CRY or CRZ");
  }
  CircuitTemplate t = empty_template(n_qubits);
  t.label = std::string(architecture_token(arch));
  std::size_t slot = 0;
  switch (arch) {
    case ArchitectureId::MaticI:
      slot = rotation_layer(t, GateKind::RX, slot);
      cnot_chain(t, true);
      break;
    case ArchitectureId::MaticII:
      slot = rotation_layer(t, GateKind::U3, slot);
      cnot_chain(t, true);
      break;
    case ArchitectureId::Nikoloska:
      slot = rotation_layer(t, GateKind::RX, slot);
      slot = rotation_layer(t, GateKind::PHASE, slot);
      cnot_chain(t, false);
      break;
    case ArchitectureId::Romero:
      slot = rotation_layer(t, GateKind::RY, slot);
      cnot_chain(t, false);
      break;
    case ArchitectureId::CircuitI:
      slot = rotation_layer(t, GateKind::U3, slot);
      cnot_chain(t, false);
      break;
    case ArchitectureId::CircuitII:
      slot = rotation_layer(t, GateKind::U3, slot);
      slot = controlled_chain(t, options.controlled_axis, slot);
      break;
    case ArchitectureId::CircuitIII:
      slot = rotation_layer(t, GateKind::RY, slot);
      slot = controlled_chain(t, options.controlled_axis, slot);
      break;
    case ArchitectureId::CircuitIV:
      slot = rotation_layer(t, GateKind::RY, slot);
      slot = controlled_chain(t, options.controlled_axis, slot);
      push(t, options.controlled_axis, {0, n_qubits - 1}, {AngleRef::param(slot++)});
      break;
  }
  t.param_slots = slot;
  return t;
}

CircuitTemplate assemble_pqc(ArchitectureId arch, std::size_t n_qubits, std::size_t layers,
                             bool reupload, const ZooOptions& options) {
  if (layers < 1) throw std::invalid_argument("layers must be >= 1");
  const CircuitTemplate embedding = build_embedding(n_qubits, options);
  const CircuitTemplate calc = build_calculation_layer(arch, n_qubits, options);
  CircuitTemplate t = empty_template(n_qubits);
  for (std::size_t l = 0; l < layers; ++l) {
    if (l == 0 || reupload) t.append(embedding);
    t.append(calc);
  }
  t.layering = {layers, reupload};
  t.label = std::string(architecture_token(arch)) + "_L" + std::to_string(layers) +
            (reupload ? "_re" : "");
  t.validate();
  return t;
}

std::size_t entangler_count(const CircuitTemplate& tmpl) {
  std::size_t n = 0;
  for (const auto& g : tmpl.gates) n += wire_count(g.kind) == 2 ? 1 : 0;
  return n;
}

}  // namespace qcbnn

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

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "qcbnn/circuit.hpp"

namespace qcbnn {

/// The eight calculation-layer architectures.
enum class ArchitectureId {
  MaticI,
  MaticII,
  Nikoloska,
  Romero,
  CircuitI,
  CircuitII,
  CircuitIII,
  CircuitIV,
};

inline constexpr std::array<ArchitectureId, 8> kAllArchitectures{
    ArchitectureId::MaticI,   ArchitectureId::MaticII,   ArchitectureId::Nikoloska,
    ArchitectureId::Romero,   ArchitectureId::CircuitI,  ArchitectureId::CircuitII,
    ArchitectureId::CircuitIII, ArchitectureId::CircuitIV,
};

/// Config token, e.g. "circuit_iii".
std::string_view architecture_token(ArchitectureId id);
/// Display name, e.g. "Circuit III".
std::string_view architecture_name(ArchitectureId id);
/// Throws std::invalid_argument listing the valid tokens.
ArchitectureId parse_architecture(std::string_view token);
std::string valid_architecture_tokens();

enum class PairTopology {
  FullPairwise,  // every pair i < j
  Adjacent,      // (0,1), (1,2), ...
};

struct ZooOptions {
  PairTopology embedding_pairs = PairTopology::FullPairwise;
  /// Rotation axis of the trainable controlled entanglers; X by default.
  GateKind controlled_axis = GateKind::CRX;
};

/// Second-order ZZ feature map: H on every wire, RZ(2 z_i), then for each
/// pair CNOT(i,j) RZ(2 (pi - z_i)(pi - z_j)) on j, CNOT(i,j).
CircuitTemplate build_embedding(std::size_t n_qubits, const ZooOptions& options = {});

/// One trainable calculation layer; parameter slots start at 0.
CircuitTemplate build_calculation_layer(ArchitectureId arch, std::size_t n_qubits,
                                        const ZooOptions& options = {});

/// reupload = false: embedding followed by `layers` calculation layers with
/// independent parameters. reupload = true: `layers` (embedding, calculation)
/// pairs, all embeddings reading the same inputs.
CircuitTemplate assemble_pqc(ArchitectureId arch, std::size_t n_qubits, std::size_t layers,
                             bool reupload, const ZooOptions& options = {});

std::size_t entangler_count(const CircuitTemplate& tmpl);

}  // namespace qcbnn

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

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qcbnn/statevector.hpp"

namespace qcbnn {

/// Where a gate angle comes from. Trainable angles are linear in one
/// parameter; input angles come from the noise vector fed to the embedding.
struct AngleRef {
  enum class Source {
    Param,      // scale * params[index]
    Input,      // scale * inputs[index]
    InputPair,  // scale * (pi - inputs[index]) * (pi - inputs[other])
    Constant,   // scale
  };

  Source source = Source::Constant;
  std::size_t index = 0;
  std::size_t other = 0;
  double scale = 1.0;

  static AngleRef param(std::size_t j, double scale = 1.0) { return {Source::Param, j, 0, scale}; }
  static AngleRef input(std::size_t i, double scale = 1.0) { return {Source::Input, i, 0, scale}; }
  static AngleRef input_pair(std::size_t i, std::size_t k, double scale = 1.0) {
    return {Source::InputPair, i, k, scale};
  }
  static AngleRef constant(double value) { return {Source::Constant, 0, 0, value}; }

  double resolve(std::span<const double> params, std::span<const double> inputs) const;
};

struct TemplateGate {
  GateKind kind;
  std::vector<std::size_t> targets;
  std::vector<AngleRef> angles;
};

struct Layering {
  std::size_t layers = 1;
  bool reupload = false;
};

/// Gate list with symbolic parameter and input slots. Outputs are the Pauli-Z
/// expectations of the wires flagged in `observable`.
struct CircuitTemplate {
  std::size_t n_qubits = 0;
  std::vector<TemplateGate> gates;
  std::size_t param_slots = 0;
  std::size_t input_slots = 0;
  Layering layering;
  ZObservable observable;
  std::string label;

  std::size_t output_count() const { return observable.flagged(); }

  /// Appends `other`, offsetting its parameter slots past ours. Input slots
  /// are shared (the same noise vector feeds every embedding block).
  void append(const CircuitTemplate& other);

  /// Throws std::invalid_argument on arity, wire, or slot-reference errors.
  void validate() const;
};

CircuitTemplate empty_template(std::size_t n_qubits);

std::size_t param_count(const CircuitTemplate& tmpl);

/// Final state after applying every gate to |0...0>.
StateVector run_circuit_state(const CircuitTemplate& tmpl, std::span<const double> params,
                              std::span<const double> inputs);

/// Per-flagged-wire Z expectations after applying every gate to |0...0>.
std::vector<double> run_circuit(const CircuitTemplate& tmpl, std::span<const double> params,
                                std::span<const double> inputs);

/// Row-major outputs x params matrix.
struct Jacobian {
  std::size_t outputs = 0;
  std::size_t params = 0;
  std::vector<double> values;

  double operator()(std::size_t q, std::size_t j) const { return values[q * params + j]; }
  double& operator()(std::size_t q, std::size_t j) { return values[q * params + j]; }
};

/// Expectations together with their parameter Jacobian.
struct CircuitEvaluation {
  std::vector<double> outputs;
  Jacobian jacobian;
};

/// d<Z_q>/d theta_j by analytic shift rules: two-term (shift pi/2) for the
/// single-qubit rotations, PHASE, U3 and ZZ; four-term (shifts pi/2, 3pi/2)
/// for CRX/CRY/CRZ.
Jacobian parameter_shift_grad(const CircuitTemplate& tmpl, std::span<const double> params,
                              std::span<const double> inputs);

CircuitEvaluation evaluate_with_gradient(const CircuitTemplate& tmpl,
                                         std::span<const double> params,
                                         std::span<const double> inputs);

/// One gate per line: `KIND q<i> [q<j>] [angle refs...]`, where a ref is
/// `theta<j>`, `2*z<i>`, `2*(pi-z<i>)*(pi-z<k>)` or a literal.
std::string dump_circuit(const CircuitTemplate& tmpl);
void dump_circuit(std::ostream& os, const CircuitTemplate& tmpl);

}  // namespace qcbnn

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

#include "qcbnn/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qcbnn {

double AngleRef::resolve(std::span<const double> params, std::span<const double> inputs) const {
  switch (source) {
    case Source::Param:
      return scale * params[index];
    case Source::Input:
      return scale * inputs[index];
    case Source::InputPair:
      return scale * (std::numbers::pi - inputs[index]) * (std::numbers::pi - inputs[other]);
    case Source::Constant:
      return scale;
  }
  return 0.0;
}

void CircuitTemplate::append(const CircuitTemplate& other) {
  if (other.n_qubits != n_qubits) throw std::invalid_argument("qubit count mismatch in append");
  for (auto g : other.gates) {
    for (auto& a : g.angles) {
      if (a.source == AngleRef::Source::Param) a.index += param_slots;
    }
    gates.push_back(std::move(g));
  }
  param_slots += other.param_slots;
  input_slots = std::max(input_slots, other.input_slots);
}

void CircuitTemplate::validate() const {
  if (n_qubits < 1 || n_qubits > kMaxQubits) throw std::invalid_argument("qubit budget exceeded");
  if (observable.wires.size() != n_qubits || observable.flagged() == 0) {
    throw std::invalid_argument("observable must flag at least one wire");
  }
  std::vector<int> param_uses(param_slots, 0);
  for (const auto& g : gates) {
    if (g.targets.size() != wire_count(g.kind)) {
      throw std::invalid_argument("wrong target count for " + std::string(gate_name(g.kind)));
    }
    if (g.angles.size() != angle_count(g.kind)) {
      throw std::invalid_argument("wrong angle count for " + std::string(gate_name(g.kind)));
    }
    for (auto t : g.targets) {
      if (t >= n_qubits) throw std::invalid_argument("target out of range");
    }
    if (g.targets.size() == 2 && g.targets[0] == g.targets[1]) {
      throw std::invalid_argument("targets must be distinct");
    }
    for (const auto& a : g.angles) {
      switch (a.source) {
        case AngleRef::Source::Param:
          if (a.index >= param_slots) throw std::invalid_argument("param slot out of range");
          ++param_uses[a.index];
          break;
        case AngleRef::Source::InputPair:
          if (a.other >= input_slots) throw std::invalid_argument("input slot out of range");
          [[fallthrough]];
        case AngleRef::Source::Input:
          if (a.index >= input_slots) throw std::invalid_argument("input slot out of range");
          break;
        case AngleRef::Source::Constant:
          break;
      }
    }
  }
  for (std::size_t j = 0; j < param_slots; ++j) {
    if (param_uses[j] == 0) {
      throw std::invalid_argument("param slot " + std::to_string(j) + " is never used");
    }
  }
}

CircuitTemplate empty_template(std::size_t n_qubits) {
  CircuitTemplate t;
  t.n_qubits = n_qubits;
  t.observable = ZObservable::all(n_qubits);
  return t;
}

std::size_t param_count(const CircuitTemplate& tmpl) { return tmpl.param_slots; }

namespace {

constexpr std::size_t kNoShift = static_cast<std::size_t>(-1);

void check_slots(const CircuitTemplate& tmpl, std::span<const double> params,
                 std::span<const double> inputs) {
  if (params.size() != tmpl.param_slots) {
    throw std::invalid_argument("slot-count mismatch: template has " +
                                std::to_string(tmpl.param_slots) + " params, got " +
                                std::to_string(params.size()));
  }
  if (inputs.size() != tmpl.input_slots) {
    throw std::invalid_argument("slot-count mismatch: template has " +
                                std::to_string(tmpl.input_slots) + " inputs, got " +
                                std::to_string(inputs.size()));
  }
}

// Runs the template with `delta` added to angle `slot` of gate `gate_index`.
StateVector run_shifted(const CircuitTemplate& tmpl, std::span<const double> params,
                        std::span<const double> inputs, std::size_t gate_index, std::size_t slot,
                        double delta) {
  StateVector state(tmpl.n_qubits);
  double angles[3];
  Gate g;
  for (std::size_t gi = 0; gi < tmpl.gates.size(); ++gi) {
    const auto& tg = tmpl.gates[gi];
    for (std::size_t k = 0; k < tg.angles.size(); ++k) {
      angles[k] = tg.angles[k].resolve(params, inputs);
      if (gi == gate_index && k == slot) angles[k] += delta;
    }
    g.kind = tg.kind;
    g.targets = tg.targets;
    apply_gate(state, g, std::span<const double>(angles, tg.angles.size()));
  }
  return state;
}

enum class ShiftRule { TwoTerm, FourTerm };

ShiftRule shift_rule_for(GateKind kind) {
  switch (kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::PHASE:
    case GateKind::U3:
    case GateKind::ZZ:
      return ShiftRule::TwoTerm;
    case GateKind::CRX:
    case GateKind::CRY:
    case GateKind::CRZ:
      return ShiftRule::FourTerm;
    default:
      break;
  }
  throw std::invalid_argument("unsupported gate kind in a trainable slot: " +
                              std::string(gate_name(kind)));
}

void add_scaled(std::vector<double>& acc, const std::vector<double>& v, double w) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * v[i];
}

}  // namespace

StateVector run_circuit_state(const CircuitTemplate& tmpl, std::span<const double> params,
                              std::span<const double> inputs) {
  check_slots(tmpl, params, inputs);
  return run_shifted(tmpl, params, inputs, kNoShift, 0, 0.0);
}

std::vector<double> run_circuit(const CircuitTemplate& tmpl, std::span<const double> params,
                                std::span<const double> inputs) {
  return measure(run_circuit_state(tmpl, params, inputs), tmpl.observable);
}

Jacobian parameter_shift_grad(const CircuitTemplate& tmpl, std::span<const double> params,
                              std::span<const double> inputs) {
  check_slots(tmpl, params, inputs);
  using std::numbers::pi;
  const std::size_t n_out = tmpl.output_count();
  Jacobian jac{n_out, tmpl.param_slots, std::vector<double>(n_out * tmpl.param_slots, 0.0)};

  auto eval = [&](std::size_t gi, std::size_t k, double delta) {
    return measure(run_shifted(tmpl, params, inputs, gi, k, delta), tmpl.observable);
  };

  const double c_plus = (std::numbers::sqrt2 + 1.0) / (4.0 * std::numbers::sqrt2);
  const double c_minus = (std::numbers::sqrt2 - 1.0) / (4.0 * std::numbers::sqrt2);

  for (std::size_t gi = 0; gi < tmpl.gates.size(); ++gi) {
    const auto& tg = tmpl.gates[gi];
    for (std::size_t k = 0; k < tg.angles.size(); ++k) {
      const auto& ref = tg.angles[k];
      if (ref.source != AngleRef::Source::Param) continue;
      std::vector<double> d(n_out, 0.0);
      if (shift_rule_for(tg.kind) == ShiftRule::TwoTerm) {
        add_scaled(d, eval(gi, k, pi / 2), 0.5);
        add_scaled(d, eval(gi, k, -pi / 2), -0.5);
      } else {
        add_scaled(d, eval(gi, k, pi / 2), c_plus);
        add_scaled(d, eval(gi, k, -pi / 2), -c_plus);
        add_scaled(d, eval(gi, k, 3 * pi / 2), -c_minus);
        add_scaled(d, eval(gi, k, -3 * pi / 2), c_minus);
      }
      for (std::size_t q = 0; q < n_out; ++q) jac(q, ref.index) += ref.scale * d[q];
    }
  }
  return jac;
}

CircuitEvaluation evaluate_with_gradient(const CircuitTemplate& tmpl,
                                         std::span<const double> params,
                                         std::span<const double> inputs) {
  return {run_circuit(tmpl, params, inputs), parameter_shift_grad(tmpl, params, inputs)};
}

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string format_ref(const AngleRef& a) {
  auto prefix = [&](double s) { return s == 1.0 ? std::string{} : format_number(s) + "*"; };
  switch (a.source) {
    case AngleRef::Source::Param:
      return prefix(a.scale) + "theta" + std::to_string(a.index);
    case AngleRef::Source::Input:
      return prefix(a.scale) + "z" + std::to_string(a.index);
    case AngleRef::Source::InputPair:
      return prefix(a.scale) + "(pi-z" + std::to_string(a.index) + ")*(pi-z" +
             std::to_string(a.other) + ")";
    case AngleRef::Source::Constant:
      return format_number(a.scale);
  }
  return {};
}

}  // namespace

void dump_circuit(std::ostream& os, const CircuitTemplate& tmpl) {
  os << "# " << (tmpl.label.empty() ? "circuit" : tmpl.label) << " qubits=" << tmpl.n_qubits
     << " params=" << tmpl.param_slots << " inputs=" << tmpl.input_slots
     << " layers=" << tmpl.layering.layers << " reupload=" << (tmpl.layering.reupload ? 1 : 0)
     << '\n';
  for (const auto& g : tmpl.gates) {
    os << gate_name(g.kind);
    for (auto t : g.targets) os << " q" << t;
    for (const auto& a : g.angles) os << ' ' << format_ref(a);
    os << '\n';
  }
}

std::string dump_circuit(const CircuitTemplate& tmpl) {
  std::ostringstream os;
  dump_circuit(os, tmpl);
  return os.str();
}

}  // namespace qcbnn

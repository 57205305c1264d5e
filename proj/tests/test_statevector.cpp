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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qcbnn/circuit.hpp"
#include "qcbnn/circuit_zoo.hpp"

using namespace qcbnn;

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

void expect_amplitudes(const StateVector& s, const std::vector<complex_t>& want, double tol = 1e-12) {
  ASSERT_EQ(s.dim(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_NEAR(s[i].real(), want[i].real(), tol) << "amplitude " << i;
    EXPECT_NEAR(s[i].imag(), want[i].imag(), tol) << "amplitude " << i;
  }
}

GateKind random_kind(std::mt19937_64& rng) {
  static constexpr GateKind kinds[] = {GateKind::H,   GateKind::RX,  GateKind::RY,
                                       GateKind::RZ,  GateKind::PHASE, GateKind::U3,
                                       GateKind::CNOT, GateKind::CRX, GateKind::CRY,
                                       GateKind::CRZ, GateKind::ZZ};
  return kinds[std::uniform_int_distribution<std::size_t>(0, std::size(kinds) - 1)(rng)];
}

/// Random gate with distinct random targets on n wires and random angles.
std::pair<Gate, std::vector<double>> random_gate(std::mt19937_64& rng, std::size_t n) {
  const GateKind kind = random_kind(rng);
  std::uniform_int_distribution<std::size_t> wire(0, n - 1);
  std::uniform_real_distribution<double> angle(-2 * kPi, 2 * kPi);
  Gate g{kind, {wire(rng)}};
  if (wire_count(kind) == 2) {
    std::size_t t = wire(rng);
    while (t == g.targets[0]) t = wire(rng);
    g.targets.push_back(t);
  }
  std::vector<double> angles(angle_count(kind));
  for (auto& a : angles) a = angle(rng);
  return {g, angles};
}

}  // namespace

TEST(init_state, basis_zero) {
  expect_amplitudes(init_state(1), {1.0, 0.0});
  expect_amplitudes(init_state(2), {1.0, 0.0, 0.0, 0.0});
}

TEST(init_state, rejects_oversized_register) {
  try {
    init_state(13);
    FAIL() << "expected a throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("qubit budget exceeded"), std::string::npos);
  }
  EXPECT_THROW(init_state(0), std::invalid_argument);
  EXPECT_NO_THROW(init_state(kMaxQubits));
}

TEST(apply_gate, rx_pi_flips_with_phase) {
  auto s = with_gate(init_state(1), {GateKind::RX, {0}}, std::vector<double>{kPi});
  expect_amplitudes(s, {0.0, complex_t(0.0, -1.0)});
}

TEST(apply_gate, hadamard) {
  auto s = with_gate(init_state(1), {GateKind::H, {0}}, {});
  expect_amplitudes(s, {kInvSqrt2, kInvSqrt2});
}

TEST(apply_gate, cnot_makes_bell_state) {
  StateVector s(2, {kInvSqrt2, 0.0, kInvSqrt2, 0.0});
  apply_gate(s, {GateKind::CNOT, {0, 1}}, {});
  expect_amplitudes(s, {kInvSqrt2, 0.0, 0.0, kInvSqrt2});
}

TEST(apply_gate, qubit_zero_is_most_significant) {
  auto s = with_gate(init_state(3), {GateKind::RX, {0}}, std::vector<double>{kPi});
  EXPECT_NEAR(std::abs(s[4]), 1.0, 1e-12);
  s = with_gate(init_state(3), {GateKind::RX, {2}}, std::vector<double>{kPi});
  EXPECT_NEAR(std::abs(s[1]), 1.0, 1e-12);
}

TEST(apply_gate, error_contracts) {
  auto s = init_state(2);
  EXPECT_THROW(apply_gate(s, {GateKind::RX, {0}}, std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(apply_gate(s, {GateKind::U3, {0}}, std::vector<double>{1.0}),
               std::invalid_argument);
  EXPECT_THROW(apply_gate(s, {GateKind::H, {2}}, {}), std::invalid_argument);
  EXPECT_THROW(apply_gate(s, {GateKind::CNOT, {1, 1}}, {}), std::invalid_argument);
  EXPECT_THROW(apply_gate(s, {GateKind::CNOT, {0}}, {}), std::invalid_argument);
  try {
    apply_gate(s, {GateKind::RY, {0}}, std::vector<double>{1.0, 2.0});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("angle-count mismatch"), std::string::npos);
  }
}

TEST(apply_gate, zz_matches_cnot_rz_cnot) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int trial = 0; trial < 20; ++trial) {
    StateVector s = init_state(3);
    for (std::size_t q = 0; q < 3; ++q) {
      apply_gate(s, {GateKind::U3, {q}}, std::vector<double>{u(rng), u(rng), u(rng)});
    }
    const double theta = u(rng);
    StateVector a = with_gate(s, {GateKind::ZZ, {0, 2}}, std::vector<double>{theta});
    StateVector b = with_gate(s, {GateKind::CNOT, {0, 2}}, {});
    apply_gate(b, {GateKind::RZ, {2}}, std::vector<double>{theta});
    apply_gate(b, {GateKind::CNOT, {0, 2}}, {});
    for (std::size_t i = 0; i < a.dim(); ++i) EXPECT_NEAR(std::abs(a[i] - b[i]), 0.0, 1e-12);
  }
}

TEST(apply_gate, controlled_rotation_acts_only_on_control_one) {
  auto s = with_gate(init_state(2), {GateKind::CRX, {0, 1}}, std::vector<double>{kPi});
  expect_amplitudes(s, {1.0, 0.0, 0.0, 0.0});
  s = with_gate(init_state(2), {GateKind::RX, {0}}, std::vector<double>{kPi});
  s = with_gate(s, {GateKind::CRX, {0, 1}}, std::vector<double>{kPi});
  expect_amplitudes(s, {0.0, 0.0, 0.0, complex_t(-1.0, 0.0)});
}

TEST(apply_gate, inverse_restores_state) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    StateVector s = init_state(4);
    for (std::size_t q = 0; q < 4; ++q) apply_gate(s, {GateKind::H, {q}}, {});
    auto [gate, angles] = random_gate(rng, 4);
    StateVector t = with_gate(s, gate, angles);
    if (gate.kind == GateKind::U3) {
      // U3(theta, phi, lambda)^-1 = U3(-theta, -lambda, -phi)
      t = with_gate(t, gate, std::vector<double>{-angles[0], -angles[2], -angles[1]});
    } else {
      std::vector<double> inv(angles);
      for (auto& a : inv) a = -a;
      t = with_gate(t, gate, inv);
    }
    for (std::size_t i = 0; i < s.dim(); ++i) {
      EXPECT_NEAR(std::abs(t[i] - s[i]), 0.0, 1e-12) << gate_name(gate.kind);
    }
  }
}

TEST(expectation_z, eigenstates_and_equator) {
  EXPECT_DOUBLE_EQ(expectation_z(init_state(1), 0), 1.0);
  auto s = with_gate(init_state(1), {GateKind::RX, {0}}, std::vector<double>{kPi});
  EXPECT_NEAR(expectation_z(s, 0), -1.0, 1e-12);
  s = with_gate(init_state(1), {GateKind::RX, {0}}, std::vector<double>{kPi / 2});
  EXPECT_NEAR(expectation_z(s, 0), 0.0, 1e-12);
  EXPECT_THROW(expectation_z(s, 1), std::invalid_argument);
}

TEST(born_probabilities, simple_states) {
  auto p = born_probabilities(StateVector(1, {kInvSqrt2, kInvSqrt2}));
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[1], 0.5, 1e-15);
  p = born_probabilities(init_state(2));
  EXPECT_EQ(p, (std::vector<double>{1.0, 0.0, 0.0, 0.0}));
}

TEST(statevector, random_circuit_invariants) {
  std::mt19937_64 rng(2024);
  for (int c = 0; c < 300; ++c) {
    const std::size_t n = 1 + c % 6;
    StateVector s = init_state(n);
    for (int g = 0; g < 40; ++g) {
      auto [gate, angles] = random_gate(rng, std::max<std::size_t>(n, 2));
      if (n == 1 && wire_count(gate.kind) == 2) continue;
      if (gate.targets[0] >= n) continue;
      apply_gate(s, gate, angles);
      ASSERT_NEAR(s.norm_squared(), 1.0, 1e-12);
    }
    double total = 0.0;
    for (double p : born_probabilities(s)) total += p;
    EXPECT_NEAR(total, 1.0, 1e-10);
    for (double z : expectation_z_all(s)) {
      EXPECT_GE(z, -1.0);
      EXPECT_LE(z, 1.0);
    }
  }
}

TEST(gate_kind, names_round_trip) {
  for (GateKind k : {GateKind::H, GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::PHASE,
                     GateKind::U3, GateKind::CNOT, GateKind::CRX, GateKind::CRY, GateKind::CRZ,
                     GateKind::ZZ}) {
    EXPECT_EQ(parse_gate_kind(gate_name(k)), k);
  }
  EXPECT_THROW(parse_gate_kind("SWAP"), std::invalid_argument);
}

TEST(run_circuit, empty_template_gives_plus_ones) {
  const auto out = run_circuit(empty_template(4), {}, {});
  EXPECT_EQ(out, (std::vector<double>{1.0, 1.0, 1.0, 1.0}));
}

TEST(run_circuit, rx_layer) {
  CircuitTemplate t = empty_template(4);
  for (std::size_t q = 0; q < 4; ++q) {
    t.gates.push_back({GateKind::RX, {q}, {AngleRef::param(q)}});
  }
  t.param_slots = 4;
  const auto out = run_circuit(t, std::vector<double>{kPi, 0.0, kPi, 0.0}, {});
  const std::vector<double> want{-1.0, 1.0, -1.0, 1.0};
  for (std::size_t q = 0; q < 4; ++q) EXPECT_NEAR(out[q], want[q], 1e-12);
}

TEST(run_circuit, slot_count_mismatch) {
  const auto t = assemble_pqc(ArchitectureId::Romero, 4, 1, false);
  try {
    run_circuit(t, std::vector<double>(3), std::vector<double>(4));
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("slot-count mismatch"), std::string::npos);
  }
  EXPECT_THROW(run_circuit(t, std::vector<double>(4), std::vector<double>(3)),
               std::invalid_argument);
}

TEST(run_circuit, romero_outputs_in_range_and_pure) {
  const auto t = assemble_pqc(ArchitectureId::Romero, 4, 1, false);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  for (int draw = 0; draw < 1000; ++draw) {
    std::vector<double> theta(4), z(4);
    for (auto& v : theta) v = u(rng);
    for (auto& v : z) v = u(rng);
    const auto a = run_circuit(t, theta, z);
    for (double v : a) {
      ASSERT_GE(v, -1.0);
      ASSERT_LE(v, 1.0);
    }
    if (draw % 100 == 0) EXPECT_EQ(a, run_circuit(t, theta, z));
  }
}

TEST(parameter_shift, single_rx_closed_form) {
  CircuitTemplate t = empty_template(1);
  t.gates.push_back({GateKind::RX, {0}, {AngleRef::param(0)}});
  t.param_slots = 1;
  EXPECT_NEAR(parameter_shift_grad(t, std::vector<double>{0.0}, {})(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(parameter_shift_grad(t, std::vector<double>{kPi / 2}, {})(0, 0), -1.0, 1e-12);
}

TEST(parameter_shift, every_trainable_kind_matches_finite_differences) {
  // One-gate-kind circuits sandwiched between fixed entangling layers.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (GateKind kind : {GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::PHASE, GateKind::U3,
                        GateKind::CRX, GateKind::CRY, GateKind::CRZ, GateKind::ZZ}) {
    CircuitTemplate t = empty_template(3);
    for (std::size_t q = 0; q < 3; ++q) {
      t.gates.push_back({GateKind::RY, {q}, {AngleRef::constant(0.3 + q)}});
      t.gates.push_back({GateKind::RX, {q}, {AngleRef::constant(1.1 - q)}});
    }
    std::size_t slot = 0;
    for (std::size_t q = 0; q < 3; ++q) {
      std::vector<std::size_t> targets{q};
      if (wire_count(kind) == 2) targets.push_back((q + 1) % 3);
      std::vector<AngleRef> refs;
      for (std::size_t a = 0; a < angle_count(kind); ++a) refs.push_back(AngleRef::param(slot++));
      t.gates.push_back({kind, targets, refs});
    }
    t.gates.push_back({GateKind::CNOT, {0, 1}, {}});
    for (std::size_t q = 0; q < 3; ++q) {
      t.gates.push_back({GateKind::RY, {q}, {AngleRef::constant(0.7)}});
    }
    t.param_slots = slot;
    t.validate();
    for (int draw = 0; draw < 10; ++draw) {
      std::vector<double> theta(slot);
      for (auto& v : theta) v = u(rng);
      const Jacobian jac = parameter_shift_grad(t, theta, {});
      for (std::size_t j = 0; j < slot; ++j) {
        auto hi = theta, lo = theta;
        hi[j] += 1e-4;
        lo[j] -= 1e-4;
        const auto fh = run_circuit(t, hi, {}), fl = run_circuit(t, lo, {});
        for (std::size_t q = 0; q < 3; ++q) {
          EXPECT_NEAR(jac(q, j), (fh[q] - fl[q]) / 2e-4, 1e-5) << gate_name(kind);
        }
      }
    }
  }
}

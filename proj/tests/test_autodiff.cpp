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

#include "qcbnn/autodiff.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace qcbnn;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : t.values) v = u(rng);
  return t;
}

bool close_relative(double a, double b, double rel, double abs_floor = 1e-8) {
  const double diff = std::abs(a - b);
  return diff <= abs_floor || diff <= rel * std::max(std::abs(a), std::abs(b));
}

/// Builds a scalar loss from leaves holding `inputs` and checks every leaf
/// gradient against central differences (h = 1e-4).
void check_gradients(const std::vector<Tensor>& inputs,
                     const std::function<Var(Tape&, const std::vector<Var>&)>& build) {
  Tape tape;
  std::vector<Var> leaves;
  for (const auto& t : inputs) leaves.push_back(tape.leaf(t, true));
  const Var loss = build(tape, leaves);
  tape.backward(loss);

  auto eval = [&](const std::vector<Tensor>& xs) {
    Tape t2;
    std::vector<Var> l2;
    for (const auto& x : xs) l2.push_back(t2.leaf(x, false));
    return t2.value(build(t2, l2)).item();
  };
  const double h = 1e-4;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      auto hi = inputs, lo = inputs;
      hi[k].values[i] += h;
      lo[k].values[i] -= h;
      const double fd = (eval(hi) - eval(lo)) / (2 * h);
      const double an = tape.grad(leaves[k]).values[i];
      EXPECT_TRUE(close_relative(an, fd, 1e-4)) << "input " << k << " entry " << i
                                                 << ": analytic " << an << " vs fd " << fd;
    }
  }
}

}  // namespace

TEST(conv2d_forward, classifier_shape) {
  const Tensor out = conv2d_forward(Tensor::zeros({28, 28}), Tensor::zeros({16, 2, 2}), 2);
  EXPECT_EQ(out.shape, (std::vector<std::size_t>{16, 14, 14}));
}

TEST(conv2d_forward, ones_kernel_sums_patch) {
  const Tensor out = conv2d_forward(Tensor({2, 2}, {1, 1, 1, 1}), Tensor({1, 2, 2}, {1, 1, 1, 1}), 1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_DOUBLE_EQ(out.values[0], 4.0);
}

TEST(conv2d_forward, zero_kernel_and_errors) {
  std::mt19937_64 rng(1);
  const Tensor out = conv2d_forward(random_tensor({6, 6}, rng), Tensor::zeros({3, 2, 2}), 2);
  for (double v : out.values) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(conv2d_forward(Tensor::zeros({1, 1}), Tensor::zeros({1, 2, 2}), 1),
               std::invalid_argument);
  EXPECT_THROW(conv2d_forward(Tensor::zeros({4, 4}), Tensor::zeros({2, 2}), 1),
               std::invalid_argument);
}

TEST(conv2d_forward, matches_direct_cross_correlation) {
  std::mt19937_64 rng(2);
  const Tensor img = random_tensor({7, 5}, rng), w = random_tensor({2, 2, 2}, rng);
  const Tensor out = conv2d_forward(img, w, 1);
  ASSERT_EQ(out.shape, (std::vector<std::size_t>{2, 6, 4}));
  for (std::size_t f = 0; f < 2; ++f) {
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        double s = 0.0;
        for (std::size_t a = 0; a < 2; ++a) {
          for (std::size_t b = 0; b < 2; ++b) {
            s += img.values[(i + a) * 5 + j + b] * w.values[(f * 2 + a) * 2 + b];
          }
        }
        EXPECT_NEAR(out.values[(f * 6 + i) * 4 + j], s, 1e-15);
      }
    }
  }
}

TEST(dense_forward, identity_and_bias) {
  const Tensor x = Tensor::vector({1.5, -2.0, 0.25});
  Tensor eye = Tensor::zeros({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye.values[i * 3 + i] = 1.0;
  EXPECT_EQ(dense_forward(x, eye, Tensor::zeros({3})).values, x.values);
  const Tensor b = Tensor::vector({0.1, 0.2});
  EXPECT_EQ(dense_forward(x, Tensor::zeros({2, 3}), b).values, b.values);
  EXPECT_THROW(dense_forward(x, Tensor::zeros({2, 2}), b), std::invalid_argument);
}

TEST(dense_forward, hand_computed_three_by_two) {
  const Tensor w({3, 2}, {1, 2, 3, 4, 5, 6});
  const Tensor out = dense_forward(Tensor::vector({1, -1}), w, Tensor::vector({0.5, 0, -0.5}));
  EXPECT_EQ(out.values, (std::vector<double>{-0.5, -1.0, -1.5}));
}

TEST(softmax_cross_entropy, closed_forms) {
  EXPECT_NEAR(softmax_cross_entropy(std::vector<double>{0, 0}, 0), std::log(2.0), 1e-15);
  EXPECT_NEAR(softmax_cross_entropy(std::vector<double>{10, -10}, 0), std::log1p(std::exp(-20.0)),
              1e-18);
  EXPECT_NEAR(softmax_cross_entropy(std::vector<double>{10, -10}, 1),
              20.0 + std::log1p(std::exp(-20.0)), 1e-12);
  EXPECT_THROW(softmax_cross_entropy(std::vector<double>{0, 0}, 2), std::invalid_argument);
  EXPECT_THROW(softmax_cross_entropy(std::vector<double>{0}, 0), std::invalid_argument);
}

TEST(softmax, sums_to_one) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const Tensor l = random_tensor({5}, rng, -50, 50);
    double s = 0.0;
    for (double p : softmax(l.values)) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(tape, square_gradient) {
  Tape tape;
  const Var x = tape.leaf(Tensor::scalar(3.0), true);
  tape.backward(tape.mul(x, x));
  EXPECT_DOUBLE_EQ(tape.grad(x).item(), 6.0);
}

TEST(tape, foreign_variable_and_non_scalar_loss) {
  Tape a, b;
  const Var x = a.leaf(Tensor::scalar(1.0), true);
  EXPECT_THROW(b.backward(x), std::invalid_argument);
  EXPECT_THROW(b.value(x), std::invalid_argument);
  const Var v = a.leaf(Tensor::vector({1, 2}), true);
  EXPECT_THROW(a.backward(v), std::invalid_argument);
}

TEST(tape, unreached_nodes_have_zero_grad) {
  Tape tape;
  const Var x = tape.leaf(Tensor::vector({1, 2}), true);
  const Var y = tape.leaf(Tensor::vector({3, 4}), true);
  tape.backward(tape.sum(x));
  EXPECT_EQ(tape.grad(y).values, (std::vector<double>{0, 0}));
}

TEST(tape_gradients, elementwise_ops_match_finite_differences) {
  std::mt19937_64 rng(4);
  const Tensor a = random_tensor({6}, rng, -2, 2), b = random_tensor({6}, rng, -2, 2);
  const Tensor p = random_tensor({6}, rng, 0.05, 0.95);
  check_gradients({a}, [](Tape& t, const std::vector<Var>& v) { return t.sum(t.tanh(v[0])); });
  check_gradients({a}, [](Tape& t, const std::vector<Var>& v) { return t.sum(t.sigmoid(v[0])); });
  check_gradients({a}, [](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.leaky_relu(v[0], 0.2));
  });
  check_gradients({a}, [](Tape& t, const std::vector<Var>& v) { return t.sum(t.relu(v[0])); });
  check_gradients({a, b}, [](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.mul(t.add(v[0], v[1]), v[1]));
  });
  check_gradients({a}, [](Tape& t, const std::vector<Var>& v) {
    return t.mean(t.scale(v[0], -3.5));
  });
  check_gradients({p}, [](Tape& t, const std::vector<Var>& v) { return t.sum(t.log(v[0])); });
  check_gradients({p}, [](Tape& t, const std::vector<Var>& v) { return t.sum(t.log1m(v[0])); });
  check_gradients({p}, [](Tape& t, const std::vector<Var>& v) { return t.sum(t.logit(v[0])); });
  check_gradients({a}, [](Tape& t, const std::vector<Var>& v) {
    return t.sum(t.clamp(v[0], -0.5, 0.5));
  });
  check_gradients({a, b}, [](Tape& t, const std::vector<Var>& v) {
    const Var parts[] = {t.sum(v[0]), v[1]};
    return t.sum(t.tanh(t.concat(parts)));
  });
}

TEST(tape_gradients, dense_softmax_ce_matches_finite_differences) {
  std::mt19937_64 rng(5);
  check_gradients({random_tensor({7}, rng), random_tensor({3, 7}, rng), random_tensor({3}, rng)},
                  [](Tape& t, const std::vector<Var>& v) {
                    return t.softmax_cross_entropy(t.dense(v[0], v[1], v[2]), 1);
                  });
}

TEST(tape_gradients, conv_dense_ce_composite_matches_finite_differences) {
  std::mt19937_64 rng(6);
  check_gradients({random_tensor({6, 6}, rng, 0, 1), random_tensor({4, 2, 2}, rng),
                   random_tensor({2, 36}, rng, -0.3, 0.3), random_tensor({2}, rng)},
                  [](Tape& t, const std::vector<Var>& v) {
                    const Var h = t.relu(t.conv2d(v[0], v[1], 2));
                    return t.softmax_cross_entropy(t.dense(h, v[2], v[3]), 0);
                  });
}

TEST(adam_step, zero_gradient_keeps_params) {
  std::vector<Tensor> params{Tensor::vector({1.0, -2.0})};
  AdamState st({}, params);
  std::vector<Tensor> grads{Tensor::zeros({2})};
  adam_step(params, grads, st);
  EXPECT_EQ(params[0].values, (std::vector<double>{1.0, -2.0}));
  EXPECT_EQ(st.step, 1u);
}

TEST(adam_step, first_step_moves_by_rate_against_gradient) {
  std::vector<Tensor> params{Tensor::vector({0.0, 0.0})};
  AdamState st({}, params);
  std::vector<Tensor> grads{Tensor::vector({0.5, -3.0})};
  adam_step(params, grads, st);
  // m_hat = g, v_hat = g^2, so the step is rate * g / (|g| + eps).
  EXPECT_NEAR(params[0].values[0], -1e-3 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(params[0].values[1], 1e-3 * 3.0 / (3.0 + 1e-8), 1e-15);
}

TEST(adam_step, shape_mismatch_and_determinism) {
  std::vector<Tensor> params{Tensor::vector({0.0, 0.0})};
  AdamState st({}, params);
  std::vector<Tensor> bad{Tensor::zeros({3})};
  EXPECT_THROW(adam_step(params, bad, st), std::invalid_argument);

  auto run = [] {
    std::mt19937_64 rng(9);
    std::vector<Tensor> p{random_tensor({4}, rng)};
    AdamState s({}, p);
    for (int i = 0; i < 50; ++i) {
      std::vector<Tensor> g{random_tensor({4}, rng)};
      adam_step(p, g, s);
    }
    return p[0].values;
  };
  EXPECT_EQ(run(), run());
}

TEST(tensor, shape_checks) {
  EXPECT_THROW(Tensor({2, 2}, {1, 2, 3}), std::invalid_argument);
  EXPECT_EQ(shape_size({2, 3, 4}), 24u);
  EXPECT_EQ(shape_string({2, 3}), "[2,3]");
}

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
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qcbnn {

/// Row-major dense array of doubles.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);
  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor vector(std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double item() const { return values.at(0); }
  bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

std::size_t shape_size(const std::vector<std::size_t>& shape);
std::string shape_string(const std::vector<std::size_t>& shape);

// Pure forward kernels. The tape ops below wrap these.

/// Valid cross-correlation of a [H,W] image with [F,kh,kw] kernels, no
/// padding or bias. Output [F,H',W'] with H' = (H-kh)/stride + 1.
Tensor conv2d_forward(const Tensor& image, const Tensor& weights, std::size_t stride);
/// weights [m,n] times the flattened input (n values) plus bias [m].
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);
std::vector<double> softmax(std::span<const double> logits);
/// -log softmax(logits)[label], stabilised by max subtraction.
double softmax_cross_entropy(std::span<const double> logits, std::size_t label);

class Tape;

/// Handle to a node on a specific tape.
struct Var {
  std::uint64_t tape_id = 0;
  std::size_t index = 0;
};

/// Reverse-mode tape. Nodes are recorded in creation order, which is a
/// topological order, so backward() simply walks them in reverse.
class Tape {
 public:
  Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = false);

  Var conv2d(Var image, Var weights, std::size_t stride);
  Var dense(Var input, Var weights, Var bias);
  Var relu(Var x);
  Var leaky_relu(Var x, double slope);
  Var tanh(Var x);
  Var sigmoid(Var x);
  /// Forward clamp to [lo, hi]; gradient is zero where clamped.
  Var clamp(Var x, double lo, double hi);
  Var log(Var x);
  /// log(1 - x)
  Var log1m(Var x);
  /// log(x / (1 - x))
  Var logit(Var x);
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, double s);
  Var sum(Var x);
  Var mean(Var x);
  /// Concatenates scalars/vectors into one flat vector.
  Var concat(std::span<const Var> parts);
  Var softmax_cross_entropy(Var logits, std::size_t label);

  const Tensor& value(Var v) const;
  /// Gradient of the last backward() loss; zeros if the node was unreached.
  const Tensor& grad(Var v) const;
  bool requires_grad(Var v) const;

  /// Seeds d loss / d loss = 1 and replays the tape in reverse.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::function<void(Tape&)> backward;
  };

  Node& node(Var v);
  const Node& node(Var v) const;
  Var push(Tensor value, bool requires_grad, std::function<void(Tape&)> backward);
  bool any_requires(std::initializer_list<Var> vars) const;
  Tensor& grad_mut(std::size_t index) { return nodes_[index].grad; }
  template <class F>
  Var unary(Var x, F&& f, std::function<double(double, double)> dfdx);

  std::uint64_t id_;
  std::vector<Node> nodes_;
};

struct AdamConfig {
  double rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moments for a list of parameter tensors.
struct AdamState {
  AdamConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;

  AdamState() = default;
  AdamState(AdamConfig config, std::span<const Tensor> params);
};

/// In-place bias-corrected Adam update. Throws on shape mismatch.
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state);

}  // namespace qcbnn

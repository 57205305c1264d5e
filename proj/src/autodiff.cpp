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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qcbnn {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> v)
    : shape(std::move(s)), values(std::move(v)) {
  if (shape_size(shape) != values.size()) {
    throw std::invalid_argument("tensor value count does not match shape " + shape_string(shape));
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  const auto n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::vector(std::vector<double> v) {
  const auto n = v.size();
  return Tensor({n}, std::move(v));
}

Tensor conv2d_forward(const Tensor& image, const Tensor& weights, std::size_t stride) {
  if (image.shape.size() != 2 || weights.shape.size() != 3 || stride == 0) {
    throw std::invalid_argument("conv2d expects image [H,W], weights [F,kh,kw], stride > 0");
  }
  const std::size_t h = image.shape[0], w = image.shape[1];
  const std::size_t f = weights.shape[0], kh = weights.shape[1], kw = weights.shape[2];
  if (kh > h || kw > w) throw std::invalid_argument("conv2d kernel larger than image");
  const std::size_t oh = (h - kh) / stride + 1, ow = (w - kw) / stride + 1;
  Tensor out = Tensor::zeros({f, oh, ow});
  for (std::size_t k = 0; k < f; ++k) {
    const double* ker = &weights.values[k * kh * kw];
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        double acc = 0.0;
        for (std::size_t a = 0; a < kh; ++a) {
          const double* row = &image.values[(i * stride + a) * w + j * stride];
          for (std::size_t b = 0; b < kw; ++b) acc += ker[a * kw + b] * row[b];
        }
        out.values[(k * oh + i) * ow + j] = acc;
      }
    }
  }
  return out;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (weights.shape.size() != 2 || bias.shape.size() != 1 || bias.shape[0] != weights.shape[0] ||
      weights.shape[1] != input.size()) {
    throw std::invalid_argument("dense shape mismatch: input " + shape_string(input.shape) +
                                ", weights " + shape_string(weights.shape) + ", bias " +
                                shape_string(bias.shape));
  }
  const std::size_t m = weights.shape[0], n = weights.shape[1];
  Tensor out = Tensor::zeros({m});
  for (std::size_t r = 0; r < m; ++r) {
    double acc = bias.values[r];
    const double* wr = &weights.values[r * n];
    for (std::size_t c = 0; c < n; ++c) acc += wr[c] * input.values[c];
    out.values[r] = acc;
  }
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (auto& v : p) v /= z;
  return p;
}

double softmax_cross_entropy(std::span<const double> logits, std::size_t label) {
  if (logits.size() < 2) throw std::invalid_argument("softmax cross-entropy needs >= 2 classes");
  if (label >= logits.size()) throw std::invalid_argument("label out of range");
  const auto top = std::max_element(logits.begin(), logits.end());
  const double mx = *top;
  double rest = 0.0;
  for (auto it = logits.begin(); it != logits.end(); ++it) {
    if (it != top) rest += std::exp(*it - mx);
  }
  return std::log1p(rest) + (mx - logits[label]);
}

namespace {
std::atomic<std::uint64_t> g_next_tape_id{1};
}

Tape::Tape() : id_(g_next_tape_id.fetch_add(1)) {}

Tape::Node& Tape::node(Var v) {
  if (v.tape_id != id_ || v.index >= nodes_.size()) {
    throw std::invalid_argument("variable is not on this tape");
  }
  return nodes_[v.index];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape_id != id_ || v.index >= nodes_.size()) {
    throw std::invalid_argument("variable is not on this tape");
  }
  return nodes_[v.index];
}

Var Tape::push(Tensor value, bool requires_grad, std::function<void(Tape&)> backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {id_, nodes_.size() - 1};
}

bool Tape::any_requires(std::initializer_list<Var> vars) const {
  for (auto v : vars) {
    if (node(v).requires_grad) return true;
  }
  return false;
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  return push(std::move(value), requires_grad, [](Tape&) {});
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

const Tensor& Tape::grad(Var v) const {
  const auto& n = node(v);
  if (n.grad.values.empty()) {
    static thread_local Tensor empty;
    empty = Tensor::zeros(n.value.shape);
    return empty;
  }
  return n.grad;
}

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

void Tape::backward(Var loss) {
  const auto& ln = node(loss);
  if (ln.value.size() != 1) throw std::invalid_argument("backward needs a scalar loss");
  for (std::size_t i = 0; i <= loss.index; ++i) {
    auto& n = nodes_[i];
    n.grad = n.requires_grad ? Tensor::zeros(n.value.shape) : Tensor{};
  }
  if (!nodes_[loss.index].requires_grad) return;
  nodes_[loss.index].grad.values[0] = 1.0;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    if (nodes_[i].requires_grad && nodes_[i].backward) nodes_[i].backward(*this);
  }
}

Var Tape::conv2d(Var image, Var weights, std::size_t stride) {
  Tensor out = conv2d_forward(value(image), value(weights), stride);
  const std::size_t ii = image.index, wi = weights.index, oi = nodes_.size();
  return push(std::move(out), any_requires({image, weights}), [ii, wi, oi, stride](Tape& t) {
    const Tensor& img = t.nodes_[ii].value;
    const Tensor& w = t.nodes_[wi].value;
    const Tensor& g = t.nodes_[oi].grad;
    const std::size_t width = img.shape[1];
    const std::size_t f = w.shape[0], kh = w.shape[1], kw = w.shape[2];
    const std::size_t oh = g.shape[1], ow = g.shape[2];
    const bool need_w = t.nodes_[wi].requires_grad, need_i = t.nodes_[ii].requires_grad;
    for (std::size_t k = 0; k < f; ++k) {
      for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
          const double go = g.values[(k * oh + i) * ow + j];
          if (go == 0.0) continue;
          for (std::size_t a = 0; a < kh; ++a) {
            for (std::size_t b = 0; b < kw; ++b) {
              const std::size_t pix = (i * stride + a) * width + j * stride + b;
              const std::size_t wix = (k * kh + a) * kw + b;
              if (need_w) t.grad_mut(wi).values[wix] += go * img.values[pix];
              if (need_i) t.grad_mut(ii).values[pix] += go * w.values[wix];
            }
          }
        }
      }
    }
  });
}

Var Tape::dense(Var input, Var weights, Var bias) {
  Tensor out = dense_forward(value(input), value(weights), value(bias));
  const std::size_t xi = input.index, wi = weights.index, bi = bias.index, oi = nodes_.size();
  return push(std::move(out), any_requires({input, weights, bias}), [=](Tape& t) {
    const Tensor& x = t.nodes_[xi].value;
    const Tensor& w = t.nodes_[wi].value;
    const Tensor& g = t.nodes_[oi].grad;
    const std::size_t m = w.shape[0], n = w.shape[1];
    const bool need_x = t.nodes_[xi].requires_grad, need_w = t.nodes_[wi].requires_grad,
               need_b = t.nodes_[bi].requires_grad;
    for (std::size_t r = 0; r < m; ++r) {
      const double go = g.values[r];
      if (need_b) t.grad_mut(bi).values[r] += go;
      if (go == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (need_w) t.grad_mut(wi).values[r * n + c] += go * x.values[c];
        if (need_x) t.grad_mut(xi).values[c] += go * w.values[r * n + c];
      }
    }
  });
}

template <class F>
Var Tape::unary(Var x, F&& f, std::function<double(double, double)> dfdx) {
  const Tensor& in = value(x);
  Tensor out = Tensor::zeros(in.shape);
  for (std::size_t i = 0; i < in.size(); ++i) out.values[i] = f(in.values[i]);
  const std::size_t xi = x.index, oi = nodes_.size();
  return push(std::move(out), any_requires({x}), [xi, oi, dfdx = std::move(dfdx)](Tape& t) {
    const Tensor& in = t.nodes_[xi].value;
    const Tensor& y = t.nodes_[oi].value;
    const Tensor& g = t.nodes_[oi].grad;
    auto& gx = t.grad_mut(xi).values;
    for (std::size_t i = 0; i < in.size(); ++i) gx[i] += g.values[i] * dfdx(in.values[i], y.values[i]);
  });
}

Var Tape::relu(Var x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var Tape::leaky_relu(Var x, double slope) {
  return unary(
      x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Var Tape::tanh(Var x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var Tape::sigmoid(Var x) {
  return unary(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var Tape::clamp(Var x, double lo, double hi) {
  return unary(
      x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v < lo || v > hi) ? 0.0 : 1.0; });
}

Var Tape::log(Var x) {
  for (double v : value(x).values) {
    if (!(v > 0.0)) throw std::domain_error("log of non-positive value");
  }
  return unary(
      x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Var Tape::log1m(Var x) {
  for (double v : value(x).values) {
    if (!(v < 1.0)) throw std::domain_error("log(1 - x) with x >= 1");
  }
  return unary(
      x, [](double v) { return std::log1p(-v); }, [](double v, double) { return -1.0 / (1.0 - v); });
}

Var Tape::logit(Var x) {
  for (double v : value(x).values) {
    if (!(v > 0.0 && v < 1.0)) throw std::domain_error("logit needs p in (0, 1)");
  }
  return unary(
      x, [](double v) { return std::log(v / (1.0 - v)); },
      [](double v, double) { return 1.0 / (v * (1.0 - v)); });
}

Var Tape::add(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!va.same_shape(vb)) throw std::invalid_argument("add shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += vb.values[i];
  const std::size_t ai = a.index, bi = b.index, oi = nodes_.size();
  return push(std::move(out), any_requires({a, b}), [ai, bi, oi](Tape& t) {
    const Tensor& g = t.nodes_[oi].grad;
    for (std::size_t idx : {ai, bi}) {
      if (!t.nodes_[idx].requires_grad) continue;
      auto& gi = t.grad_mut(idx).values;
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g.values[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!va.same_shape(vb)) throw std::invalid_argument("mul shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] *= vb.values[i];
  const std::size_t ai = a.index, bi = b.index, oi = nodes_.size();
  return push(std::move(out), any_requires({a, b}), [ai, bi, oi](Tape& t) {
    const Tensor& g = t.nodes_[oi].grad;
    const Tensor& va = t.nodes_[ai].value;
    const Tensor& vb = t.nodes_[bi].value;
    if (t.nodes_[ai].requires_grad) {
      for (std::size_t i = 0; i < g.size(); ++i) t.grad_mut(ai).values[i] += g.values[i] * vb.values[i];
    }
    if (t.nodes_[bi].requires_grad) {
      for (std::size_t i = 0; i < g.size(); ++i) t.grad_mut(bi).values[i] += g.values[i] * va.values[i];
    }
  });
}

Var Tape::scale(Var x, double s) {
  return unary(
      x, [s](double v) { return s * v; }, [s](double, double) { return s; });
}

Var Tape::sum(Var x) {
  double acc = 0.0;
  for (double v : value(x).values) acc += v;
  const std::size_t xi = x.index, oi = nodes_.size();
  return push(Tensor::scalar(acc), any_requires({x}), [xi, oi](Tape& t) {
    const double g = t.nodes_[oi].grad.values[0];
    for (auto& v : t.grad_mut(xi).values) v += g;
  });
}

Var Tape::mean(Var x) {
  const double n = static_cast<double>(value(x).size());
  return scale(sum(x), 1.0 / n);
}

Var Tape::concat(std::span<const Var> parts) {
  std::vector<double> vals;
  bool req = false;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // node index, offset
  for (auto p : parts) {
    const auto& n = node(p);
    spans.emplace_back(p.index, vals.size());
    vals.insert(vals.end(), n.value.values.begin(), n.value.values.end());
    req = req || n.requires_grad;
  }
  const std::size_t oi = nodes_.size();
  return push(Tensor::vector(std::move(vals)), req, [spans, oi](Tape& t) {
    const Tensor& g = t.nodes_[oi].grad;
    for (auto [idx, off] : spans) {
      if (!t.nodes_[idx].requires_grad) continue;
      auto& gi = t.grad_mut(idx).values;
      for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += g.values[off + i];
    }
  });
}

Var Tape::softmax_cross_entropy(Var logits, std::size_t label) {
  const Tensor& l = value(logits);
  const double loss = qcbnn::softmax_cross_entropy(l.values, label);
  const std::size_t li = logits.index, oi = nodes_.size();
  return push(Tensor::scalar(loss), any_requires({logits}), [li, oi, label](Tape& t) {
    const double g = t.nodes_[oi].grad.values[0];
    const auto p = qcbnn::softmax(t.nodes_[li].value.values);
    auto& gl = t.grad_mut(li).values;
    for (std::size_t i = 0; i < p.size(); ++i) gl[i] += g * (p[i] - (i == label ? 1.0 : 0.0));
  });
}

AdamState::AdamState(AdamConfig cfg, std::span<const Tensor> params) : config(cfg) {
  for (const auto& p : params) {
    first_moment.push_back(Tensor::zeros(p.shape));
    second_moment.push_back(Tensor::zeros(p.shape));
  }
}

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw std::invalid_argument("adam: parameter, gradient and moment counts differ");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k].same_shape(grads[k]) || !params[k].same_shape(state.first_moment[k])) {
      throw std::invalid_argument("adam: shape mismatch for parameter " + std::to_string(k));
    }
  }
  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k].values;
    const auto& g = grads[k].values;
    auto& m = state.first_moment[k].values;
    auto& v = state.second_moment[k].values;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= c.rate * mhat / (std::sqrt(vhat) + c.epsilon);
    }
  }
}

}  // namespace qcbnn

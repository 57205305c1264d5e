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

#include "qcbnn/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace qcbnn {

NoiseVector sample_noise(Rng& rng, const NoiseLaw& law, std::size_t dim) {
  NoiseVector z(dim);
  if (law.kind == NoiseLaw::Kind::Uniform) {
    if (law.high == law.low) {
      std::fill(z.begin(), z.end(), law.low);
      return z;
    }
    std::uniform_real_distribution<double> u(law.low, law.high);
    for (auto& v : z) v = u(rng);
  } else {
    if (law.sigma == 0.0) {
      std::fill(z.begin(), z.end(), law.mean);
      return z;
    }
    std::normal_distribution<double> n(law.mean, law.sigma);
    for (auto& v : z) v = n(rng);
  }
  return z;
}

Tensor WeightSample::conv_weights() const { return Tensor({kFilters, kKernel, kKernel}, flat); }

std::vector<std::vector<double>> chunks_from_flat(std::span<const double> flat) {
  if (flat.size() != kConvWeights) throw std::invalid_argument("flat weight count must be 64");
  std::vector<std::vector<double>> chunks(kChunks);
  for (std::size_t c = 0; c < kChunks; ++c) {
    chunks[c].assign(flat.begin() + c * kChunkDim, flat.begin() + (c + 1) * kChunkDim);
  }
  return chunks;
}

// ---------------------------------------------------------------- quantum

QuantumGenerator::QuantumGenerator(CircuitTemplate tmpl, std::vector<double> theta, NoiseLaw law)
    : tmpl_(std::move(tmpl)), law_(law) {
  tmpl_.validate();
  if (tmpl_.output_count() != kChunkDim) {
    throw std::invalid_argument("quantum sampler needs a template with 4 outputs");
  }
  if (theta.size() != tmpl_.param_slots) {
    throw std::invalid_argument("slot mismatch: theta has " + std::to_string(theta.size()) +
                                " values, template expects " +
                                std::to_string(tmpl_.param_slots));
  }
  params_.push_back(Tensor::vector(std::move(theta)));
}

QuantumGenerator QuantumGenerator::random_init(CircuitTemplate tmpl, Rng& rng, NoiseLaw law) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  std::vector<double> theta(tmpl.param_slots);
  for (auto& t : theta) t = u(rng);
  return QuantumGenerator(std::move(tmpl), std::move(theta), law);
}

std::vector<double> QuantumGenerator::generate(std::size_t, std::span<const double> noise) const {
  return run_circuit(tmpl_, params_[0].values, noise);
}

void QuantumGenerator::accumulate_vjp(std::size_t, std::span<const double> noise,
                                      std::span<const double> upstream,
                                      std::vector<Tensor>& grads) const {
  const Jacobian jac = parameter_shift_grad(tmpl_, params_[0].values, noise);
  auto& g = grads[0].values;
  for (std::size_t q = 0; q < jac.outputs; ++q) {
    if (upstream[q] == 0.0) continue;
    for (std::size_t j = 0; j < jac.params; ++j) g[j] += upstream[q] * jac(q, j);
  }
}

// -------------------------------------------------------------- classical

ClassicalGenerator::ClassicalGenerator(std::vector<Tensor> params, NoiseLaw law)
    : law_(law), params_(std::move(params)) {
  if (params_.size() != 4 || params_[0].shape.size() != 2 || params_[0].shape[0] != kHidden ||
      params_[1].shape != std::vector<std::size_t>{kHidden} ||
      params_[2].shape != std::vector<std::size_t>{kChunkDim, kHidden} ||
      params_[3].shape != std::vector<std::size_t>{kChunkDim}) {
    throw std::invalid_argument("classical generator expects W1 [8,d], b1 [8], W2 [4,8], b2 [4]");
  }
}

ClassicalGenerator ClassicalGenerator::zeros(std::size_t noise_dim, NoiseLaw law) {
  return ClassicalGenerator({Tensor::zeros({kHidden, noise_dim}), Tensor::zeros({kHidden}),
                             Tensor::zeros({kChunkDim, kHidden}), Tensor::zeros({kChunkDim})},
                            law);
}

ClassicalGenerator ClassicalGenerator::random_init(std::size_t noise_dim, Rng& rng, NoiseLaw law) {
  ClassicalGenerator g = zeros(noise_dim, law);
  std::normal_distribution<double> n1(0.0, 1.0 / std::sqrt(static_cast<double>(noise_dim)));
  std::normal_distribution<double> n2(0.0, 1.0 / std::sqrt(static_cast<double>(kHidden)));
  for (auto& v : g.params_[0].values) v = n1(rng);
  for (auto& v : g.params_[2].values) v = n2(rng);
  return g;
}

std::vector<double> ClassicalGenerator::generate(std::size_t, std::span<const double> noise) const {
  const Tensor z = Tensor::vector({noise.begin(), noise.end()});
  Tensor h = dense_forward(z, params_[0], params_[1]);
  for (auto& v : h.values) v = std::tanh(v);
  Tensor out = dense_forward(h, params_[2], params_[3]);
  for (auto& v : out.values) v = std::tanh(v);
  return out.values;
}

void ClassicalGenerator::accumulate_vjp(std::size_t, std::span<const double> noise,
                                        std::span<const double> upstream,
                                        std::vector<Tensor>& grads) const {
  Tape tape;
  std::vector<Var> p;
  for (const auto& t : params_) p.push_back(tape.leaf(t, true));
  const Var z = tape.leaf(Tensor::vector({noise.begin(), noise.end()}));
  const Var h = tape.tanh(tape.dense(z, p[0], p[1]));
  const Var out = tape.tanh(tape.dense(h, p[2], p[3]));
  const Var up = tape.leaf(Tensor::vector({upstream.begin(), upstream.end()}));
  tape.backward(tape.sum(tape.mul(out, up)));
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto& g = tape.grad(p[k]).values;
    for (std::size_t i = 0; i < g.size(); ++i) grads[k].values[i] += g[i];
  }
}

// --------------------------------------------------------------- gaussian

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double gaussian_kl(double mu, double sigma, double prior_mu, double prior_sigma) {
  const double d = mu - prior_mu;
  return std::log(prior_sigma / sigma) + (sigma * sigma + d * d) / (2.0 * prior_sigma * prior_sigma) -
         0.5;
}

GaussianGenerator::GaussianGenerator(Tensor mu, Tensor rho) {
  if (mu.size() != kConvWeights || rho.size() != kConvWeights) {
    throw std::invalid_argument("gaussian posterior expects 64 means and 64 scales");
  }
  params_ = {std::move(mu), std::move(rho)};
}

GaussianGenerator GaussianGenerator::init(Rng& rng, double initial_sigma) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<double> mu(kConvWeights), rho(kConvWeights);
  for (auto& v : mu) v = u(rng);
  const double r = std::log(std::expm1(initial_sigma));
  std::fill(rho.begin(), rho.end(), r);
  return GaussianGenerator(Tensor::vector(std::move(mu)), Tensor::vector(std::move(rho)));
}

std::vector<double> GaussianGenerator::generate(std::size_t chunk,
                                                std::span<const double> noise) const {
  std::vector<double> out(kChunkDim);
  for (std::size_t k = 0; k < kChunkDim; ++k) {
    const std::size_t i = chunk * kChunkDim + k;
    out[k] = params_[0].values[i] + softplus(params_[1].values[i]) * noise[k];
  }
  return out;
}

void GaussianGenerator::accumulate_vjp(std::size_t chunk, std::span<const double> noise,
                                       std::span<const double> upstream,
                                       std::vector<Tensor>& grads) const {
  for (std::size_t k = 0; k < kChunkDim; ++k) {
    const std::size_t i = chunk * kChunkDim + k;
    const double rho = params_[1].values[i];
    const double dsigma = 1.0 / (1.0 + std::exp(-rho));
    grads[0].values[i] += upstream[k];
    grads[1].values[i] += upstream[k] * noise[k] * dsigma;
  }
}

double GaussianGenerator::kl_to_prior(double prior_sigma, std::vector<Tensor>* grads,
                                      double weight) const {
  double kl = 0.0;
  const double s2 = prior_sigma * prior_sigma;
  for (std::size_t i = 0; i < kConvWeights; ++i) {
    const double mu = params_[0].values[i];
    const double rho = params_[1].values[i];
    const double sigma = softplus(rho);
    kl += gaussian_kl(mu, sigma, 0.0, prior_sigma);
    if (grads) {
      const double dsigma = 1.0 / (1.0 + std::exp(-rho));
      (*grads)[0].values[i] += weight * mu / s2;
      (*grads)[1].values[i] += weight * (-1.0 / sigma + sigma / s2) * dsigma;
    }
  }
  return kl;
}

WeightGenerator& as_generator(AnyGenerator& g) {
  return std::visit([](auto& x) -> WeightGenerator& { return x; }, g);
}

const WeightGenerator& as_generator(const AnyGenerator& g) {
  return std::visit([](const auto& x) -> const WeightGenerator& { return x; }, g);
}

// --------------------------------------------------------------- sampling

WeightSample replay_weights(const WeightGenerator& gen, std::vector<NoiseVector> noise) {
  if (noise.size() != kChunks) throw std::invalid_argument("need one noise vector per chunk");
  WeightSample s;
  s.noise_used = std::move(noise);
  s.flat.reserve(kConvWeights);
  for (std::size_t c = 0; c < kChunks; ++c) {
    auto chunk = gen.generate(c, s.noise_used[c]);
    if (chunk.size() != kChunkDim) throw std::logic_error("generator chunk must have 4 values");
    s.flat.insert(s.flat.end(), chunk.begin(), chunk.end());
    s.chunks.push_back(std::move(chunk));
  }
  return s;
}

WeightSample sample_weights(const WeightGenerator& gen, Rng& rng) {
  std::vector<NoiseVector> noise;
  noise.reserve(kChunks);
  for (std::size_t c = 0; c < kChunks; ++c) {
    noise.push_back(sample_noise(rng, gen.noise_law(), gen.noise_dim()));
  }
  return replay_weights(gen, std::move(noise));
}

WeightSample quantum_sample_weights(const CircuitTemplate& tmpl, std::span<const double> theta,
                                    Rng& rng, const NoiseLaw& law) {
  const QuantumGenerator gen(tmpl, {theta.begin(), theta.end()}, law);
  return sample_weights(gen, rng);
}

WeightSample classical_sample_weights(const std::vector<Tensor>& gen_params, Rng& rng,
                                      const NoiseLaw& law) {
  const ClassicalGenerator gen(gen_params, law);
  return sample_weights(gen, rng);
}

std::vector<double> prior_sample(const PriorSpec& spec, Rng& rng) {
  std::vector<double> w(spec.dimension);
  if (spec.law == PriorSpec::Law::Uniform) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : w) v = u(rng);
  } else if (spec.sigma == 0.0) {
    std::fill(w.begin(), w.end(), std::clamp(spec.mu, -1.0, 1.0));
  } else {
    std::normal_distribution<double> n(spec.mu, spec.sigma);
    for (auto& v : w) v = std::clamp(n(rng), -1.0, 1.0);
  }
  return w;
}

// ---------------------------------------------------------- discriminator

DiscriminatorParams DiscriminatorParams::zeros(std::size_t input_dim) {
  return {{Tensor::zeros({kHidden, input_dim}), Tensor::zeros({kHidden}),
           Tensor::zeros({1, kHidden}), Tensor::zeros({1})}};
}

DiscriminatorParams DiscriminatorParams::random_init(Rng& rng, std::size_t input_dim) {
  auto d = zeros(input_dim);
  std::normal_distribution<double> n1(0.0, 1.0 / std::sqrt(static_cast<double>(input_dim)));
  std::normal_distribution<double> n2(0.0, 1.0 / std::sqrt(static_cast<double>(kHidden)));
  for (auto& v : d.tensors[0].values) v = n1(rng);
  for (auto& v : d.tensors[2].values) v = n2(rng);
  return d;
}

double discriminate(const DiscriminatorParams& phi, std::span<const double> chunk) {
  const Tensor x = Tensor::vector({chunk.begin(), chunk.end()});
  Tensor h = dense_forward(x, phi.tensors[0], phi.tensors[1]);
  for (auto& v : h.values) v = v > 0.0 ? v : DiscriminatorParams::kLeakySlope * v;
  const double a = dense_forward(h, phi.tensors[2], phi.tensors[3]).values[0];
  const double p = 1.0 / (1.0 + std::exp(-a));
  return std::clamp(p, DiscriminatorParams::kClamp, 1.0 - DiscriminatorParams::kClamp);
}

Var discriminate(Tape& tape, std::span<const Var> phi, Var chunk) {
  const Var h = tape.leaky_relu(tape.dense(chunk, phi[0], phi[1]), DiscriminatorParams::kLeakySlope);
  const Var p = tape.sigmoid(tape.dense(h, phi[2], phi[3]));
  return tape.clamp(p, DiscriminatorParams::kClamp, 1.0 - DiscriminatorParams::kClamp);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("logit needs p in the open interval (0, 1)");
  return std::log(p / (1.0 - p));
}

void write_weight_samples_csv(std::ostream& os, std::span<const WeightSample> samples) {
  os << "pass_index,qubit,value\n";
  std::size_t pass = 0;
  const auto old_precision = os.precision(17);
  for (const auto& s : samples) {
    for (const auto& chunk : s.chunks) {
      for (std::size_t q = 0; q < chunk.size(); ++q) os << pass << ',' << q << ',' << chunk[q] << '\n';
      ++pass;
    }
  }
  os.precision(old_precision);
}

}  // namespace qcbnn

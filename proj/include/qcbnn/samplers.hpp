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
#include <numbers>
#include <span>
#include <variant>
#include <vector>

#include "qcbnn/autodiff.hpp"
#include "qcbnn/circuit.hpp"
#include "qcbnn/parallel.hpp"

namespace qcbnn {

/// Geometry of the stochastic convolution: 16 kernels of 2x2, generated as
/// 16 independent 4-component chunks (chunk f is kernel f, row-major).
inline constexpr std::size_t kFilters = 16;
inline constexpr std::size_t kKernel = 2;
inline constexpr std::size_t kChunkDim = kKernel * kKernel;
inline constexpr std::size_t kChunks = kFilters;
inline constexpr std::size_t kConvWeights = kChunks * kChunkDim;

struct NoiseLaw {
  enum class Kind { Uniform, Gaussian };
  Kind kind = Kind::Uniform;
  double low = 0.0;
  double high = 2.0 * std::numbers::pi;
  double mean = 0.0;
  double sigma = 1.0;

  static NoiseLaw uniform(double low, double high) { return {Kind::Uniform, low, high, 0.0, 1.0}; }
  static NoiseLaw gaussian(double mean, double sigma) {
    return {Kind::Gaussian, 0.0, 0.0, mean, sigma};
  }
};

using NoiseVector = std::vector<double>;

NoiseVector sample_noise(Rng& rng, const NoiseLaw& law, std::size_t dim);

struct WeightSample {
  std::vector<std::vector<double>> chunks;  // kChunks x chunk_dim
  std::vector<NoiseVector> noise_used;      // one per chunk
  std::vector<double> flat;                 // concatenated chunks

  /// Kernels as [16, 2, 2].
  Tensor conv_weights() const;
};

/// Rebuilds the chunk list from a flat [16,2,2] weight vector.
std::vector<std::vector<double>> chunks_from_flat(std::span<const double> flat);

enum class GeneratorKind { Quantum, Classical, Gaussian };

/// Common surface of the weight generators. A generator maps one noise
/// vector to one 4-component chunk and can pull a chunk-space gradient back
/// onto its own parameters.
class WeightGenerator {
 public:
  virtual ~WeightGenerator() = default;
  virtual GeneratorKind kind() const = 0;
  virtual std::size_t noise_dim() const = 0;
  virtual const NoiseLaw& noise_law() const = 0;
  virtual std::vector<Tensor>& params() = 0;
  virtual const std::vector<Tensor>& params() const = 0;
  virtual std::vector<double> generate(std::size_t chunk, std::span<const double> noise) const = 0;
  /// grads[k] += (d chunk / d params[k])^T upstream
  virtual void accumulate_vjp(std::size_t chunk, std::span<const double> noise,
                              std::span<const double> upstream,
                              std::vector<Tensor>& grads) const = 0;
};

/// Noise -> PQC -> per-wire <Z>. The only trainable tensor is theta.
class QuantumGenerator final : public WeightGenerator {
 public:
  QuantumGenerator(CircuitTemplate tmpl, std::vector<double> theta, NoiseLaw law = {});
  static QuantumGenerator random_init(CircuitTemplate tmpl, Rng& rng, NoiseLaw law = {});

  GeneratorKind kind() const override { return GeneratorKind::Quantum; }
  std::size_t noise_dim() const override { return tmpl_.input_slots; }
  const NoiseLaw& noise_law() const override { return law_; }
  std::vector<Tensor>& params() override { return params_; }
  const std::vector<Tensor>& params() const override { return params_; }
  std::vector<double> generate(std::size_t chunk, std::span<const double> noise) const override;
  void accumulate_vjp(std::size_t chunk, std::span<const double> noise,
                      std::span<const double> upstream,
                      std::vector<Tensor>& grads) const override;

  const CircuitTemplate& circuit() const { return tmpl_; }
  std::span<const double> theta() const { return params_[0].values; }

 private:
  CircuitTemplate tmpl_;
  NoiseLaw law_;
  std::vector<Tensor> params_;
};

/// Classical benchmark: noise_dim -> 8 -> 4 with tanh on both layers.
class ClassicalGenerator final : public WeightGenerator {
 public:
  static constexpr std::size_t kHidden = 8;

  ClassicalGenerator(std::vector<Tensor> params, NoiseLaw law = {});
  static ClassicalGenerator random_init(std::size_t noise_dim, Rng& rng, NoiseLaw law = {});
  static ClassicalGenerator zeros(std::size_t noise_dim, NoiseLaw law = {});

  GeneratorKind kind() const override { return GeneratorKind::Classical; }
  std::size_t noise_dim() const override { return params_[0].shape[1]; }
  const NoiseLaw& noise_law() const override { return law_; }
  std::vector<Tensor>& params() override { return params_; }
  const std::vector<Tensor>& params() const override { return params_; }
  std::vector<double> generate(std::size_t chunk, std::span<const double> noise) const override;
  void accumulate_vjp(std::size_t chunk, std::span<const double> noise,
                      std::span<const double> upstream,
                      std::vector<Tensor>& grads) const override;

 private:
  NoiseLaw law_;
  std::vector<Tensor> params_;  // W1 [8,d], b1 [8], W2 [4,8], b2 [4]
};

/// Mean-field Gaussian posterior over the 64 kernel weights, sampled by
/// reparameterisation: w = mu + softplus(rho) * eps, eps ~ N(0,1).
class GaussianGenerator final : public WeightGenerator {
 public:
  GaussianGenerator(Tensor mu, Tensor rho);
  static GaussianGenerator init(Rng& rng, double initial_sigma = 0.1);

  GeneratorKind kind() const override { return GeneratorKind::Gaussian; }
  std::size_t noise_dim() const override { return kChunkDim; }
  const NoiseLaw& noise_law() const override { return law_; }
  std::vector<Tensor>& params() override { return params_; }
  const std::vector<Tensor>& params() const override { return params_; }
  std::vector<double> generate(std::size_t chunk, std::span<const double> noise) const override;
  void accumulate_vjp(std::size_t chunk, std::span<const double> noise,
                      std::span<const double> upstream,
                      std::vector<Tensor>& grads) const override;

  /// Sum over weights of KL(N(mu, sigma^2) || N(0, prior_sigma^2)); when
  /// `grads` is given, adds `weight` * dKL/d(mu, rho) to it.
  double kl_to_prior(double prior_sigma, std::vector<Tensor>* grads = nullptr,
                     double weight = 1.0) const;

 private:
  NoiseLaw law_ = NoiseLaw::gaussian(0.0, 1.0);
  std::vector<Tensor> params_;  // mu [64], rho [64]
};

using AnyGenerator = std::variant<QuantumGenerator, ClassicalGenerator, GaussianGenerator>;

WeightGenerator& as_generator(AnyGenerator& g);
const WeightGenerator& as_generator(const AnyGenerator& g);

double softplus(double x);
/// KL(N(mu, sigma^2) || N(prior_mu, prior_sigma^2)).
double gaussian_kl(double mu, double sigma, double prior_mu, double prior_sigma);

/// Draws kChunks noise vectors and runs the generator on each.
WeightSample sample_weights(const WeightGenerator& gen, Rng& rng);
/// Re-runs the generator on recorded noise.
WeightSample replay_weights(const WeightGenerator& gen, std::vector<NoiseVector> noise);

WeightSample quantum_sample_weights(const CircuitTemplate& tmpl, std::span<const double> theta,
                                    Rng& rng, const NoiseLaw& law = {});
WeightSample classical_sample_weights(const std::vector<Tensor>& gen_params, Rng& rng,
                                      const NoiseLaw& law = {});

struct PriorSpec {
  enum class Law { Uniform, ClippedGaussian };
  Law law = Law::Uniform;
  double mu = 0.0;
  double sigma = 0.5;
  std::size_t dimension = kChunkDim;
};

/// A point in [-1, 1]^dimension.
std::vector<double> prior_sample(const PriorSpec& spec, Rng& rng);

/// 4 -> 16 -> 1 network, leaky-rectifier hidden layer, sigmoid output.
struct DiscriminatorParams {
  static constexpr std::size_t kHidden = 16;
  static constexpr double kLeakySlope = 0.2;
  static constexpr double kClamp = 1e-7;

  std::vector<Tensor> tensors;  // W1 [16,4], b1 [16], W2 [1,16], b2 [1]

  static DiscriminatorParams zeros(std::size_t input_dim = kChunkDim);
  static DiscriminatorParams random_init(Rng& rng, std::size_t input_dim = kChunkDim);
};

/// Probability that `chunk` came from the generator, clamped to [eps, 1-eps].
double discriminate(const DiscriminatorParams& phi, std::span<const double> chunk);

/// Tape version: returns the clamped probability node.
Var discriminate(Tape& tape, std::span<const Var> phi, Var chunk);

/// log(p / (1 - p)); throws std::domain_error outside (0, 1).
double logit(double p);

/// CSV rows `pass_index,qubit,value`; pass_index counts chunks across samples.
void write_weight_samples_csv(std::ostream& os, std::span<const WeightSample> samples);

}  // namespace qcbnn

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
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qcbnn/autodiff.hpp"
#include "qcbnn/checkpoint.hpp"
#include "qcbnn/circuit_zoo.hpp"
#include "qcbnn/data_io.hpp"
#include "qcbnn/metrics.hpp"
#include "qcbnn/samplers.hpp"

namespace qcbnn {

/// Stream tags for make_stream(seed, {tag, ...}).
enum StreamTag : std::uint64_t {
  kInitGenerator = 1,
  kInitClassifier = 2,
  kInitDiscriminator = 3,
  kShuffle = 4,
  kWeightDraw = 5,
  kPriorDraw = 6,
  kCurveTrain = 7,
  kCurveValidation = 8,
  kToyNoise = 9,
  kToyPrior = 10,
  kToyCheck = 11,
  kEvaluation = 12,
  kWeightExport = 13,
};

/// Thrown when a loss term becomes non-finite.
class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Which weight source drives the convolution.
enum class ModelKind {
  Quantum,    // PQC Born machine, adversarial KL estimate
  Classical,  // MLP generator, adversarial KL estimate
  PlainVI,    // mean-field Gaussian, analytic KL
};

std::string_view model_kind_name(ModelKind kind);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  std::size_t ensemble = 100;        // members at final evaluation
  std::size_t curve_ensemble = 20;   // members for per-epoch accuracy
  std::size_t weight_samples = 1;    // weight draws per batch
  double alpha = 1.0;
  double beta = 1.0;
  double lr_generator = 1e-3;
  double lr_discriminator = 1e-3;
  double lr_classifier = 1e-3;
  std::uint64_t seed = 0;
  ModelKind model = ModelKind::Quantum;
  ArchitectureId arch = ArchitectureId::CircuitIII;
  std::size_t layers = 1;
  bool reupload = false;
  ZooOptions zoo;
  std::size_t n_qubits = 4;
  std::size_t noise_dim = 4;  // classical generator input width
  NoiseLaw noise;
  PriorSpec prior;
  std::size_t disc_steps = 1;
  std::size_t conv_stride = 2;
  double vi_prior_sigma = 1.0;
  double vi_initial_sigma = 0.1;
  std::size_t threads = 1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct LossBreakdown {
  double likelihood_term = 0.0;      // (N/B) * summed cross-entropy, averaged over draws
  double kl_term = 0.0;              // KL estimate plus the likelihood term
  double discriminator_loss = 0.0;   // G_KL after the discriminator update
  double alpha = 1.0;
  double beta = 1.0;

  double combined() const { return alpha * likelihood_term + beta * kl_term; }
};

/// All trainable parameters plus optimizer moments.
struct ModelState {
  AnyGenerator generator;
  std::vector<Tensor> classifier;  // W [2, features], b [2]
  DiscriminatorParams discriminator;
  AdamState generator_opt;
  AdamState classifier_opt;
  AdamState discriminator_opt;
  std::uint64_t epochs_done = 0;

  WeightGenerator& gen() { return as_generator(generator); }
  const WeightGenerator& gen() const { return as_generator(generator); }
};

inline constexpr std::size_t kClasses = 2;

std::size_t classifier_features(std::size_t height, std::size_t width, std::size_t stride);

/// Fresh model for `cfg` on images of the given size.
ModelState init_model(const TrainConfig& cfg, std::size_t height, std::size_t width);

/// The generator the config asks for, without classifier or discriminator.
AnyGenerator make_generator(const TrainConfig& cfg, Rng& rng);

/// Class probabilities of one image under fixed conv weights [16,2,2].
std::vector<double> classify(const Tensor& image, const Tensor& conv_weights,
                             std::span<const Tensor> classifier, std::size_t stride);

/// G_KL = mean log d(generated) + mean log(1 - d(prior)).
double discriminator_loss(const DiscriminatorParams& phi,
                          std::span<const std::vector<double>> prior_chunks,
                          std::span<const std::vector<double>> generated_chunks);
/// Same value; writes dG_KL/dphi into `grads` (resized to match phi).
double discriminator_loss_grad(const DiscriminatorParams& phi,
                               std::span<const std::vector<double>> prior_chunks,
                               std::span<const std::vector<double>> generated_chunks,
                               std::vector<Tensor>& grads);

/// Estimate: mean over samples of [chunk-mean logit d(chunk) +
/// summed batch cross-entropy under that sample]. `data_scale` multiplies the
/// cross-entropy sum (dataset size / batch size in training).
double generator_loss(const DiscriminatorParams& phi, std::span<const WeightSample> samples,
                      std::span<const Tensor> classifier, const Dataset& data,
                      std::span<const std::size_t> batch, std::size_t stride,
                      double data_scale = 1.0);

struct ObjectiveResult {
  LossBreakdown loss;
  std::vector<Tensor> generator_grads;
  std::vector<Tensor> classifier_grads;
};

/// Combined loss alpha*likelihood + beta*KL for the given noise draws (one
/// noise list per weight sample), with gradients for the generator and the
/// classifier. The discriminator is held fixed.
ObjectiveResult combined_objective(const ModelState& model, const TrainConfig& cfg,
                                   const Dataset& data, std::span<const std::size_t> batch,
                                   std::span<const std::vector<NoiseVector>> noise,
                                   double data_scale, bool with_grad = true);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  LossBreakdown train_loss;  // batch means
  double train_accuracy = 0.0;
  std::optional<double> val_accuracy;
  std::optional<double> val_nll;
};

/// One pass over `train` in shuffled minibatches. Returns the batch-mean losses.
LossBreakdown train_epoch(ModelState& model, const Dataset& train, const TrainConfig& cfg);

/// Runs cfg.epochs epochs, evaluating curve accuracies after each one.
std::vector<EpochRecord> train(ModelState& model, const Dataset& train_set,
                               const Dataset* validation, const TrainConfig& cfg,
                               const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Trains the mean-field Gaussian baseline; rejects the quantum generator.
std::vector<EpochRecord> plain_vi_baseline(ModelState& model, const Dataset& train_set,
                                           const Dataset* validation, const TrainConfig& cfg);

struct EnsembleResult {
  std::vector<EnsemblePrediction> predictions;  // one per image
  std::vector<WeightSample> samples;            // one per member
};

/// N weight draws (member m uses stream (seed, tag, m)), each applied to
/// every image; member outputs are merged in index order.
EnsembleResult predict_ensemble(const ModelState& model, const Dataset& data, std::size_t n,
                                std::uint64_t seed, std::uint64_t tag, std::size_t stride,
                                std::size_t threads = 1);

/// Ensemble prediction from recorded weight samples.
std::vector<EnsemblePrediction> predict_with_samples(const ModelState& model, const Dataset& data,
                                                     std::span<const WeightSample> samples,
                                                     std::size_t stride, std::size_t threads = 1);

double ensemble_accuracy(std::span<const EnsemblePrediction> predictions,
                         std::span<const int> labels);
/// Mean -log p_hat(label).
double ensemble_nll(std::span<const EnsemblePrediction> predictions, std::span<const int> labels);

std::vector<NamedTensor> model_to_checkpoint(const ModelState& model);
/// Overwrites the parameters of `model` (built from the same config).
void model_from_checkpoint(ModelState& model, const std::vector<NamedTensor>& blocks);

struct ToyConfig {
  std::size_t steps = 2000;
  std::size_t batch = 64;
  std::size_t noise_dim = 4;
  NoiseLaw noise;
  PriorSpec prior;
  double lr_generator = 1e-3;
  double lr_discriminator = 1e-2;
  double adam_beta1 = 0.5;
  std::size_t disc_steps = 2;
  std::size_t check_every = 50;
  std::size_t ks_draws = 1000;
  double ks_target = 0.1;
  bool stop_at_target = true;
  std::uint64_t seed = 0;
};

struct ToyCheck {
  std::size_t step = 0;
  double ks = 0.0;  // max over output components
  double discriminator_loss = 0.0;
};

struct ToyResult {
  std::vector<ToyCheck> trace;
  std::optional<std::size_t> reached_at;
  double final_ks = 1.0;
};

/// Largest per-component two-sample KS statistic between generator and prior.
double marginal_ks(const WeightGenerator& gen, const PriorSpec& prior, std::size_t draws,
                   Rng& rng);

/// Likelihood-free adversarial fit of a classical generator to the prior.
ToyResult run_toy_adversarial(const ToyConfig& cfg);

}  // namespace qcbnn

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

#include "qcbnn/bayes_train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qcbnn/parallel.hpp"

namespace qcbnn {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid train config: " + what);
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw TrainingDivergence(std::string("non-finite ") + what + " encountered");
  }
}

std::vector<Tensor> zeros_like(std::span<const Tensor> ts) {
  std::vector<Tensor> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(Tensor::zeros(t.shape));
  return out;
}

std::vector<Var> leaves(Tape& tape, std::span<const Tensor> ts, bool requires_grad) {
  std::vector<Var> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(tape.leaf(t, requires_grad));
  return out;
}

/// Chunks of a list of weight samples, flattened.
std::vector<std::vector<double>> all_chunks(std::span<const WeightSample> samples) {
  std::vector<std::vector<double>> out;
  for (const auto& s : samples) out.insert(out.end(), s.chunks.begin(), s.chunks.end());
  return out;
}

struct LikelihoodGrad {
  double value = 0.0;
  std::vector<double> conv_grad;        // d value / d flat conv weights (64)
  std::vector<Tensor> classifier_grad;  // W, b
};

/// data_scale * sum over batch of cross-entropy under conv weights `w`.
LikelihoodGrad batch_likelihood(const Tensor& w, std::span<const Tensor> classifier,
                                const Dataset& data, std::span<const std::size_t> batch,
                                std::size_t stride, double data_scale, bool with_grad) {
  Tape tape;
  const Var wv = tape.leaf(w, with_grad);
  const auto cls = leaves(tape, classifier, with_grad);
  std::vector<Var> terms;
  terms.reserve(batch.size());
  for (std::size_t idx : batch) {
    const Var img = tape.leaf(data.images[idx]);
    const Var h = tape.relu(tape.conv2d(img, wv, stride));
    const Var logits = tape.dense(h, cls[0], cls[1]);
    terms.push_back(tape.softmax_cross_entropy(logits, static_cast<std::size_t>(data.labels[idx])));
  }
  const Var loss = tape.scale(tape.sum(tape.concat(terms)), data_scale);
  LikelihoodGrad out;
  out.value = tape.value(loss).item();
  if (with_grad) {
    tape.backward(loss);
    out.conv_grad = tape.grad(wv).values;
    for (const auto& c : cls) out.classifier_grad.push_back(tape.grad(c));
  }
  return out;
}

/// logit(d(chunk)) and its gradient with respect to the chunk.
double chunk_logit(const DiscriminatorParams& phi, std::span<const double> chunk,
                   std::vector<double>* grad) {
  if (grad == nullptr) return logit(discriminate(phi, chunk));
  Tape tape;
  const auto p = leaves(tape, phi.tensors, false);
  const Var x = tape.leaf(Tensor::vector({chunk.begin(), chunk.end()}), true);
  const Var l = tape.sum(tape.logit(discriminate(tape, p, x)));
  tape.backward(l);
  *grad = tape.grad(x).values;
  return tape.value(l).item();
}

void discriminator_update(ModelState& model, const TrainConfig& cfg,
                          std::span<const WeightSample> samples, std::uint64_t epoch,
                          std::uint64_t batch_index, LossBreakdown& loss) {
  const auto generated = all_chunks(samples);
  std::vector<Tensor> grads;
  for (std::size_t step = 0; step < cfg.disc_steps; ++step) {
    Rng rng = make_stream(cfg.seed, {kPriorDraw, epoch, batch_index, step});
    std::vector<std::vector<double>> prior(generated.size());
    for (auto& p : prior) p = prior_sample(cfg.prior, rng);
    discriminator_loss_grad(model.discriminator, prior, generated, grads);
    // Ascent on G_KL.
    for (auto& g : grads) {
      for (auto& v : g.values) v = -v;
    }
    adam_step(model.discriminator.tensors, grads, model.discriminator_opt);
    loss.discriminator_loss = discriminator_loss(model.discriminator, prior, generated);
  }
  check_finite(loss.discriminator_loss, "discriminator loss");
}

double fraction_correct(std::span<const EnsemblePrediction> preds, std::span<const int> labels) {
  return ensemble_accuracy(preds, labels);
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Quantum: return "quantum";
    case ModelKind::Classical: return "classical";
    case ModelKind::PlainVI: return "vi";
  }
  return "?";
}

void TrainConfig::validate() const {
  require(epochs > 0, "epochs must be positive");
  require(batch_size > 0, "batch_size must be positive");
  require(ensemble > 0, "ensemble must be positive");
  require(curve_ensemble > 0, "curve_ensemble must be positive");
  require(weight_samples > 0, "weight_samples must be positive");
  require(alpha >= 0.0 && beta >= 0.0 && alpha + beta > 0.0,
          "alpha and beta must be non-negative and not both zero");
  require(lr_generator > 0.0 && lr_discriminator > 0.0 && lr_classifier > 0.0,
          "learning rates must be positive");
  require(layers > 0, "layers must be positive");
  require(n_qubits >= 1 && n_qubits <= kMaxQubits, "n_qubits out of range");
  require(model != ModelKind::Quantum || n_qubits == kChunkDim,
          "quantum generator needs one qubit per chunk component (4)");
  require(noise_dim > 0, "noise_dim must be positive");
  require(disc_steps > 0, "disc_steps must be positive");
  require(conv_stride > 0, "conv_stride must be positive");
  require(vi_prior_sigma > 0.0 && vi_initial_sigma > 0.0, "VI sigmas must be positive");
  require(threads > 0, "threads must be positive");
}

std::size_t classifier_features(std::size_t height, std::size_t width, std::size_t stride) {
  if (height < kKernel || width < kKernel) throw std::invalid_argument("image smaller than kernel");
  const std::size_t oh = (height - kKernel) / stride + 1, ow = (width - kKernel) / stride + 1;
  return kFilters * oh * ow;
}

AnyGenerator make_generator(const TrainConfig& cfg, Rng& rng) {
  switch (cfg.model) {
    case ModelKind::Quantum:
      return QuantumGenerator::random_init(
          assemble_pqc(cfg.arch, cfg.n_qubits, cfg.layers, cfg.reupload, cfg.zoo), rng, cfg.noise);
    case ModelKind::Classical:
      return ClassicalGenerator::random_init(cfg.noise_dim, rng, cfg.noise);
    case ModelKind::PlainVI:
      return GaussianGenerator::init(rng, cfg.vi_initial_sigma);
  }
  throw std::invalid_argument("unknown model kind");
}

ModelState init_model(const TrainConfig& cfg, std::size_t height, std::size_t width) {
  cfg.validate();
  Rng g_rng = make_stream(cfg.seed, {kInitGenerator});
  Rng c_rng = make_stream(cfg.seed, {kInitClassifier});
  Rng d_rng = make_stream(cfg.seed, {kInitDiscriminator});
  ModelState m{make_generator(cfg, g_rng), {}, DiscriminatorParams::random_init(d_rng), {}, {}, {},
               0};
  const std::size_t features = classifier_features(height, width, cfg.conv_stride);
  const double a = std::sqrt(6.0 / static_cast<double>(features + kClasses));
  std::uniform_real_distribution<double> u(-a, a);
  Tensor w = Tensor::zeros({kClasses, features});
  for (auto& v : w.values) v = u(c_rng);
  m.classifier = {std::move(w), Tensor::zeros({kClasses})};
  m.generator_opt = AdamState({cfg.lr_generator}, m.gen().params());
  m.classifier_opt = AdamState({cfg.lr_classifier}, m.classifier);
  m.discriminator_opt = AdamState({cfg.lr_discriminator}, m.discriminator.tensors);
  return m;
}

std::vector<double> classify(const Tensor& image, const Tensor& conv_weights,
                             std::span<const Tensor> classifier, std::size_t stride) {
  Tensor h = conv2d_forward(image, conv_weights, stride);
  for (auto& v : h.values) v = std::max(v, 0.0);
  return softmax(dense_forward(h, classifier[0], classifier[1]).values);
}

double discriminator_loss(const DiscriminatorParams& phi,
                          std::span<const std::vector<double>> prior_chunks,
                          std::span<const std::vector<double>> generated_chunks) {
  if (prior_chunks.empty() || generated_chunks.empty()) {
    throw std::invalid_argument("discriminator loss needs non-empty prior and generated sets");
  }
  double gen = 0.0, pri = 0.0;
  for (const auto& c : generated_chunks) gen += std::log(discriminate(phi, c));
  for (const auto& c : prior_chunks) pri += std::log1p(-discriminate(phi, c));
  return gen / static_cast<double>(generated_chunks.size()) +
         pri / static_cast<double>(prior_chunks.size());
}

double discriminator_loss_grad(const DiscriminatorParams& phi,
                               std::span<const std::vector<double>> prior_chunks,
                               std::span<const std::vector<double>> generated_chunks,
                               std::vector<Tensor>& grads) {
  if (prior_chunks.empty() || generated_chunks.empty()) {
    throw std::invalid_argument("discriminator loss needs non-empty prior and generated sets");
  }
  Tape tape;
  const auto p = leaves(tape, phi.tensors, true);
  std::vector<Var> gen, pri;
  for (const auto& c : generated_chunks) {
    gen.push_back(tape.log(discriminate(tape, p, tape.leaf(Tensor::vector(c)))));
  }
  for (const auto& c : prior_chunks) {
    pri.push_back(tape.log1m(discriminate(tape, p, tape.leaf(Tensor::vector(c)))));
  }
  const Var loss = tape.add(tape.mean(tape.concat(gen)), tape.mean(tape.concat(pri)));
  tape.backward(loss);
  grads.clear();
  for (const auto& v : p) grads.push_back(tape.grad(v));
  return tape.value(loss).item();
}

double generator_loss(const DiscriminatorParams& phi, std::span<const WeightSample> samples,
                      std::span<const Tensor> classifier, const Dataset& data,
                      std::span<const std::size_t> batch, std::size_t stride, double data_scale) {
  if (samples.empty()) throw std::invalid_argument("generator loss needs at least one sample");
  double total = 0.0;
  for (const auto& s : samples) {
    double lg = 0.0;
    for (const auto& c : s.chunks) lg += chunk_logit(phi, c, nullptr);
    lg /= static_cast<double>(s.chunks.size());
    const auto lik =
        batch_likelihood(s.conv_weights(), classifier, data, batch, stride, data_scale, false);
    total += lg + lik.value;
  }
  return total / static_cast<double>(samples.size());
}

ObjectiveResult combined_objective(const ModelState& model, const TrainConfig& cfg,
                                   const Dataset& data, std::span<const std::size_t> batch,
                                   std::span<const std::vector<NoiseVector>> noise,
                                   double data_scale, bool with_grad) {
  if (noise.empty()) throw std::invalid_argument("objective needs at least one noise draw");
  const WeightGenerator& gen = model.gen();
  const bool vi = gen.kind() == GeneratorKind::Gaussian;
  const double s_count = static_cast<double>(noise.size());
  const double a = cfg.alpha, b = cfg.beta;

  ObjectiveResult out;
  out.loss.alpha = a;
  out.loss.beta = b;
  if (with_grad) {
    out.generator_grads = zeros_like(gen.params());
    out.classifier_grads = zeros_like(model.classifier);
  }

  double lik_sum = 0.0, adv_sum = 0.0;
  for (const auto& draw : noise) {
    const WeightSample ws = replay_weights(gen, draw);
    const auto lik = batch_likelihood(ws.conv_weights(), model.classifier, data, batch,
                                      cfg.conv_stride, data_scale, with_grad);
    lik_sum += lik.value;
    const double lik_w = (a + b) / s_count;
    if (with_grad) {
      for (std::size_t k = 0; k < out.classifier_grads.size(); ++k) {
        auto& dst = out.classifier_grads[k].values;
        const auto& src = lik.classifier_grad[k].values;
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += lik_w * src[i];
      }
    }
    const double chunk_count = static_cast<double>(ws.chunks.size());
    double adv = 0.0;
    std::vector<double> upstream(kChunkDim), dlogit;
    for (std::size_t c = 0; c < ws.chunks.size(); ++c) {
      if (!vi) adv += chunk_logit(model.discriminator, ws.chunks[c], with_grad ? &dlogit : nullptr);
      if (!with_grad) continue;
      for (std::size_t k = 0; k < kChunkDim; ++k) {
        upstream[k] = lik_w * lik.conv_grad[c * kChunkDim + k];
        if (!vi) upstream[k] += b / (s_count * chunk_count) * dlogit[k];
      }
      gen.accumulate_vjp(c, ws.noise_used[c], upstream, out.generator_grads);
    }
    adv_sum += adv / chunk_count;
  }
  out.loss.likelihood_term = lik_sum / s_count;
  double kl_estimate = adv_sum / s_count;
  if (vi) {
    const auto& g = std::get<GaussianGenerator>(model.generator);
    kl_estimate = g.kl_to_prior(cfg.vi_prior_sigma, with_grad ? &out.generator_grads : nullptr, b);
  }
  out.loss.kl_term = kl_estimate + out.loss.likelihood_term;
  return out;
}

LossBreakdown train_epoch(ModelState& model, const Dataset& train, const TrainConfig& cfg) {
  cfg.validate();
  if (train.size() == 0) throw std::invalid_argument("training set is empty");
  const std::uint64_t epoch = model.epochs_done;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng = make_stream(cfg.seed, {kShuffle, epoch});
  std::shuffle(order.begin(), order.end(), shuffle_rng);

  WeightGenerator& gen = model.gen();
  const bool adversarial = gen.kind() != GeneratorKind::Gaussian;
  LossBreakdown sum;
  sum.alpha = cfg.alpha;
  sum.beta = cfg.beta;
  std::size_t n_batches = 0;
  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
    const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
    const std::span<const std::size_t> batch(order.data() + start, stop - start);
    const std::uint64_t bi = n_batches;

    std::vector<WeightSample> samples;
    std::vector<std::vector<NoiseVector>> noise;
    for (std::size_t s = 0; s < cfg.weight_samples; ++s) {
      Rng rng = make_stream(cfg.seed, {kWeightDraw, epoch, bi, s});
      samples.push_back(sample_weights(gen, rng));
      noise.push_back(samples.back().noise_used);
    }

    LossBreakdown batch_loss;
    if (adversarial) discriminator_update(model, cfg, samples, epoch, bi, batch_loss);

    const double data_scale =
        static_cast<double>(train.size()) / static_cast<double>(batch.size());
    auto obj = combined_objective(model, cfg, train, batch, noise, data_scale, true);
    check_finite(obj.loss.likelihood_term, "likelihood term");
    check_finite(obj.loss.kl_term, "KL term");
    adam_step(gen.params(), obj.generator_grads, model.generator_opt);
    adam_step(model.classifier, obj.classifier_grads, model.classifier_opt);

    sum.likelihood_term += obj.loss.likelihood_term;
    sum.kl_term += obj.loss.kl_term;
    sum.discriminator_loss += batch_loss.discriminator_loss;
    ++n_batches;
  }
  const double nb = static_cast<double>(n_batches);
  sum.likelihood_term /= nb;
  sum.kl_term /= nb;
  sum.discriminator_loss /= nb;
  ++model.epochs_done;
  return sum;
}

std::vector<EpochRecord> train(ModelState& model, const Dataset& train_set,
                               const Dataset* validation, const TrainConfig& cfg,
                               const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  std::vector<EpochRecord> trace;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    EpochRecord rec;
    rec.train_loss = train_epoch(model, train_set, cfg);
    rec.epoch = static_cast<std::size_t>(model.epochs_done);
    const auto tr = predict_ensemble(model, train_set, cfg.curve_ensemble, cfg.seed,
                                     kCurveTrain * 1000003 + model.epochs_done, cfg.conv_stride,
                                     cfg.threads);
    rec.train_accuracy = fraction_correct(tr.predictions, train_set.labels);
    if (validation != nullptr && validation->size() > 0) {
      const auto va = predict_ensemble(model, *validation, cfg.curve_ensemble, cfg.seed,
                                       kCurveValidation * 1000003 + model.epochs_done,
                                       cfg.conv_stride, cfg.threads);
      rec.val_accuracy = fraction_correct(va.predictions, validation->labels);
      rec.val_nll = ensemble_nll(va.predictions, validation->labels);
    }
    trace.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return trace;
}

std::vector<EpochRecord> plain_vi_baseline(ModelState& model, const Dataset& train_set,
                                           const Dataset* validation, const TrainConfig& cfg) {
  if (cfg.model != ModelKind::PlainVI || model.gen().kind() != GeneratorKind::Gaussian) {
    throw std::invalid_argument(
        "plain VI baseline is unsupported for this generator; it needs the Gaussian "
        "weight posterior");
  }
  return train(model, train_set, validation, cfg);
}

EnsembleResult predict_ensemble(const ModelState& model, const Dataset& data, std::size_t n,
                                std::uint64_t seed, std::uint64_t tag, std::size_t stride,
                                std::size_t threads) {
  if (n == 0) throw std::invalid_argument("ensemble needs N >= 1 members");
  EnsembleResult out;
  out.samples.resize(n);
  const WeightGenerator& gen = model.gen();
  parallel_for(n, threads, [&](std::size_t m) {
    Rng rng = make_stream(seed, {tag, m});
    out.samples[m] = sample_weights(gen, rng);
  });
  out.predictions = predict_with_samples(model, data, out.samples, stride, threads);
  return out;
}

std::vector<EnsemblePrediction> predict_with_samples(const ModelState& model, const Dataset& data,
                                                     std::span<const WeightSample> samples,
                                                     std::size_t stride, std::size_t threads) {
  if (samples.empty()) throw std::invalid_argument("ensemble needs N >= 1 members");
  std::vector<std::vector<std::vector<double>>> member(data.size());
  for (auto& m : member) m.resize(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t s) {
    const Tensor w = samples[s].conv_weights();
    for (std::size_t i = 0; i < data.size(); ++i) {
      member[i][s] = classify(data.images[i], w, model.classifier, stride);
    }
  });
  std::vector<EnsemblePrediction> out;
  out.reserve(data.size());
  for (const auto& m : member) out.push_back(combine_members(m));
  return out;
}

double ensemble_accuracy(std::span<const EnsemblePrediction> predictions,
                         std::span<const int> labels) {
  if (predictions.size() != labels.size() || labels.empty()) {
    throw std::invalid_argument("predictions and labels differ in length");
  }
  std::size_t ok = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) ok += predictions[i].predicted == labels[i];
  return static_cast<double>(ok) / static_cast<double>(labels.size());
}

double ensemble_nll(std::span<const EnsemblePrediction> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size() || labels.empty()) {
    throw std::invalid_argument("predictions and labels differ in length");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = predictions[i].class_probabilities[static_cast<std::size_t>(labels[i])];
    s -= std::log(std::max(p, 1e-300));
  }
  return s / static_cast<double>(labels.size());
}

namespace {

void push_group(std::vector<NamedTensor>& out, const std::string& prefix,
                std::span<const Tensor> ts) {
  for (std::size_t k = 0; k < ts.size(); ++k) {
    out.push_back({prefix + "/" + std::to_string(k), ts[k]});
  }
}

void push_adam(std::vector<NamedTensor>& out, const std::string& prefix, const AdamState& st) {
  push_group(out, prefix + "/m", st.first_moment);
  push_group(out, prefix + "/v", st.second_moment);
  out.push_back({prefix + "/step", Tensor::scalar(static_cast<double>(st.step))});
}

void pull_group(const std::vector<NamedTensor>& blocks, const std::string& prefix,
                std::vector<Tensor>& ts) {
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const Tensor& t = find_tensor(blocks, prefix + "/" + std::to_string(k));
    if (!t.same_shape(ts[k])) {
      throw std::runtime_error("checkpoint tensor " + prefix + "/" + std::to_string(k) +
                               " has shape " + shape_string(t.shape) + ", expected " +
                               shape_string(ts[k].shape));
    }
    ts[k] = t;
  }
}

void pull_adam(const std::vector<NamedTensor>& blocks, const std::string& prefix,
               AdamState& st) {
  pull_group(blocks, prefix + "/m", st.first_moment);
  pull_group(blocks, prefix + "/v", st.second_moment);
  st.step = static_cast<std::uint64_t>(find_tensor(blocks, prefix + "/step").item());
}

}  // namespace

std::vector<NamedTensor> model_to_checkpoint(const ModelState& model) {
  std::vector<NamedTensor> out;
  push_group(out, "generator", model.gen().params());
  push_group(out, "classifier", model.classifier);
  push_group(out, "discriminator", model.discriminator.tensors);
  push_adam(out, "adam/generator", model.generator_opt);
  push_adam(out, "adam/classifier", model.classifier_opt);
  push_adam(out, "adam/discriminator", model.discriminator_opt);
  out.push_back({"epochs_done", Tensor::scalar(static_cast<double>(model.epochs_done))});
  return out;
}

void model_from_checkpoint(ModelState& model, const std::vector<NamedTensor>& blocks) {
  pull_group(blocks, "generator", model.gen().params());
  pull_group(blocks, "classifier", model.classifier);
  pull_group(blocks, "discriminator", model.discriminator.tensors);
  pull_adam(blocks, "adam/generator", model.generator_opt);
  pull_adam(blocks, "adam/classifier", model.classifier_opt);
  pull_adam(blocks, "adam/discriminator", model.discriminator_opt);
  model.epochs_done = static_cast<std::uint64_t>(find_tensor(blocks, "epochs_done").item());
}

double marginal_ks(const WeightGenerator& gen, const PriorSpec& prior, std::size_t draws,
                   Rng& rng) {
  std::vector<std::vector<double>> g(kChunkDim), p(kChunkDim);
  for (std::size_t i = 0; i < draws; ++i) {
    const auto z = sample_noise(rng, gen.noise_law(), gen.noise_dim());
    const auto out = gen.generate(0, z);
    const auto ref = prior_sample(prior, rng);
    for (std::size_t k = 0; k < kChunkDim; ++k) {
      g[k].push_back(out[k]);
      p[k].push_back(ref[k]);
    }
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < kChunkDim; ++k) worst = std::max(worst, ks_statistic(g[k], p[k]));
  return worst;
}

ToyResult run_toy_adversarial(const ToyConfig& cfg) {
  if (cfg.steps == 0 || cfg.batch == 0 || cfg.check_every == 0 || cfg.ks_draws == 0) {
    throw std::invalid_argument("toy run needs positive steps, batch, check interval and draws");
  }
  Rng init = make_stream(cfg.seed, {kInitGenerator});
  ClassicalGenerator gen = ClassicalGenerator::random_init(cfg.noise_dim, init, cfg.noise);
  Rng dinit = make_stream(cfg.seed, {kInitDiscriminator});
  DiscriminatorParams phi = DiscriminatorParams::random_init(dinit);
  AdamState gen_opt({cfg.lr_generator, cfg.adam_beta1}, gen.params());
  AdamState disc_opt({cfg.lr_discriminator, cfg.adam_beta1}, phi.tensors);

  ToyResult result;
  std::vector<Tensor> dgrads;
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    Rng noise_rng = make_stream(cfg.seed, {kToyNoise, step});
    std::vector<NoiseVector> noise(cfg.batch);
    std::vector<std::vector<double>> generated(cfg.batch);
    for (std::size_t i = 0; i < cfg.batch; ++i) {
      noise[i] = sample_noise(noise_rng, cfg.noise, cfg.noise_dim);
      generated[i] = gen.generate(0, noise[i]);
    }
    double dloss = 0.0;
    for (std::size_t k = 0; k < cfg.disc_steps; ++k) {
      Rng prior_rng = make_stream(cfg.seed, {kToyPrior, step, k});
      std::vector<std::vector<double>> prior(cfg.batch);
      for (auto& p : prior) p = prior_sample(cfg.prior, prior_rng);
      dloss = discriminator_loss_grad(phi, prior, generated, dgrads);
      for (auto& g : dgrads) {
        for (auto& v : g.values) v = -v;
      }
      adam_step(phi.tensors, dgrads, disc_opt);
    }
    check_finite(dloss, "discriminator loss");

    // Generator descent on the mean logit (likelihood disabled).
    std::vector<Tensor> ggrads = zeros_like(gen.params());
    std::vector<double> dlogit, upstream(kChunkDim);
    const double w = 1.0 / static_cast<double>(cfg.batch);
    for (std::size_t i = 0; i < cfg.batch; ++i) {
      check_finite(chunk_logit(phi, generated[i], &dlogit), "generator loss");
      for (std::size_t k = 0; k < kChunkDim; ++k) upstream[k] = w * dlogit[k];
      gen.accumulate_vjp(0, noise[i], upstream, ggrads);
    }
    adam_step(gen.params(), ggrads, gen_opt);

    if (step % cfg.check_every == 0 || step == cfg.steps) {
      Rng check_rng = make_stream(cfg.seed, {kToyCheck, step});
      const double ks = marginal_ks(gen, cfg.prior, cfg.ks_draws, check_rng);
      result.trace.push_back({step, ks, dloss});
      result.final_ks = ks;
      if (ks < cfg.ks_target && !result.reached_at) {
        result.reached_at = step;
        if (cfg.stop_at_target) break;
      }
    }
  }
  return result;
}

}  // namespace qcbnn

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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcbnn/bayes_train.hpp"
#include "qcbnn/config.hpp"

namespace qcbnn {

struct LoadedData {
  Dataset train;
  Dataset validation;
  Dataset test;
};

/// Synthetic draws or a dataset file, normalised and split.
LoadedData load_data(const DataConfig& cfg);

/// Per-seed output files.
namespace run_files {
inline constexpr const char* kConfig = "config.txt";
inline constexpr const char* kEpochs = "epochs.csv";
inline constexpr const char* kCheckpoint = "checkpoint.bin";
inline constexpr const char* kEval = "eval.csv";
inline constexpr const char* kPredictions = "predictions.csv";
inline constexpr const char* kWeights = "weights.csv";
inline constexpr const char* kIncomplete = "INCOMPLETE";
inline constexpr const char* kSummary = "summary.csv";
inline constexpr const char* kSweepSummary = "sweep_summary.csv";
}  // namespace run_files

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  std::vector<EpochRecord> epochs;
  EvalReport report;
};

struct CellOutcome {
  SweepCell cell;
  std::filesystem::path dir;
  std::vector<SeedOutcome> seeds;
};

/// Header `epoch,split,likelihood_term,kl_term,discriminator_loss,combined,accuracy,nll`.
void write_epochs_csv(std::ostream& os, std::span<const EpochRecord> epochs);
/// Header `index,label,predicted,p0,p1,votes_class1,members`.
void write_predictions_csv(std::ostream& os, std::span<const EnsemblePrediction> predictions,
                           std::span<const int> labels);
/// Inverse of write_predictions_csv; member votes are rebuilt in class order.
std::vector<EnsemblePrediction> read_predictions_csv(std::istream& is, std::vector<int>& labels);

/// Rows `metric,subset,mean,std,n` over seeds; std is the n-1 sample
/// deviation (0 for a single seed). Undefined per-seed values are skipped.
void write_summary_csv(std::ostream& os, std::span<const SeedOutcome> seeds);

/// Trains one seed into `dir`. An INCOMPLETE marker holds the failure
/// message if training throws.
SeedOutcome run_seed(const RunConfig& cfg, const TrainConfig& train_cfg, const LoadedData& data,
                     const std::filesystem::path& dir, std::ostream* log = nullptr);

/// Every sweep cell and seed, with per-cell summaries and a sweep summary.
std::vector<CellOutcome> run_train(const RunConfig& cfg, std::ostream* log = nullptr);

/// Rebuilds a trained model from a seed directory.
struct LoadedRun {
  RunConfig config;
  ModelState model;
  LoadedData data;
};
LoadedRun load_run(const std::filesystem::path& seed_dir);

/// Re-evaluates a finished seed on its test split; returns the report and
/// writes eval CSV text to `os`.
EvalReport run_evaluate(const std::filesystem::path& seed_dir, std::optional<std::size_t> ensemble,
                        std::optional<std::uint64_t> eval_seed, std::ostream& os);

/// Draws `n` weight samples from a finished seed; writes weights CSV to
/// `weights_os` and the pooled KDE (`x,density`) to `kde_os`.
void run_sample_weights(const std::filesystem::path& seed_dir, std::size_t n,
                        std::uint64_t draw_seed, std::ostream& weights_os, std::ostream& kde_os);

/// Header `step,ks,discriminator_loss`.
void write_toy_csv(std::ostream& os, const ToyResult& result);

/// Pooled kernel weights of a list of samples.
std::vector<double> pooled_weights(std::span<const WeightSample> samples);

}  // namespace qcbnn

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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qcbnn/bayes_train.hpp"
#include "qcbnn/data_io.hpp"
#include "qcbnn/metrics.hpp"

namespace qcbnn {

/// Malformed or inconsistent configuration text.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DataConfig {
  std::string source = "synth";  // "synth" or a dataset file path
  DataFormat format = DataFormat::Binary;
  std::size_t height = 28;
  std::size_t width = 28;
  NormalizeMode normalize = NormalizeMode::PerImage;
  std::array<double, 3> split{0.7, 0.1, 0.2};
  std::uint64_t split_seed = 0;
  // Synthetic source: three independent draws, one per split.
  std::size_t synth_train = 200;
  std::size_t synth_validation = 50;
  std::size_t synth_test = 50;
  double synth_positive_fraction = 0.27;
  double synth_noise = 0.35;
  std::uint64_t synth_seed = 0;
};

struct SweepConfig {
  std::vector<ArchitectureId> archs;  // empty: use train.arch
  std::vector<std::uint64_t> seeds;   // empty: use train.seed
  std::vector<std::size_t> layers;    // zipped with reupload; empty: train.layers
  std::vector<bool> reupload;
};

struct OutputConfig {
  std::filesystem::path out = "results";
  bool report = true;
  SubsetAccuracyMode subset_accuracy = SubsetAccuracyMode::Overall;
  std::size_t calibration_bins = 10;
  std::size_t kde_points = 301;
  double kde_low = -1.5;
  double kde_high = 1.5;
};

struct RunConfig {
  TrainConfig train;
  DataConfig data;
  SweepConfig sweep;
  OutputConfig output;
};

/// One (architecture, layering) combination; seeds run inside it.
struct SweepCell {
  std::string label;  // directory name, e.g. "quantum_circuit_iii_L2_re"
  TrainConfig train;  // seed left at the first sweep seed
};

/// `key = value` lines, `#` comments, optional `[section]` headers. Keys may
/// be written bare or inside their own section. Unknown keys, bad values and
/// conflicting sweep lengths throw ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Applies one `key=value` override on top of `cfg`.
void apply_override(RunConfig& cfg, std::string_view key, std::string_view value);

/// Effective configuration in the same text format; parse_config of the
/// result reproduces `cfg`.
std::string echo_config(const RunConfig& cfg);

std::vector<std::uint64_t> sweep_seeds(const RunConfig& cfg);
std::vector<SweepCell> expand_sweep(const RunConfig& cfg);

/// Every accepted key, as `section.key`.
std::vector<std::string> config_keys();

}  // namespace qcbnn

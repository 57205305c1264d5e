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
#include <iosfwd>
#include <string>
#include <vector>

#include "qcbnn/autodiff.hpp"

namespace qcbnn {

enum class SplitTag : std::uint8_t { Train, Validation, Test };

std::string_view split_name(SplitTag tag);

/// Grayscale images with binary labels (1 = malignant / positive).
struct Dataset {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Tensor> images;  // each [height, width]
  std::vector<int> labels;
  std::vector<SplitTag> tags;  // empty until split()

  std::size_t size() const { return labels.size(); }
  /// Samples carrying `tag`, in their current order.
  Dataset subset(SplitTag tag) const;
  double positive_fraction() const;
};

enum class DataFormat { Binary, Csv };

// Binary container (little-endian):
//   "QBNNDATA"  u32 version  u32 count  u32 H  u32 W
//   labels: count bytes   pixels: count*H*W bytes (raw 0-255)
inline constexpr std::uint32_t kDatasetVersion = 1;

Dataset read_dataset(std::istream& is, DataFormat format, std::size_t height = 28,
                     std::size_t width = 28);
Dataset load_dataset(const std::filesystem::path& path, DataFormat format,
                     std::size_t height = 28, std::size_t width = 28);
/// Pixels must be integers in [0, 255].
void write_dataset(std::ostream& os, const Dataset& ds);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
/// Header `label,p0,...,p{H*W-1}`, one row per image.
void write_dataset_csv(std::ostream& os, const Dataset& ds);

enum class NormalizeMode { PerImage, Global };

/// Min-max scaling to [0, 1]; constant images become all zeros.
Dataset normalize(Dataset ds, NormalizeMode mode = NormalizeMode::PerImage);

/// Scales [0,1] pixels to rounded 0-255 values for the binary container.
Dataset quantize_to_bytes(Dataset ds);

struct SynthSpec {
  std::size_t n_samples = 200;
  std::size_t height = 28;
  std::size_t width = 28;
  double positive_fraction = 0.27;
  double noise = 0.35;
  std::uint64_t seed = 0;
};

/// Class 0: centred Gaussian blob. Class 1: diagonal stripes. Both with
/// additive Gaussian pixel noise, min-max normalised per image.
Dataset synth_generate(const SynthSpec& spec);

/// Deterministic shuffled partition into train/validation/test.
Dataset split(Dataset ds, const std::array<double, 3>& fractions, std::uint64_t seed);
std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& fractions);

}  // namespace qcbnn

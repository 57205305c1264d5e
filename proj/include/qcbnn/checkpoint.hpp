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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qcbnn/autodiff.hpp"

namespace qcbnn {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout (all integers little-endian):
//   "QBNNCKPT"  u32 version  u32 block_count
//   per block:  u32 name_len  name bytes  u32 rank  u32 dims[rank]  f64 values[]
void write_checkpoint(std::ostream& os, const std::vector<NamedTensor>& blocks);
std::vector<NamedTensor> read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& blocks);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

const Tensor& find_tensor(const std::vector<NamedTensor>& blocks, const std::string& name);

}  // namespace qcbnn

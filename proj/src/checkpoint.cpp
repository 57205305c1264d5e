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

#include "qcbnn/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "qcbnn/binary_io.hpp"

namespace qcbnn {

using namespace binary_io;

void write_checkpoint(std::ostream& os, const std::vector<NamedTensor>& blocks) {
  os.write("QBNNCKPT", 8);
  put_u32(os, kCheckpointVersion);
  put_u32(os, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    put_u32(os, static_cast<std::uint32_t>(b.name.size()));
    os.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    put_u32(os, static_cast<std::uint32_t>(b.tensor.shape.size()));
    for (auto d : b.tensor.shape) put_u32(os, static_cast<std::uint32_t>(d));
    for (double v : b.tensor.values) put_f64(os, v);
  }
}

std::vector<NamedTensor> read_checkpoint(std::istream& is) {
  expect_magic(is, "QBNNCKPT");
  const auto version = get_u32(is, "version");
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = get_u32(is, "block count");
  std::vector<NamedTensor> out;
  for (std::uint32_t k = 0; k < count; ++k) {
    NamedTensor nt;
    nt.name.resize(get_u32(is, "name length"));
    read_exact(is, nt.name.data(), nt.name.size(), "name");
    const auto rank = get_u32(is, "rank");
    std::vector<std::size_t> shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(get_u32(is, "dims"));
    std::vector<double> values(shape_size(shape));
    for (auto& v : values) v = get_f64(is, "values");
    nt.tensor = Tensor(std::move(shape), std::move(values));
    out.push_back(std::move(nt));
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& blocks) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_checkpoint(os, blocks);
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(is);
}

const Tensor& find_tensor(const std::vector<NamedTensor>& blocks, const std::string& name) {
  for (const auto& b : blocks) {
    if (b.name == name) return b.tensor;
  }
  throw std::runtime_error("checkpoint has no tensor named '" + name + "'");
}

}  // namespace qcbnn

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

#include "qcbnn/data_io.hpp"
#include "qcbnn/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qcbnn/binary_io.hpp"

namespace qcbnn {

using namespace binary_io;

std::string_view split_name(SplitTag tag) {
  switch (tag) {
    case SplitTag::Train:
      return "train";
    case SplitTag::Validation:
      return "validation";
    case SplitTag::Test:
      return "test";
  }
  return "?";
}

Dataset Dataset::subset(SplitTag tag) const {
  Dataset out;
  out.height = height;
  out.width = width;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] != tag) continue;
    out.images.push_back(images[i]);
    out.labels.push_back(labels[i]);
  }
  return out;
}

double Dataset::positive_fraction() const {
  if (labels.empty()) return 0.0;
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  return static_cast<double>(pos) / static_cast<double>(labels.size());
}

namespace {

Dataset read_binary(std::istream& is) {
  expect_magic(is, "QBNNDATA");
  const auto version = get_u32(is, "version");
  if (version != kDatasetVersion) {
    throw std::runtime_error("unsupported dataset version " + std::to_string(version));
  }
  Dataset ds;
  const auto count = get_u32(is, "count");
  ds.height = get_u32(is, "height");
  ds.width = get_u32(is, "width");
  if (ds.height == 0 || ds.width == 0) throw std::runtime_error("dimension mismatch: zero image size");
  std::vector<unsigned char> labels(count);
  read_exact(is, labels.data(), labels.size(), "labels");
  const std::size_t px = ds.height * ds.width;
  std::vector<unsigned char> buf(px);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (labels[i] > 1) {
      throw std::runtime_error("label outside {0,1} at sample " + std::to_string(i));
    }
    read_exact(is, buf.data(), px, "pixels");
    std::vector<double> v(buf.begin(), buf.end());
    ds.images.emplace_back(std::vector<std::size_t>{ds.height, ds.width}, std::move(v));
    ds.labels.push_back(labels[i]);
  }
  return ds;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view s, std::size_t row, std::size_t col) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("unparseable value '" + std::string(s) + "' at row " +
                             std::to_string(row) + ", column " + std::to_string(col));
  }
  return v;
}

Dataset read_csv(std::istream& is, std::size_t height, std::size_t width) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("truncated container: empty CSV file");
  const std::size_t px = height * width;
  const auto header = split_commas(line);
  if (header.size() != px + 1) {
    throw std::runtime_error("CSV header mismatch: expected " + std::to_string(px + 1) +
                             " columns (label,p0,...,p" + std::to_string(px - 1) + "), got " +
                             std::to_string(header.size()));
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string expected = c == 0 ? "label" : "p" + std::to_string(c - 1);
    if (trim(header[c]) != expected) {
      throw std::runtime_error("CSV header mismatch at column " + std::to_string(c) +
                               ": expected '" + expected + "', got '" +
                               std::string(trim(header[c])) + "'");
    }
  }
  Dataset ds;
  ds.height = height;
  ds.width = width;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != px + 1) {
      throw std::runtime_error("dimension mismatch at row " + std::to_string(row) + ": " +
                               std::to_string(cells.size()) + " columns");
    }
    const double label = parse_number(cells[0], row, 0);
    if (label != 0.0 && label != 1.0) {
      throw std::runtime_error("label outside {0,1} at row " + std::to_string(row));
    }
    std::vector<double> v(px);
    for (std::size_t k = 0; k < px; ++k) {
      v[k] = parse_number(cells[k + 1], row, k + 1);
      if (v[k] < 0.0) throw std::runtime_error("negative pixel at row " + std::to_string(row));
    }
    ds.images.emplace_back(std::vector<std::size_t>{height, width}, std::move(v));
    ds.labels.push_back(static_cast<int>(label));
  }
  return ds;
}

}  // namespace

Dataset read_dataset(std::istream& is, DataFormat format, std::size_t height, std::size_t width) {
  return format == DataFormat::Binary ? read_binary(is) : read_csv(is, height, width);
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format, std::size_t height,
                     std::size_t width) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open dataset " + path.string());
  return read_dataset(is, format, height, width);
}

void write_dataset(std::ostream& os, const Dataset& ds) {
  os.write("QBNNDATA", 8);
  put_u32(os, kDatasetVersion);
  put_u32(os, static_cast<std::uint32_t>(ds.size()));
  put_u32(os, static_cast<std::uint32_t>(ds.height));
  put_u32(os, static_cast<std::uint32_t>(ds.width));
  for (int l : ds.labels) os.put(static_cast<char>(l));
  for (const auto& img : ds.images) {
    for (double v : img.values) {
      if (v < 0.0 || v > 255.0 || v != std::round(v)) {
        throw std::invalid_argument("binary container pixels must be integers in [0, 255]");
      }
      os.put(static_cast<char>(static_cast<unsigned char>(v)));
    }
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_dataset(os, ds);
}

void write_dataset_csv(std::ostream& os, const Dataset& ds) {
  os << "label";
  for (std::size_t k = 0; k < ds.height * ds.width; ++k) os << ",p" << k;
  os << '\n';
  const auto old_precision = os.precision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    os << ds.labels[i];
    for (double v : ds.images[i].values) os << ',' << v;
    os << '\n';
  }
  os.precision(old_precision);
}

Dataset normalize(Dataset ds, NormalizeMode mode) {
  auto rescale = [](Tensor& img, double lo, double hi) {
    if (hi <= lo) {
      std::fill(img.values.begin(), img.values.end(), 0.0);
      return;
    }
    for (auto& v : img.values) v = (v - lo) / (hi - lo);
  };
  if (mode == NormalizeMode::PerImage) {
    for (auto& img : ds.images) {
      const auto [lo, hi] = std::minmax_element(img.values.begin(), img.values.end());
      rescale(img, *lo, *hi);
    }
    return ds;
  }
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& img : ds.images) {
    for (double v : img.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  for (auto& img : ds.images) rescale(img, lo, hi);
  return ds;
}

Dataset quantize_to_bytes(Dataset ds) {
  for (auto& img : ds.images) {
    for (auto& v : img.values) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0);
  }
  return ds;
}

Dataset synth_generate(const SynthSpec& spec) {
  if (spec.n_samples < 2 || spec.height < 4 || spec.width < 4) {
    throw std::invalid_argument("degenerate synth spec: need >= 2 samples of at least 4x4");
  }
  const auto n_pos = static_cast<std::size_t>(
      std::llround(spec.positive_fraction * static_cast<double>(spec.n_samples)));
  if (n_pos == 0 || n_pos == spec.n_samples) {
    throw std::invalid_argument("degenerate synth spec: both classes must be present");
  }
  Rng rng(spec.seed);
  std::vector<int> labels(spec.n_samples, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double h = static_cast<double>(spec.height), w = static_cast<double>(spec.width);

  Dataset ds;
  ds.height = spec.height;
  ds.width = spec.width;
  for (std::size_t n = 0; n < spec.n_samples; ++n) {
    Tensor img = Tensor::zeros({spec.height, spec.width});
    if (labels[n] == 0) {
      const double cy = h / 2 + (unit(rng) - 0.5) * h / 5;
      const double cx = w / 2 + (unit(rng) - 0.5) * w / 5;
      const double sigma = h * (0.12 + 0.1 * unit(rng));
      for (std::size_t y = 0; y < spec.height; ++y) {
        for (std::size_t x = 0; x < spec.width; ++x) {
          const double dy = static_cast<double>(y) - cy, dx = static_cast<double>(x) - cx;
          img.values[y * spec.width + x] = std::exp(-(dy * dy + dx * dx) / (2 * sigma * sigma));
        }
      }
    } else {
      const double period = 4.0 + 4.0 * unit(rng);
      const double phase = 2 * std::numbers::pi * unit(rng);
      for (std::size_t y = 0; y < spec.height; ++y) {
        for (std::size_t x = 0; x < spec.width; ++x) {
          const double t = 2 * std::numbers::pi * static_cast<double>(x + y) / period + phase;
          img.values[y * spec.width + x] = 0.5 + 0.5 * std::sin(t);
        }
      }
    }
    for (auto& v : img.values) v += spec.noise * noise(rng);
    ds.images.push_back(std::move(img));
    ds.labels.push_back(labels[n]);
  }
  return normalize(std::move(ds));
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& fractions) {
  double total = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw std::invalid_argument("split fractions must be non-negative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("split fractions must sum to 1");
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double raw = fractions[k] * static_cast<double>(n);
    sizes[k] = static_cast<std::size_t>(std::floor(raw + 1e-9));
    rem[k] = raw - static_cast<double>(sizes[k]);
    assigned += sizes[k];
  }
  // Largest remainders get the leftover samples; ties go to the earlier split.
  while (assigned < n) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < 3; ++k) {
      if (rem[k] > rem[best]) best = k;
    }
    ++sizes[best];
    rem[best] = -1.0;
    ++assigned;
  }
  for (std::size_t k = 0; k < 3; ++k) {
    if (sizes[k] == 0) {
      throw std::invalid_argument("empty partition: " +
                                  std::string(split_name(static_cast<SplitTag>(k))) +
                                  " would receive no samples");
    }
  }
  return sizes;
}

Dataset split(Dataset ds, const std::array<double, 3>& fractions, std::uint64_t seed) {
  const auto sizes = split_sizes(ds.size(), fractions);
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Dataset out;
  out.height = ds.height;
  out.width = ds.width;
  for (std::size_t k = 0, pos = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < sizes[k]; ++i, ++pos) {
      out.images.push_back(std::move(ds.images[order[pos]]));
      out.labels.push_back(ds.labels[order[pos]]);
      out.tags.push_back(static_cast<SplitTag>(k));
    }
  }
  return out;
}

}  // namespace qcbnn

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

#include "qcbnn/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace qcbnn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) +
                    "' as " + std::string(want));
}

double to_double(std::string_view key, std::string_view v) {
  v = trim(v);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) bad_value(key, v, "a number");
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  v = trim(v);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    bad_value(key, v, "a non-negative integer");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  v = trim(v);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

template <class E>
E to_enum(std::string_view key, std::string_view v,
          std::initializer_list<std::pair<std::string_view, E>> options) {
  v = trim(v);
  std::string valid;
  for (const auto& [name, value] : options) {
    if (name == v) return value;
    valid += valid.empty() ? "" : ", ";
    valid += name;
  }
  bad_value(key, v, "one of {" + valid + "}");
}

template <class E>
std::string from_enum(E e, std::initializer_list<std::pair<std::string_view, E>> options) {
  for (const auto& [name, value] : options) {
    if (value == e) return std::string(name);
  }
  return "?";
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += f(xs[i]);
  }
  return out;
}

const std::initializer_list<std::pair<std::string_view, ModelKind>> kModels{
    {"quantum", ModelKind::Quantum}, {"classical", ModelKind::Classical}, {"vi", ModelKind::PlainVI}};
const std::initializer_list<std::pair<std::string_view, NoiseLaw::Kind>> kNoise{
    {"uniform", NoiseLaw::Kind::Uniform}, {"gaussian", NoiseLaw::Kind::Gaussian}};
const std::initializer_list<std::pair<std::string_view, PriorSpec::Law>> kPriors{
    {"uniform", PriorSpec::Law::Uniform}, {"clipped_gaussian", PriorSpec::Law::ClippedGaussian}};
const std::initializer_list<std::pair<std::string_view, PairTopology>> kTopologies{
    {"full", PairTopology::FullPairwise}, {"adjacent", PairTopology::Adjacent}};
const std::initializer_list<std::pair<std::string_view, GateKind>> kAxes{
    {"crx", GateKind::CRX}, {"cry", GateKind::CRY}, {"crz", GateKind::CRZ}};
const std::initializer_list<std::pair<std::string_view, DataFormat>> kFormats{
    {"binary", DataFormat::Binary}, {"csv", DataFormat::Csv}};
const std::initializer_list<std::pair<std::string_view, NormalizeMode>> kNormalize{
    {"per_image", NormalizeMode::PerImage}, {"global", NormalizeMode::Global}};
const std::initializer_list<std::pair<std::string_view, SubsetAccuracyMode>> kSubsetModes{
    {"overall", SubsetAccuracyMode::Overall}, {"subset", SubsetAccuracyMode::Subset}};

struct Entry {
  std::string_view section;
  std::string_view key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define QCBNN_SIZE(sec, name, field)                                                \
  Entry {                                                                           \
    sec, #name, [](RunConfig& c, std::string_view v) { c.field = to_u64(#name, v); }, \
        [](const RunConfig& c) { return fmt(static_cast<std::uint64_t>(c.field)); } \
  }
#define QCBNN_REAL(sec, name, field)                                                   \
  Entry {                                                                              \
    sec, #name, [](RunConfig& c, std::string_view v) { c.field = to_double(#name, v); }, \
        [](const RunConfig& c) { return fmt(c.field); }                                \
  }
#define QCBNN_BOOL(sec, name, field)                                                 \
  Entry {                                                                            \
    sec, #name, [](RunConfig& c, std::string_view v) { c.field = to_bool(#name, v); }, \
        [](const RunConfig& c) { return fmt(c.field); }                              \
  }
#define QCBNN_ENUM(sec, name, field, table)                                                  \
  Entry {                                                                                    \
    sec, #name, [](RunConfig& c, std::string_view v) { c.field = to_enum(#name, v, table); }, \
        [](const RunConfig& c) { return from_enum(c.field, table); }                         \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table{
      QCBNN_ENUM("train", model, train.model, kModels),
      {"train", "arch",
       [](RunConfig& c, std::string_view v) { c.train.arch = parse_architecture(trim(v)); },
       [](const RunConfig& c) { return std::string(architecture_token(c.train.arch)); }},
      QCBNN_SIZE("train", layers, train.layers),
      QCBNN_BOOL("train", reupload, train.reupload),
      QCBNN_ENUM("train", embedding, train.zoo.embedding_pairs, kTopologies),
      QCBNN_ENUM("train", controlled_axis, train.zoo.controlled_axis, kAxes),
      QCBNN_SIZE("train", seed, train.seed),
      QCBNN_SIZE("train", epochs, train.epochs),
      QCBNN_SIZE("train", batch_size, train.batch_size),
      QCBNN_SIZE("train", ensemble, train.ensemble),
      QCBNN_SIZE("train", curve_ensemble, train.curve_ensemble),
      QCBNN_SIZE("train", weight_samples, train.weight_samples),
      QCBNN_REAL("train", alpha, train.alpha),
      QCBNN_REAL("train", beta, train.beta),
      QCBNN_REAL("train", lr_generator, train.lr_generator),
      QCBNN_REAL("train", lr_discriminator, train.lr_discriminator),
      QCBNN_REAL("train", lr_classifier, train.lr_classifier),
      QCBNN_SIZE("train", disc_steps, train.disc_steps),
      QCBNN_SIZE("train", n_qubits, train.n_qubits),
      QCBNN_SIZE("train", noise_dim, train.noise_dim),
      QCBNN_ENUM("train", noise, train.noise.kind, kNoise),
      QCBNN_REAL("train", noise_low, train.noise.low),
      QCBNN_REAL("train", noise_high, train.noise.high),
      QCBNN_REAL("train", noise_mean, train.noise.mean),
      QCBNN_REAL("train", noise_sigma, train.noise.sigma),
      QCBNN_ENUM("train", prior, train.prior.law, kPriors),
      QCBNN_REAL("train", prior_mu, train.prior.mu),
      QCBNN_REAL("train", prior_sigma, train.prior.sigma),
      QCBNN_SIZE("train", conv_stride, train.conv_stride),
      QCBNN_REAL("train", vi_prior_sigma, train.vi_prior_sigma),
      QCBNN_REAL("train", vi_initial_sigma, train.vi_initial_sigma),
      QCBNN_SIZE("train", threads, train.threads),

      {"data", "source", [](RunConfig& c, std::string_view v) { c.data.source = trim(v); },
       [](const RunConfig& c) { return c.data.source; }},
      QCBNN_ENUM("data", format, data.format, kFormats),
      QCBNN_SIZE("data", height, data.height),
      QCBNN_SIZE("data", width, data.width),
      QCBNN_ENUM("data", normalize, data.normalize, kNormalize),
      {"data", "split",
       [](RunConfig& c, std::string_view v) {
         const auto parts = split_list(v);
         if (parts.size() != 3) bad_value("split", v, "three fractions train,validation,test");
         for (std::size_t k = 0; k < 3; ++k) c.data.split[k] = to_double("split", parts[k]);
       },
       [](const RunConfig& c) {
         return fmt(c.data.split[0]) + "," + fmt(c.data.split[1]) + "," + fmt(c.data.split[2]);
       }},
      QCBNN_SIZE("data", split_seed, data.split_seed),
      QCBNN_SIZE("data", synth_train, data.synth_train),
      QCBNN_SIZE("data", synth_validation, data.synth_validation),
      QCBNN_SIZE("data", synth_test, data.synth_test),
      QCBNN_REAL("data", synth_positive_fraction, data.synth_positive_fraction),
      QCBNN_REAL("data", synth_noise, data.synth_noise),
      QCBNN_SIZE("data", synth_seed, data.synth_seed),

      {"sweep", "archs",
       [](RunConfig& c, std::string_view v) {
         c.sweep.archs.clear();
         for (auto t : split_list(v)) {
           if (t == "all") {
             c.sweep.archs.insert(c.sweep.archs.end(), kAllArchitectures.begin(),
                                  kAllArchitectures.end());
           } else {
             c.sweep.archs.push_back(parse_architecture(t));
           }
         }
       },
       [](const RunConfig& c) {
         return join(c.sweep.archs, [](ArchitectureId a) { return std::string(architecture_token(a)); });
       }},
      {"sweep", "seeds",
       [](RunConfig& c, std::string_view v) {
         c.sweep.seeds.clear();
         for (auto t : split_list(v)) c.sweep.seeds.push_back(to_u64("seeds", t));
       },
       [](const RunConfig& c) {
         return join(c.sweep.seeds, [](std::uint64_t s) { return fmt(s); });
       }},
      {"sweep", "layer_counts",
       [](RunConfig& c, std::string_view v) {
         c.sweep.layers.clear();
         for (auto t : split_list(v)) c.sweep.layers.push_back(to_u64("layer_counts", t));
       },
       [](const RunConfig& c) {
         return join(c.sweep.layers, [](std::size_t s) { return fmt(static_cast<std::uint64_t>(s)); });
       }},
      {"sweep", "reuploads",
       [](RunConfig& c, std::string_view v) {
         c.sweep.reupload.clear();
         for (auto t : split_list(v)) c.sweep.reupload.push_back(to_bool("reuploads", t));
       },
       [](const RunConfig& c) {
         return join(c.sweep.reupload, [](bool b) { return fmt(b); });
       }},

      {"output", "out", [](RunConfig& c, std::string_view v) { c.output.out = std::string(trim(v)); },
       [](const RunConfig& c) { return c.output.out.string(); }},
      QCBNN_BOOL("output", report, output.report),
      QCBNN_ENUM("output", subset_accuracy, output.subset_accuracy, kSubsetModes),
      QCBNN_SIZE("output", calibration_bins, output.calibration_bins),
      QCBNN_SIZE("output", kde_points, output.kde_points),
      QCBNN_REAL("output", kde_low, output.kde_low),
      QCBNN_REAL("output", kde_high, output.kde_high),
  };
  return table;
}

#undef QCBNN_SIZE
#undef QCBNN_REAL
#undef QCBNN_BOOL
#undef QCBNN_ENUM

const Entry* find_entry(std::string_view section, std::string_view key) {
  for (const auto& e : entries()) {
    if (e.key == key && (section.empty() || e.section == section)) return &e;
  }
  return nullptr;
}

bool known_section(std::string_view s) {
  return s == "train" || s == "data" || s == "sweep" || s == "output";
}

void set_entry(RunConfig& cfg, std::string_view section, std::string_view key,
               std::string_view value) {
  const Entry* e = find_entry(section, key);
  if (e == nullptr) {
    std::string where = section.empty() ? "" : " in section [" + std::string(section) + "]";
    throw ConfigError("unknown config key '" + std::string(key) + "'" + where);
  }
  try {
    e->set(cfg, value);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("config key '" + std::string(key) + "': " + ex.what());
  }
}

void validate(const RunConfig& cfg) {
  try {
    cfg.train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto& s = cfg.sweep;
  if (s.layers.size() > 1 && s.reupload.size() > 1 && s.layers.size() != s.reupload.size()) {
    throw ConfigError("conflicting sweep lengths: layer_counts has " +
                      std::to_string(s.layers.size()) + " entries, reuploads has " +
                      std::to_string(s.reupload.size()));
  }
  for (std::size_t l : s.layers) {
    if (l == 0) throw ConfigError("layer_counts entries must be positive");
  }
  if (std::set<std::uint64_t>(s.seeds.begin(), s.seeds.end()).size() != s.seeds.size()) {
    throw ConfigError("seeds contains duplicates");
  }
  double total = 0.0;
  for (double f : cfg.data.split) {
    if (f < 0.0) throw ConfigError("split fractions must be non-negative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
  if (cfg.data.height < 2 || cfg.data.width < 2) throw ConfigError("image size must be >= 2");
  if (cfg.data.synth_train == 0 || cfg.data.synth_test == 0) {
    throw ConfigError("synthetic train and test sizes must be positive");
  }
  if (cfg.output.calibration_bins < 2) throw ConfigError("calibration_bins must be >= 2");
  if (cfg.output.kde_points < 2 || !(cfg.output.kde_high > cfg.output.kde_low)) {
    throw ConfigError("KDE grid needs >= 2 points and kde_high > kde_low");
  }
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream is{std::string(text)};
  std::string raw;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section)) {
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section +
                          "]; expected train, data, sweep or output");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    try {
      set_entry(cfg, section, key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

void apply_override(RunConfig& cfg, std::string_view key, std::string_view value) {
  std::string_view section;
  if (const auto dot = key.find('.'); dot != std::string_view::npos) {
    section = key.substr(0, dot);
    key = key.substr(dot + 1);
  }
  set_entry(cfg, section, key, value);
  validate(cfg);
}

std::string echo_config(const RunConfig& cfg) {
  std::string out;
  std::string_view current;
  for (const auto& e : entries()) {
    if (e.section != current) {
      out += (out.empty() ? "[" : "\n[") + std::string(e.section) + "]\n";
      current = e.section;
    }
    out += std::string(e.key) + " = " + e.get(cfg) + "\n";
  }
  return out;
}

std::vector<std::uint64_t> sweep_seeds(const RunConfig& cfg) {
  if (cfg.sweep.seeds.empty()) return {cfg.train.seed};
  return cfg.sweep.seeds;
}

std::vector<SweepCell> expand_sweep(const RunConfig& cfg) {
  TrainConfig base = cfg.train;
  base.seed = sweep_seeds(cfg).front();
  if (base.model != ModelKind::Quantum) {
    return {SweepCell{std::string(model_kind_name(base.model)), base}};
  }
  std::vector<ArchitectureId> archs = cfg.sweep.archs;
  if (archs.empty()) archs.push_back(base.arch);
  const auto& ls = cfg.sweep.layers;
  const auto& rs = cfg.sweep.reupload;
  const std::size_t n = std::max<std::size_t>({1, ls.size(), rs.size()});
  std::vector<SweepCell> cells;
  for (ArchitectureId a : archs) {
    for (std::size_t k = 0; k < n; ++k) {
      TrainConfig t = base;
      t.arch = a;
      if (!ls.empty()) t.layers = ls[ls.size() == 1 ? 0 : k];
      if (!rs.empty()) t.reupload = rs[rs.size() == 1 ? 0 : k];
      std::string label = "quantum_" + std::string(architecture_token(a)) + "_L" +
                          std::to_string(t.layers) + (t.reupload ? "_re" : "");
      cells.push_back(SweepCell{std::move(label), std::move(t)});
    }
  }
  return cells;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& e : entries()) out.push_back(std::string(e.section) + "." + std::string(e.key));
  return out;
}

}  // namespace qcbnn

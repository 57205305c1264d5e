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

#include "qcbnn/runner.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "qcbnn/checkpoint.hpp"

namespace qcbnn {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  body(os);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

void put_optional(std::ostream& os, std::optional<double> v) {
  if (v) os << *v;
  else os << "undefined";
}

Dataset synth_split(const DataConfig& cfg, std::size_t n, std::uint64_t offset) {
  if (n == 0) {
    Dataset empty;
    empty.height = cfg.height;
    empty.width = cfg.width;
    return empty;
  }
  SynthSpec spec;
  spec.n_samples = n;
  spec.height = cfg.height;
  spec.width = cfg.width;
  spec.positive_fraction = cfg.synth_positive_fraction;
  spec.noise = cfg.synth_noise;
  spec.seed = cfg.synth_seed * 3 + offset;
  return synth_generate(spec);
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::vector<EvalRow> seed_rows(const SeedOutcome& s) {
  std::vector<EvalRow> rows;
  std::optional<double> best, last, last_val;
  for (const auto& e : s.epochs) {
    best = std::max(best.value_or(0.0), e.train_accuracy);
    last = e.train_accuracy;
    last_val = e.val_accuracy;
  }
  rows.push_back({"best_train_accuracy", "all", best});
  rows.push_back({"final_train_accuracy", "all", last});
  rows.push_back({"final_validation_accuracy", "all", last_val});
  for (auto& r : eval_rows(s.report)) rows.push_back(std::move(r));
  return rows;
}

RunConfig seed_config(const RunConfig& cfg, const TrainConfig& train_cfg) {
  RunConfig out = cfg;
  out.train = train_cfg;
  out.sweep = SweepConfig{};
  return out;
}

}  // namespace

LoadedData load_data(const DataConfig& cfg) {
  LoadedData out;
  if (cfg.source == "synth") {
    out.train = synth_split(cfg, cfg.synth_train, 0);
    out.validation = synth_split(cfg, cfg.synth_validation, 1);
    out.test = synth_split(cfg, cfg.synth_test, 2);
    return out;
  }
  Dataset all = normalize(load_dataset(cfg.source, cfg.format, cfg.height, cfg.width), cfg.normalize);
  all = split(std::move(all), cfg.split, cfg.split_seed);
  out.train = all.subset(SplitTag::Train);
  out.validation = all.subset(SplitTag::Validation);
  out.test = all.subset(SplitTag::Test);
  return out;
}

void write_epochs_csv(std::ostream& os, std::span<const EpochRecord> epochs) {
  const auto old = os.precision(17);
  os << "epoch,split,likelihood_term,kl_term,discriminator_loss,combined,accuracy,nll\n";
  for (const auto& e : epochs) {
    const auto& l = e.train_loss;
    os << e.epoch << ",train," << l.likelihood_term << ',' << l.kl_term << ','
       << l.discriminator_loss << ',' << l.combined() << ',' << e.train_accuracy
       << ",undefined\n";
    if (e.val_accuracy) {
      os << e.epoch << ",validation,undefined,undefined,undefined,undefined,";
      put_optional(os, e.val_accuracy);
      os << ',';
      put_optional(os, e.val_nll);
      os << '\n';
    }
  }
  os.precision(old);
}

void write_predictions_csv(std::ostream& os, std::span<const EnsemblePrediction> predictions,
                           std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("predictions and labels differ in length");
  }
  const auto old = os.precision(17);
  os << "index,label,predicted,p0,p1,votes_class1,members\n";
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    const auto votes1 = std::count(p.member_votes.begin(), p.member_votes.end(), 1);
    os << i << ',' << labels[i] << ',' << p.predicted << ',' << p.class_probabilities[0] << ','
       << p.class_probabilities[1] << ',' << votes1 << ',' << p.member_votes.size() << '\n';
  }
  os.precision(old);
}

std::vector<EnsemblePrediction> read_predictions_csv(std::istream& is, std::vector<int>& labels) {
  std::string line;
  if (!std::getline(is, line) || line != "index,label,predicted,p0,p1,votes_class1,members") {
    throw std::runtime_error("predictions CSV header mismatch");
  }
  std::vector<EnsemblePrediction> out;
  labels.clear();
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw std::runtime_error("predictions CSV row has wrong column count");
    EnsemblePrediction p;
    labels.push_back(std::stoi(cells[1]));
    p.predicted = std::stoi(cells[2]);
    p.class_probabilities = {std::stod(cells[3]), std::stod(cells[4])};
    const auto votes1 = std::stoul(cells[5]), members = std::stoul(cells[6]);
    p.member_votes.assign(members - votes1, 0);
    p.member_votes.insert(p.member_votes.end(), votes1, 1);
    out.push_back(std::move(p));
  }
  return out;
}

void write_summary_csv(std::ostream& os, std::span<const SeedOutcome> seeds) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<double>> values;
  for (const auto& s : seeds) {
    for (const auto& r : seed_rows(s)) {
      const auto key = std::make_pair(r.metric, r.subset);
      if (!values.count(key)) order.push_back(key);
      auto& v = values[key];
      if (r.value) v.push_back(*r.value);
    }
  }
  const auto old = os.precision(17);
  os << "metric,subset,mean,std,n\n";
  for (const auto& key : order) {
    const auto& v = values[key];
    os << key.first << ',' << key.second << ',';
    if (v.empty()) {
      os << "undefined,undefined,0\n";
      continue;
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    os << mean << ',' << sample_std(v) << ',' << v.size() << '\n';
  }
  os.precision(old);
}

SeedOutcome run_seed(const RunConfig& cfg, const TrainConfig& train_cfg, const LoadedData& data,
                     const fs::path& dir, std::ostream* log) {
  fs::create_directories(dir);
  const fs::path marker = dir / run_files::kIncomplete;
  write_file(marker, [](std::ostream& os) { os << "running\n"; });
  write_file(dir / run_files::kConfig,
             [&](std::ostream& os) { os << echo_config(seed_config(cfg, train_cfg)); });
  SeedOutcome out;
  out.seed = train_cfg.seed;
  out.dir = dir;
  try {
    ModelState model = init_model(train_cfg, data.train.height, data.train.width);
    const Dataset* validation = data.validation.size() > 0 ? &data.validation : nullptr;
    auto on_epoch = [&](const EpochRecord& r) {
      if (log == nullptr) return;
      *log << dir.parent_path().filename().string() << " seed " << train_cfg.seed << " epoch "
           << r.epoch << " loss " << r.train_loss.combined() << " train_acc " << r.train_accuracy;
      if (r.val_accuracy) *log << " val_acc " << *r.val_accuracy;
      *log << '\n';
    };
    out.epochs = train_cfg.model == ModelKind::PlainVI
                     ? plain_vi_baseline(model, data.train, validation, train_cfg)
                     : train(model, data.train, validation, train_cfg, on_epoch);
    if (train_cfg.model == ModelKind::PlainVI && log != nullptr) {
      for (const auto& r : out.epochs) on_epoch(r);
    }
    save_checkpoint(dir / run_files::kCheckpoint, model_to_checkpoint(model));
    write_file(dir / run_files::kEpochs, [&](std::ostream& os) { write_epochs_csv(os, out.epochs); });

    const auto ens = predict_ensemble(model, data.test, train_cfg.ensemble, train_cfg.seed,
                                      kEvaluation, train_cfg.conv_stride, train_cfg.threads);
    out.report = evaluate_predictions(ens.predictions, data.test.labels, cfg.output.subset_accuracy,
                                      cfg.output.calibration_bins);
    write_file(dir / run_files::kEval, [&](std::ostream& os) { write_eval_csv(os, out.report); });
    write_file(dir / run_files::kPredictions, [&](std::ostream& os) {
      write_predictions_csv(os, ens.predictions, data.test.labels);
    });
    write_file(dir / run_files::kWeights,
               [&](std::ostream& os) { write_weight_samples_csv(os, ens.samples); });
  } catch (const std::exception& e) {
    write_file(marker, [&](std::ostream& os) { os << e.what() << '\n'; });
    throw;
  }
  fs::remove(marker);
  return out;
}

std::vector<CellOutcome> run_train(const RunConfig& cfg, std::ostream* log) {
  const LoadedData data = load_data(cfg.data);
  if (data.train.size() == 0 || data.test.size() == 0) {
    throw std::runtime_error("training and test splits must be non-empty");
  }
  fs::create_directories(cfg.output.out);
  write_file(cfg.output.out / run_files::kConfig, [&](std::ostream& os) { os << echo_config(cfg); });
  std::vector<CellOutcome> cells;
  for (const auto& cell : expand_sweep(cfg)) {
    CellOutcome c{cell, cfg.output.out / cell.label, {}};
    for (std::uint64_t seed : sweep_seeds(cfg)) {
      TrainConfig t = cell.train;
      t.seed = seed;
      c.seeds.push_back(run_seed(cfg, t, data, c.dir / ("seed_" + std::to_string(seed)), log));
    }
    write_file(c.dir / run_files::kSummary, [&](std::ostream& os) { write_summary_csv(os, c.seeds); });
    cells.push_back(std::move(c));
  }
  write_file(cfg.output.out / run_files::kSweepSummary, [&](std::ostream& os) {
    os << "cell,metric,subset,mean,std,n\n";
    for (const auto& c : cells) {
      std::ostringstream ss;
      write_summary_csv(ss, c.seeds);
      std::istringstream is(ss.str());
      std::string line;
      std::getline(is, line);  // header
      while (std::getline(is, line)) os << c.cell.label << ',' << line << '\n';
    }
  });
  return cells;
}

LoadedRun load_run(const fs::path& seed_dir) {
  if (fs::exists(seed_dir / run_files::kIncomplete)) {
    throw std::runtime_error("run in " + seed_dir.string() + " is marked incomplete");
  }
  RunConfig cfg = load_config(seed_dir / run_files::kConfig);
  LoadedData data = load_data(cfg.data);
  ModelState model = init_model(cfg.train, data.train.height, data.train.width);
  model_from_checkpoint(model, load_checkpoint(seed_dir / run_files::kCheckpoint));
  return LoadedRun{std::move(cfg), std::move(model), std::move(data)};
}

EvalReport run_evaluate(const fs::path& seed_dir, std::optional<std::size_t> ensemble,
                        std::optional<std::uint64_t> eval_seed, std::ostream& os) {
  const LoadedRun run = load_run(seed_dir);
  const TrainConfig& t = run.config.train;
  const auto ens = predict_ensemble(run.model, run.data.test, ensemble.value_or(t.ensemble),
                                    eval_seed.value_or(t.seed), kEvaluation, t.conv_stride,
                                    t.threads);
  const EvalReport report =
      evaluate_predictions(ens.predictions, run.data.test.labels,
                           run.config.output.subset_accuracy, run.config.output.calibration_bins);
  write_eval_csv(os, report);
  return report;
}

std::vector<double> pooled_weights(std::span<const WeightSample> samples) {
  std::vector<double> out;
  for (const auto& s : samples) out.insert(out.end(), s.flat.begin(), s.flat.end());
  return out;
}

void run_sample_weights(const fs::path& seed_dir, std::size_t n, std::uint64_t draw_seed,
                        std::ostream& weights_os, std::ostream& kde_os) {
  if (n == 0) throw std::invalid_argument("sample-weights needs n >= 1");
  const LoadedRun run = load_run(seed_dir);
  std::vector<WeightSample> samples(n);
  parallel_for(n, run.config.train.threads, [&](std::size_t m) {
    Rng rng = make_stream(draw_seed, {kWeightExport, m});
    samples[m] = sample_weights(run.model.gen(), rng);
  });
  write_weight_samples_csv(weights_os, samples);
  const auto& o = run.config.output;
  const auto grid = linspace(o.kde_low, o.kde_high, o.kde_points);
  const auto kde = kde_density(pooled_weights(samples), grid);
  const auto old = kde_os.precision(17);
  kde_os << "x,density\n";
  for (std::size_t i = 0; i < grid.size(); ++i) kde_os << grid[i] << ',' << kde.density[i] << '\n';
  kde_os.precision(old);
}

void write_toy_csv(std::ostream& os, const ToyResult& result) {
  const auto old = os.precision(17);
  os << "step,ks,discriminator_loss\n";
  for (const auto& c : result.trace) os << c.step << ',' << c.ks << ',' << c.discriminator_loss << '\n';
  os.precision(old);
}

}  // namespace qcbnn

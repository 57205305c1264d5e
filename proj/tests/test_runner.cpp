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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qcbnn/report.hpp"

using namespace qcbnn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qcbnn_runner_" + name);
  fs::remove_all(dir);
  return dir;
}

RunConfig tiny_config(const fs::path& out) {
  RunConfig cfg = parse_config(
      "[train]\nepochs = 2\nbatch_size = 8\nensemble = 6\ncurve_ensemble = 3\n"
      "[data]\nheight = 8\nwidth = 8\nsynth_train = 24\nsynth_validation = 8\nsynth_test = 10\n");
  cfg.output.out = out;
  return cfg;
}

const char* const kSeedFiles[] = {run_files::kConfig,      run_files::kEpochs, run_files::kCheckpoint,
                                  run_files::kEval,        run_files::kPredictions, run_files::kWeights};

}  // namespace

TEST(runner, synthetic_data_splits) {
  DataConfig d;
  d.height = d.width = 8;
  d.synth_train = 20;
  d.synth_validation = 0;
  d.synth_test = 6;
  const LoadedData data = load_data(d);
  EXPECT_EQ(data.train.size(), 20u);
  EXPECT_EQ(data.validation.size(), 0u);
  EXPECT_EQ(data.test.size(), 6u);
  EXPECT_EQ(data.validation.height, 8u);
  EXPECT_NE(data.train.images[0].values, data.test.images[0].values);
}

TEST(runner, file_data_is_normalised_and_split) {
  const fs::path dir = fresh_dir("file_data");
  fs::create_directories(dir);
  SynthSpec spec;
  spec.n_samples = 40;
  spec.height = spec.width = 6;
  save_dataset(dir / "d.bin", quantize_to_bytes(synth_generate(spec)));
  DataConfig d;
  d.source = (dir / "d.bin").string();
  d.height = d.width = 6;
  const LoadedData data = load_data(d);
  const auto sizes = split_sizes(40, d.split);
  EXPECT_EQ(data.train.size(), sizes[0]);
  EXPECT_EQ(data.validation.size(), sizes[1]);
  EXPECT_EQ(data.test.size(), sizes[2]);
  const auto& v = data.train.images[0].values;
  EXPECT_EQ(*std::min_element(v.begin(), v.end()), 0.0);
  EXPECT_EQ(*std::max_element(v.begin(), v.end()), 1.0);
  fs::remove_all(dir);
}

TEST(runner, predictions_csv_round_trip) {
  std::vector<EnsemblePrediction> preds(2);
  preds[0] = {{0.75, 0.25}, 0, {0, 0, 1, 0}};
  preds[1] = {{0.1, 0.9}, 1, {1, 1, 1}};
  const std::vector<int> labels{0, 0};
  std::stringstream ss;
  write_predictions_csv(ss, preds, labels);
  std::vector<int> back_labels;
  const auto back = read_predictions_csv(ss, back_labels);
  EXPECT_EQ(back_labels, labels);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].class_probabilities, preds[0].class_probabilities);
  EXPECT_EQ(back[0].member_votes, (std::vector<int>{0, 0, 0, 1}));
  EXPECT_EQ(back[1].member_votes, preds[1].member_votes);
  std::istringstream bad("index,label\n");
  EXPECT_THROW(read_predictions_csv(bad, back_labels), std::runtime_error);
}

TEST(runner, summary_uses_sample_std) {
  std::vector<SeedOutcome> seeds(3);
  const double accs[] = {0.5, 0.7, 0.9};
  for (int k = 0; k < 3; ++k) {
    seeds[k].report.scores.accuracy = accs[k];
    seeds[k].epochs.push_back(EpochRecord{1, {}, accs[k], std::nullopt, std::nullopt});
  }
  std::ostringstream os;
  write_summary_csv(os, seeds);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("metric,subset,mean,std,n\n", 0), 0u);
  std::istringstream is(text);
  std::string line;
  bool found = false;
  while (std::getline(is, line)) {
    if (line.rfind("accuracy,all,", 0) != 0) continue;
    found = true;
    std::istringstream row(line.substr(13));
    double mean = 0, sd = 0;
    char comma;
    std::size_t n = 0;
    row >> mean >> comma >> sd >> comma >> n;
    EXPECT_NEAR(mean, 0.7, 1e-15);
    EXPECT_NEAR(sd, 0.2, 1e-15);
    EXPECT_EQ(n, 3u);
  }
  EXPECT_TRUE(found);
  EXPECT_NE(text.find("final_validation_accuracy,all,undefined,undefined,0"), std::string::npos);
}

TEST(runner, seed_directory_is_complete_and_replayable) {
  const fs::path out = fresh_dir("complete");
  const RunConfig cfg = tiny_config(out);
  const auto cells = run_train(cfg);
  ASSERT_EQ(cells.size(), 1u);
  const fs::path seed_dir = out / "quantum_circuit_iii_L1" / "seed_0";
  for (const char* f : kSeedFiles) EXPECT_TRUE(fs::exists(seed_dir / f)) << f;
  EXPECT_FALSE(fs::exists(seed_dir / run_files::kIncomplete));
  EXPECT_TRUE(fs::exists(out / "quantum_circuit_iii_L1" / run_files::kSummary));
  EXPECT_TRUE(fs::exists(out / run_files::kSweepSummary));

  std::ostringstream again;
  run_evaluate(seed_dir, std::nullopt, std::nullopt, again);
  EXPECT_EQ(again.str(), slurp(seed_dir / run_files::kEval));

  std::ostringstream w1, k1, w2, k2;
  run_sample_weights(seed_dir, 4, 9, w1, k1);
  run_sample_weights(seed_dir, 4, 9, w2, k2);
  EXPECT_EQ(w1.str(), w2.str());
  EXPECT_EQ(k1.str(), k2.str());
  EXPECT_EQ(k1.str().rfind("x,density\n", 0), 0u);
  fs::remove_all(out);
}

TEST(runner, outputs_are_byte_identical_across_runs_and_threads) {
  const fs::path a = fresh_dir("bytes_a"), b = fresh_dir("bytes_b"), c = fresh_dir("bytes_c");
  RunConfig cfg = tiny_config(a);
  run_train(cfg);
  run_train(cfg = tiny_config(b));
  cfg = tiny_config(c);
  cfg.train.threads = 3;
  run_train(cfg);
  const fs::path cell = "quantum_circuit_iii_L1";
  for (const char* f : kSeedFiles) {
    if (std::string(f) == run_files::kConfig) continue;  // echoes the thread count and out path
    const std::string ref = slurp(a / cell / "seed_0" / f);
    EXPECT_FALSE(ref.empty()) << f;
    EXPECT_EQ(ref, slurp(b / cell / "seed_0" / f)) << f;
    EXPECT_EQ(ref, slurp(c / cell / "seed_0" / f)) << f;
  }
  EXPECT_EQ(slurp(a / run_files::kSweepSummary), slurp(c / run_files::kSweepSummary));
  for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST(runner, four_seed_sweep_and_report) {
  const fs::path out = fresh_dir("sweep");
  RunConfig cfg = tiny_config(out);
  apply_override(cfg, "sweep.seeds", "0,1,2,3");
  apply_override(cfg, "sweep.archs", "circuit_iii,matic_i");
  apply_override(cfg, "sweep.layer_counts", "1,2");
  const auto cells = run_train(cfg);
  ASSERT_EQ(cells.size(), 4u);
  for (const auto& c : cells) {
    ASSERT_EQ(c.seeds.size(), 4u);
    for (std::uint64_t s = 0; s < 4; ++s) {
      EXPECT_TRUE(fs::exists(c.dir / ("seed_" + std::to_string(s)) / run_files::kEpochs));
    }
    const std::string summary = slurp(c.dir / run_files::kSummary);
    EXPECT_NE(summary.find("accuracy,all,"), std::string::npos);
    EXPECT_NE(summary.find(",4\n"), std::string::npos);
  }
  // Different seeds give different runs.
  EXPECT_NE(slurp(cells[0].dir / "seed_0" / run_files::kWeights),
            slurp(cells[0].dir / "seed_1" / run_files::kWeights));

  const ReportResult r = run_report(out);
  EXPECT_TRUE(r.notices.empty()) << r.notices.front();
  for (const char* f : {"training_curves.csv", "accuracy_curves.svg", "loss_curves.svg", "test_accuracy.csv",
                        "test_accuracy_box.csv", "test_accuracy.svg", "difference_vs_accuracy.csv",
                        "difference_vs_accuracy.svg", "prediction_densities.csv", "confidence_density.svg",
                        "ensemble_fraction_density.svg", "calibration.csv", "calibration.svg",
                        "weight_kde.csv", "weight_peaks.csv", "weight_kde.svg", "depth_comparison.csv",
                        "depth_comparison.svg"}) {
    EXPECT_TRUE(fs::exists(out / "report" / f)) << f;
  }
  const std::string svg = slurp(out / "report" / "weight_kde.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);

  // A missing input is named in a notice and the figure is skipped.
  const fs::path gone = cells[0].dir / "seed_2" / run_files::kPredictions;
  fs::remove(gone);
  const ReportResult partial = run_report(out);
  bool named = false;
  for (const auto& n : partial.notices) named = named || n.find(gone.string()) != std::string::npos;
  EXPECT_TRUE(named);
  fs::remove_all(out);
}

TEST(runner, failed_seed_leaves_incomplete_marker) {
  const fs::path out = fresh_dir("incomplete");
  const RunConfig cfg = tiny_config(out);
  const LoadedData data = load_data(cfg.data);
  TrainConfig bad = cfg.train;
  bad.batch_size = 0;
  const fs::path dir = out / "cell" / "seed_0";
  EXPECT_THROW(run_seed(cfg, bad, data, dir), std::invalid_argument);
  ASSERT_TRUE(fs::exists(dir / run_files::kIncomplete));
  EXPECT_NE(slurp(dir / run_files::kIncomplete).find("batch_size"), std::string::npos);
  EXPECT_THROW(load_run(dir), std::runtime_error);
  const ReportResult r = run_report(out);
  bool flagged = false;
  for (const auto& n : r.notices) flagged = flagged || n.find("incomplete") != std::string::npos;
  EXPECT_TRUE(flagged);
  fs::remove_all(out);
}

TEST(runner, report_without_runs_and_missing_root) {
  const fs::path out = fresh_dir("empty");
  fs::create_directories(out);
  const ReportResult r = run_report(out);
  ASSERT_EQ(r.notices.size(), 1u);
  EXPECT_TRUE(r.written.empty());
  EXPECT_THROW(run_report(out / "nope"), std::runtime_error);
  fs::remove_all(out);
}

TEST(runner, toy_csv_layout) {
  ToyResult r;
  r.trace = {{50, 0.25, -1.0}, {100, 0.05, -1.3}};
  std::ostringstream os;
  write_toy_csv(os, r);
  EXPECT_EQ(os.str(), "step,ks,discriminator_loss\n50,0.25,-1\n100,0.050000000000000003,-1.3\n");
}

TEST(runner, single_run_emits_every_figure_family) {
  const fs::path out = fresh_dir("single");
  run_train(tiny_config(out));
  const ReportResult r = run_report(out);
  EXPECT_TRUE(r.notices.empty()) << r.notices.front();
  EXPECT_EQ(r.written.size(), 18u);

  // Without a test evaluation the calibration figure is skipped with a notice.
  const fs::path seed_dir = out / "quantum_circuit_iii_L1" / "seed_0";
  fs::remove(seed_dir / run_files::kEval);
  fs::remove(seed_dir / run_files::kPredictions);
  fs::remove_all(out / "report");
  const ReportResult partial = run_report(out);
  EXPECT_FALSE(fs::exists(out / "report" / "calibration.svg"));
  bool calibration_notice = false;
  for (const auto& n : partial.notices) {
    calibration_notice = calibration_notice || (n.find("calibration") != std::string::npos &&
                                                n.find(run_files::kPredictions) != std::string::npos);
  }
  EXPECT_TRUE(calibration_notice);
  EXPECT_TRUE(fs::exists(out / "report" / "accuracy_curves.svg"));
  fs::remove_all(out);
}

TEST(runner, sweep_over_every_architecture) {
  const fs::path out = fresh_dir("all_archs");
  RunConfig cfg = tiny_config(out);
  apply_override(cfg, "train.epochs", "1");
  apply_override(cfg, "sweep.archs", "all");
  const auto cells = run_train(cfg);
  ASSERT_EQ(cells.size(), kAllArchitectures.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    EXPECT_EQ(cells[k].cell.train.arch, kAllArchitectures[k]);
    EXPECT_TRUE(fs::exists(cells[k].dir / run_files::kSummary));
  }
  const std::string sweep = slurp(out / run_files::kSweepSummary);
  for (ArchitectureId a : kAllArchitectures) {
    EXPECT_NE(sweep.find("quantum_" + std::string(architecture_token(a)) + "_L1,accuracy,all,"),
              std::string::npos);
  }
  fs::remove_all(out);
}

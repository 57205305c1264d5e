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

#include "qcbnn/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

using namespace qcbnn;

namespace {

EnsemblePrediction prediction(std::vector<double> probs, std::vector<int> votes) {
  EnsemblePrediction p;
  p.class_probabilities = std::move(probs);
  p.predicted = argmax(p.class_probabilities);
  p.member_votes = std::move(votes);
  return p;
}

std::vector<CalibrationBin> calibrate(const std::vector<double>& conf, const std::vector<bool>& hit,
                                      std::size_t bins = 10) {
  auto flags = std::make_unique<bool[]>(hit.size());
  for (std::size_t i = 0; i < hit.size(); ++i) flags[i] = hit[i];
  return calibration_curve(conf, std::span<const bool>(flags.get(), hit.size()), bins);
}

}  // namespace

TEST(classification_scores, all_correct) {
  const std::vector<int> y{1, 0, 1, 1, 0};
  const auto s = classification_scores(y, y);
  EXPECT_EQ(s.accuracy, 1.0);
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.recall, 1.0);
  EXPECT_EQ(s.f1, 1.0);
}

TEST(classification_scores, confusion_matrix_two_one_one_six) {
  // TP=2, FP=1, FN=1, TN=6.
  const std::vector<int> pred{1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<int> label{1, 1, 0, 1, 0, 0, 0, 0, 0, 0};
  const auto s = classification_scores(pred, label);
  EXPECT_EQ(s.tp, 2u);
  EXPECT_EQ(s.fp, 1u);
  EXPECT_EQ(s.fn, 1u);
  EXPECT_EQ(s.tn, 6u);
  EXPECT_DOUBLE_EQ(*s.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*s.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*s.f1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.accuracy, 0.8);
}

TEST(classification_scores, no_positive_predictions_leave_precision_undefined) {
  const auto s = classification_scores(std::vector<int>{0, 0, 0}, std::vector<int>{1, 0, 0});
  EXPECT_FALSE(s.precision.has_value());
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_FALSE(s.f1.has_value());
  const auto none = classification_scores(std::vector<int>{0, 0}, std::vector<int>{0, 0});
  EXPECT_FALSE(none.recall.has_value());
}

TEST(classification_scores, rejects_bad_input) {
  EXPECT_THROW(classification_scores(std::vector<int>{0}, std::vector<int>{0, 1}),
               std::invalid_argument);
  EXPECT_THROW(classification_scores(std::vector<int>{}, std::vector<int>{}),
               std::invalid_argument);
}

TEST(confidence_error, examples) {
  EXPECT_EQ(confidence_error(0.8, 0.8), 0.0);
  EXPECT_NEAR(confidence_error(0.6, 0.8), -0.2, 1e-15);
  EXPECT_NEAR(confidence_error(0.9, 0.7), 0.2, 1e-15);
}

TEST(ensemble_fraction, examples) {
  EXPECT_EQ(ensemble_fraction(std::vector<int>(100, 1), 1), 1.0);
  std::vector<int> votes(100, 0);
  std::fill(votes.begin(), votes.begin() + 60, 1);
  EXPECT_EQ(ensemble_fraction(votes, 1), 0.6);
  EXPECT_EQ(ensemble_fraction(std::vector<int>{0}, 0), 1.0);
  EXPECT_THROW(ensemble_fraction(std::vector<int>{}, 0), std::invalid_argument);
}

TEST(difference_metric, examples) {
  EXPECT_NEAR(difference_metric(0.9, 0.8, 0.6, 0.2), 0.60, 1e-15);
  EXPECT_EQ(difference_metric(0.7, 0.4, 0.7, 0.4), 0.0);
  EXPECT_EQ(difference_metric(1, 1, 0, 0.3), 1.0);
}

TEST(difference_metric, antisymmetric_property) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 1000; ++t) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    EXPECT_EQ(difference_metric(a, b, c, d), -difference_metric(c, d, a, b));
  }
}

TEST(combine_members, averages_and_votes) {
  const std::vector<std::vector<double>> members{{0.9, 0.1}, {0.4, 0.6}, {0.8, 0.2}};
  const auto p = combine_members(members);
  EXPECT_NEAR(p.class_probabilities[0], 0.7, 1e-15);
  EXPECT_NEAR(p.class_probabilities[1], 0.3, 1e-15);
  EXPECT_EQ(p.predicted, 0);
  EXPECT_EQ(p.member_votes, (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(p.ensemble_size(), 3u);
  EXPECT_NEAR(p.confidence(), 0.7, 1e-15);
  EXPECT_EQ(argmax(std::vector<double>{0.5, 0.5}), 0);
  EXPECT_THROW(combine_members(std::vector<std::vector<double>>{}), std::invalid_argument);
  EXPECT_THROW(combine_members(std::vector<std::vector<double>>{{1.0}, {0.5, 0.5}}),
               std::invalid_argument);
}

TEST(calibration_curve, all_confident_correct_or_wrong) {
  const std::vector<double> conf(7, 1.0);
  for (bool hit : {true, false}) {
    const auto bins = calibrate(conf, std::vector<bool>(7, hit));
    ASSERT_EQ(bins.size(), 10u);
    for (std::size_t b = 0; b + 1 < bins.size(); ++b) EXPECT_TRUE(bins[b].empty());
    EXPECT_EQ(bins.back().count, 7u);
    EXPECT_EQ(bins.back().mean_confidence, 1.0);
    EXPECT_EQ(bins.back().accuracy, hit ? 1.0 : 0.0);
  }
}

TEST(calibration_curve, half_open_bins_partition_unit_interval) {
  const auto bins = calibrate({0.0, 0.1, 0.0999, 0.5, 0.95, 1.0}, std::vector<bool>(6, true), 10);
  EXPECT_EQ(bins[0].count, 2u);
  EXPECT_EQ(bins[1].count, 1u);
  EXPECT_EQ(bins[5].count, 1u);
  EXPECT_EQ(bins[9].count, 2u);
  for (std::size_t b = 0; b < bins.size(); ++b) {
    EXPECT_NEAR(bins[b].lower, b / 10.0, 1e-15);
    EXPECT_NEAR(bins[b].upper, (b + 1) / 10.0, 1e-15);
  }
  EXPECT_THROW(calibrate({0.5}, {true}, 1), std::invalid_argument);
  EXPECT_THROW(calibrate({1.5}, {true}), std::invalid_argument);
  EXPECT_THROW(calibrate({0.5, 0.5}, {true}), std::invalid_argument);
}

TEST(calibration_curve, calibrated_synthetic_data_within_noise_bound) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> conf;
  std::vector<bool> hit;
  for (int i = 0; i < 20000; ++i) {
    const double c = 0.5 + 0.5 * u(rng);
    conf.push_back(c);
    hit.push_back(u(rng) < c);
  }
  std::size_t total = 0;
  for (const auto& bin : calibrate(conf, hit)) {
    total += bin.count;
    if (bin.empty()) continue;
    EXPECT_LT(std::abs(bin.mean_confidence - bin.accuracy), 3.0 / std::sqrt(bin.count));
  }
  EXPECT_EQ(total, conf.size());
}

TEST(kde_density, standard_normal_at_zero) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = n(rng);
  const auto grid = linspace(-5, 5, 1001);
  const auto d = kde_density(xs, grid);
  EXPECT_NEAR(d.density[500], 1.0 / std::sqrt(2 * std::numbers::pi), 0.03);
  EXPECT_NEAR(trapezoid(d.grid, d.density), 1.0, 1e-2);
  EXPECT_NEAR(d.bandwidth, sample_stddev(xs) * std::pow(5000.0, -0.2), 1e-15);
  for (double v : d.density) EXPECT_GE(v, 0.0);
}

TEST(kde_density, symmetric_samples_give_symmetric_density) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 2);
  std::vector<double> xs;
  for (int i = 0; i < 300; ++i) {
    const double v = u(rng);
    xs.push_back(v);
    xs.push_back(-v);
  }
  const auto grid = linspace(-3, 3, 601);
  const auto d = kde_density(xs, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(d.density[i], d.density[grid.size() - 1 - i], 1e-6);
  }
}

TEST(kde_density, two_points_equal_peaks) {
  const auto grid = linspace(-2, 2, 401);
  const std::vector<double> xs{-1.0, 1.0};
  // Scott's rule gives h = sqrt(2) * 2^(-1/5) > 1, which merges the modes.
  const auto scott = kde_density(xs, grid);
  EXPECT_NEAR(scott.density[100], scott.density[300], 1e-12);
  EXPECT_GT(scott.bandwidth, 1.0);
  EXPECT_NEAR(scott.peak_in(-2, 2), scott.density[200], 1e-12);

  const auto narrow = kde_density(xs, grid, 0.5);
  EXPECT_NEAR(narrow.density[100], narrow.density[300], 1e-12);
  EXPECT_GT(narrow.density[100], narrow.density[200]);
  EXPECT_NEAR(narrow.peak_in(-1.5, -0.5), narrow.density[100], 1e-12);
  const auto wide = kde_density(xs, linspace(-4, 4, 801), 0.5);
  EXPECT_NEAR(trapezoid(wide.grid, wide.density), 1.0, 1e-2);
  EXPECT_THROW(kde_density(xs, grid, 0.0), std::invalid_argument);
}

TEST(kde_density, degenerate_samples_flag_point_mass) {
  const auto grid = linspace(-1, 1, 11);
  const auto d = kde_density(std::vector<double>{0.25, 0.25, 0.25}, grid);
  EXPECT_TRUE(d.point_mass);
  EXPECT_EQ(d.point_mass_at, 0.25);
  EXPECT_THROW(kde_density(std::vector<double>{1.0}, grid), std::invalid_argument);
}

TEST(evaluate_predictions, subsets_and_difference) {
  const std::vector<EnsemblePrediction> preds{
      prediction({0.2, 0.8}, {1, 1, 1, 0}),  // correct, conf 0.8, frac 0.75
      prediction({0.9, 0.1}, {0, 0, 0, 0}),  // correct, conf 0.9, frac 1
      prediction({0.4, 0.6}, {1, 0, 1, 0}),  // wrong, conf 0.6, frac 0.5
  };
  const std::vector<int> labels{1, 0, 0};
  const auto r = evaluate_predictions(preds, labels);
  EXPECT_EQ(r.n_correct, 2u);
  EXPECT_EQ(r.n_incorrect, 1u);
  EXPECT_NEAR(*r.mean_confidence_correct, 0.85, 1e-15);
  EXPECT_NEAR(*r.mean_confidence_incorrect, 0.6, 1e-15);
  EXPECT_NEAR(*r.ensemble_fraction_correct, 0.875, 1e-15);
  EXPECT_NEAR(*r.ensemble_fraction_incorrect, 0.5, 1e-15);
  EXPECT_NEAR(*r.confidence_error_correct, 0.85 - 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(*r.confidence_error_incorrect, 0.6 - 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.difference, 0.85 * 0.875 - 0.6 * 0.5, 1e-15);
  EXPECT_FALSE(r.difference_no_incorrect);
  std::size_t total = 0;
  for (const auto& b : r.calibration_bins) total += b.count;
  EXPECT_EQ(total, 3u);

  const auto s = evaluate_predictions(preds, labels, SubsetAccuracyMode::Subset);
  EXPECT_NEAR(*s.confidence_error_correct, 0.85 - 1.0, 1e-15);
  EXPECT_NEAR(*s.confidence_error_incorrect, 0.6, 1e-15);
}

TEST(evaluate_predictions, no_incorrect_samples_flagged) {
  const std::vector<EnsemblePrediction> preds{prediction({0.3, 0.7}, {1, 1})};
  const auto r = evaluate_predictions(preds, std::vector<int>{1});
  EXPECT_TRUE(r.difference_no_incorrect);
  EXPECT_NEAR(r.difference, 0.7, 1e-15);
  EXPECT_FALSE(r.mean_confidence_incorrect.has_value());
}

TEST(evaluate_predictions, fractions_stay_in_unit_interval) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 50; ++t) {
    std::vector<EnsemblePrediction> preds;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
      std::vector<std::vector<double>> members;
      for (int m = 0; m < 5; ++m) {
        const double p = u(rng);
        members.push_back({p, 1 - p});
      }
      preds.push_back(combine_members(members));
      labels.push_back(u(rng) < 0.5);
    }
    const auto r = evaluate_predictions(preds, labels);
    for (auto v : {std::optional<double>(r.scores.accuracy), r.mean_confidence_correct,
                   r.mean_confidence_incorrect, r.ensemble_fraction_correct,
                   r.ensemble_fraction_incorrect}) {
      if (!v) continue;
      EXPECT_GE(*v, 0.0);
      EXPECT_LE(*v, 1.0);
    }
    EXPECT_GE(r.difference, -1.0);
    EXPECT_LE(r.difference, 1.0);
  }
}

TEST(write_eval_csv, layout_and_replay) {
  const std::vector<EnsemblePrediction> preds{prediction({0.25, 0.75}, {1, 0, 1, 1}),
                                              prediction({0.6, 0.4}, {0, 0, 1, 0})};
  const std::vector<int> labels{0, 0};
  std::ostringstream a, b;
  write_eval_csv(a, evaluate_predictions(preds, labels));
  write_eval_csv(b, evaluate_predictions(preds, labels));
  EXPECT_EQ(a.str(), b.str());
  const std::string text = a.str();
  EXPECT_EQ(text.rfind("metric,subset,value\naccuracy,all,0.5\n", 0), 0u);
  EXPECT_NE(text.find("calibration_accuracy,bin0,undefined\n"), std::string::npos);
  EXPECT_NE(text.find("calibration_count,bin7,1\n"), std::string::npos);
  EXPECT_NE(text.find("recall,all,undefined\n"), std::string::npos);
  EXPECT_NE(text.find("precision,all,0\n"), std::string::npos);
}

TEST(ks_statistic, extremes) {
  EXPECT_EQ(ks_statistic({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_EQ(ks_statistic({0, 1}, {5, 6}), 1.0);
  EXPECT_NEAR(ks_statistic({0, 1, 2, 3}, {2, 3, 4, 5}), 0.5, 1e-15);
  EXPECT_THROW(ks_statistic({}, {1}), std::invalid_argument);
}

TEST(ks_statistic, same_law_samples_are_close) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> a(2000), b(2000);
  for (auto& v : a) v = u(rng);
  for (auto& v : b) v = u(rng);
  // 1.95 * sqrt(2/n) is the 0.1% critical value.
  EXPECT_LT(ks_statistic(a, b), 1.95 * std::sqrt(2.0 / 2000));
}

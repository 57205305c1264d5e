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

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qcbnn {

/// Averaged class probabilities over N stochastic forward passes.
struct EnsemblePrediction {
  std::vector<double> class_probabilities;
  int predicted = 0;
  std::vector<int> member_votes;

  std::size_t ensemble_size() const { return member_votes.size(); }
  double confidence() const { return class_probabilities[static_cast<std::size_t>(predicted)]; }
};

/// Average of the member softmax outputs; ties in argmax go to the lower class.
EnsemblePrediction combine_members(std::span<const std::vector<double>> member_probabilities);

int argmax(std::span<const double> values);

struct ClassificationScores {
  double accuracy = 0.0;
  // Empty when the denominator is zero.
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Binary scores with class 1 as the positive class.
ClassificationScores classification_scores(std::span<const int> predictions,
                                           std::span<const int> labels);

double confidence_error(double mean_confidence, double accuracy);

/// Fraction of members whose vote equals `final_class`.
double ensemble_fraction(std::span<const int> votes, int final_class);

double difference_metric(double confidence_correct, double fraction_correct,
                         double confidence_incorrect, double fraction_incorrect);

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;  // meaningful only when count > 0
  double accuracy = 0.0;
  bool empty() const { return count == 0; }
};

/// Equal-width bins over [0, 1]; half-open [lo, hi) except the closed top bin.
std::vector<CalibrationBin> calibration_curve(std::span<const double> confidences,
                                              std::span<const bool> correct,
                                              std::size_t n_bins = 10);

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
  /// Zero-variance input: density is left at zero and `point_mass_at` holds
  /// the common value.
  bool point_mass = false;
  double point_mass_at = 0.0;

  /// Largest density value on grid points within [lo, hi].
  double peak_in(double lo, double hi) const;
};

double sample_stddev(std::span<const double> samples);
/// Scott's rule for a 1-D Gaussian kernel: sigma_hat * n^(-1/5).
double scott_bandwidth(std::span<const double> samples);
std::vector<double> linspace(double lo, double hi, std::size_t n);
double trapezoid(std::span<const double> x, std::span<const double> y);

/// Gaussian-kernel density estimate on `grid`; Scott's bandwidth unless one
/// is given.
DensityEstimate kde_density(std::span<const double> samples, std::span<const double> grid,
                            std::optional<double> bandwidth = std::nullopt);

/// How the per-subset confidence error picks its accuracy term.
enum class SubsetAccuracyMode {
  Overall,  // subset mean confidence minus overall accuracy
  Subset,   // correct subset against 1, incorrect subset against 0
};

struct EvalReport {
  ClassificationScores scores;
  std::size_t n_correct = 0;
  std::size_t n_incorrect = 0;
  double mean_confidence = 0.0;
  std::optional<double> mean_confidence_correct;
  std::optional<double> mean_confidence_incorrect;
  std::optional<double> confidence_error_correct;
  std::optional<double> confidence_error_incorrect;
  std::optional<double> ensemble_fraction_correct;
  std::optional<double> ensemble_fraction_incorrect;
  std::vector<CalibrationBin> calibration_bins;
  double difference = 0.0;
  /// Set when no sample was misclassified; the incorrect product is then 0.
  bool difference_no_incorrect = false;
};

EvalReport evaluate_predictions(std::span<const EnsemblePrediction> predictions,
                                std::span<const int> labels,
                                SubsetAccuracyMode mode = SubsetAccuracyMode::Overall,
                                std::size_t n_bins = 10);

struct EvalRow {
  std::string metric;
  std::string subset;
  std::optional<double> value;
};

/// The report flattened in CSV order.
std::vector<EvalRow> eval_rows(const EvalReport& report);

/// Rows `metric,subset,value`; undefined values are written as `undefined`.
void write_eval_csv(std::ostream& os, const EvalReport& report);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);

}  // namespace qcbnn

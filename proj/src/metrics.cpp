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

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <numbers>
#include <string>
#include <ostream>
#include <stdexcept>

namespace qcbnn {

int argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of empty list");
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

EnsemblePrediction combine_members(std::span<const std::vector<double>> member_probabilities) {
  if (member_probabilities.empty()) throw std::invalid_argument("ensemble needs N >= 1 members");
  EnsemblePrediction out;
  const std::size_t c = member_probabilities.front().size();
  out.class_probabilities.assign(c, 0.0);
  for (const auto& p : member_probabilities) {
    if (p.size() != c) throw std::invalid_argument("ensemble members disagree on class count");
    for (std::size_t k = 0; k < c; ++k) out.class_probabilities[k] += p[k];
    out.member_votes.push_back(argmax(p));
  }
  const double n = static_cast<double>(member_probabilities.size());
  for (auto& v : out.class_probabilities) v /= n;
  out.predicted = argmax(out.class_probabilities);
  return out;
}

ClassificationScores classification_scores(std::span<const int> predictions,
                                           std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("predictions and labels differ in length");
  }
  if (labels.empty()) throw std::invalid_argument("no predictions to score");
  ClassificationScores s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] == 1, l = labels[i] == 1;
    if (p && l) ++s.tp;
    else if (p && !l) ++s.fp;
    else if (!p && l) ++s.fn;
    else ++s.tn;
  }
  s.accuracy = static_cast<double>(s.tp + s.tn) / static_cast<double>(labels.size());
  if (s.tp + s.fp > 0) s.precision = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
  if (s.tp + s.fn > 0) s.recall = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn);
  if (s.precision && s.recall && (*s.precision + *s.recall) > 0.0) {
    s.f1 = 2.0 * *s.precision * *s.recall / (*s.precision + *s.recall);
  }
  return s;
}

double confidence_error(double mean_confidence, double accuracy) {
  return mean_confidence - accuracy;
}

double ensemble_fraction(std::span<const int> votes, int final_class) {
  if (votes.empty()) throw std::invalid_argument("ensemble fraction needs at least one vote");
  const auto agree = std::count(votes.begin(), votes.end(), final_class);
  return static_cast<double>(agree) / static_cast<double>(votes.size());
}

double difference_metric(double confidence_correct, double fraction_correct,
                         double confidence_incorrect, double fraction_incorrect) {
  return confidence_correct * fraction_correct - confidence_incorrect * fraction_incorrect;
}

std::vector<CalibrationBin> calibration_curve(std::span<const double> confidences,
                                              std::span<const bool> correct, std::size_t n_bins) {
  if (n_bins < 2) throw std::invalid_argument("calibration needs at least 2 bins");
  if (confidences.size() != correct.size()) {
    throw std::invalid_argument("confidences and correctness differ in length");
  }
  std::vector<CalibrationBin> bins(n_bins);
  const double nb = static_cast<double>(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].lower = static_cast<double>(b) / nb;
    bins[b].upper = static_cast<double>(b + 1) / nb;
  }
  std::vector<double> conf_sum(n_bins, 0.0), hit_sum(n_bins, 0.0);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (c < 0.0 || c > 1.0) throw std::invalid_argument("confidence outside [0, 1]");
    auto b = static_cast<std::size_t>(std::floor(c * nb));
    if (b >= n_bins) b = n_bins - 1;
    ++bins[b].count;
    conf_sum[b] += c;
    hit_sum[b] += correct[i] ? 1.0 : 0.0;
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (bins[b].count == 0) continue;
    const double n = static_cast<double>(bins[b].count);
    bins[b].mean_confidence = conf_sum[b] / n;
    bins[b].accuracy = hit_sum[b] / n;
  }
  return bins;
}

double DensityEstimate::peak_in(double lo, double hi) const {
  double peak = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] >= lo && grid[i] <= hi) peak = std::max(peak, density[i]);
  }
  return peak;
}

double sample_stddev(std::span<const double> samples) {
  if (samples.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(samples.size() - 1));
}

double scott_bandwidth(std::span<const double> samples) {
  return sample_stddev(samples) * std::pow(static_cast<double>(samples.size()), -0.2);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw std::invalid_argument("linspace needs at least 2 points");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

DensityEstimate kde_density(std::span<const double> samples, std::span<const double> grid,
                            std::optional<double> bandwidth) {
  if (samples.size() < 2) throw std::invalid_argument("kde needs at least 2 samples");
  DensityEstimate est;
  est.grid.assign(grid.begin(), grid.end());
  est.density.assign(grid.size(), 0.0);
  if (bandwidth && !(*bandwidth > 0.0)) throw std::invalid_argument("kde bandwidth must be positive");
  if (!(sample_stddev(samples) > 0.0)) {
    est.point_mass = true;
    est.point_mass_at = samples.front();
    return est;
  }
  const double h = bandwidth ? *bandwidth : scott_bandwidth(samples);
  est.bandwidth = h;
  const double norm = 1.0 / (static_cast<double>(samples.size()) * h *
                             std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double s : samples) {
      const double u = (grid[g] - s) / h;
      acc += std::exp(-0.5 * u * u);
    }
    est.density[g] = acc * norm;
  }
  return est;
}

EvalReport evaluate_predictions(std::span<const EnsemblePrediction> predictions,
                                std::span<const int> labels, SubsetAccuracyMode mode,
                                std::size_t n_bins) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("predictions and labels differ in length");
  }
  EvalReport r;
  std::vector<int> predicted;
  std::vector<double> conf;
  std::vector<bool> hit;
  double conf_c = 0.0, conf_i = 0.0, frac_c = 0.0, frac_i = 0.0, conf_all = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    predicted.push_back(p.predicted);
    const double c = p.confidence();
    const double f = ensemble_fraction(p.member_votes, p.predicted);
    conf.push_back(c);
    conf_all += c;
    const bool ok = p.predicted == labels[i];
    hit.push_back(ok);
    if (ok) {
      ++r.n_correct;
      conf_c += c;
      frac_c += f;
    } else {
      ++r.n_incorrect;
      conf_i += c;
      frac_i += f;
    }
  }
  r.scores = classification_scores(predicted, labels);
  r.mean_confidence = conf_all / static_cast<double>(predictions.size());
  const double acc = r.scores.accuracy;
  if (r.n_correct > 0) {
    const double n = static_cast<double>(r.n_correct);
    r.mean_confidence_correct = conf_c / n;
    r.ensemble_fraction_correct = frac_c / n;
    r.confidence_error_correct = confidence_error(
        *r.mean_confidence_correct, mode == SubsetAccuracyMode::Overall ? acc : 1.0);
  }
  if (r.n_incorrect > 0) {
    const double n = static_cast<double>(r.n_incorrect);
    r.mean_confidence_incorrect = conf_i / n;
    r.ensemble_fraction_incorrect = frac_i / n;
    r.confidence_error_incorrect = confidence_error(
        *r.mean_confidence_incorrect, mode == SubsetAccuracyMode::Overall ? acc : 0.0);
  }
  r.difference_no_incorrect = r.n_incorrect == 0;
  const double correct_term =
      r.n_correct > 0 ? *r.mean_confidence_correct * *r.ensemble_fraction_correct : 0.0;
  r.difference = r.n_incorrect > 0
                     ? difference_metric(r.n_correct > 0 ? *r.mean_confidence_correct : 0.0,
                                         r.n_correct > 0 ? *r.ensemble_fraction_correct : 0.0,
                                         *r.mean_confidence_incorrect,
                                         *r.ensemble_fraction_incorrect)
                     : correct_term;
  // std::vector<bool> has no contiguous storage to span over.
  auto hits = std::make_unique<bool[]>(hit.size());
  for (std::size_t i = 0; i < hit.size(); ++i) hits[i] = hit[i];
  r.calibration_bins =
      calibration_curve(conf, std::span<const bool>(hits.get(), hit.size()), n_bins);
  return r;
}

std::vector<EvalRow> eval_rows(const EvalReport& r) {
  std::vector<EvalRow> rows{
      {"accuracy", "all", r.scores.accuracy},
      {"precision", "all", r.scores.precision},
      {"recall", "all", r.scores.recall},
      {"f1", "all", r.scores.f1},
      {"count", "correct", static_cast<double>(r.n_correct)},
      {"count", "incorrect", static_cast<double>(r.n_incorrect)},
      {"mean_confidence", "all", r.mean_confidence},
      {"mean_confidence", "correct", r.mean_confidence_correct},
      {"mean_confidence", "incorrect", r.mean_confidence_incorrect},
      {"confidence_error", "correct", r.confidence_error_correct},
      {"confidence_error", "incorrect", r.confidence_error_incorrect},
      {"ensemble_fraction", "correct", r.ensemble_fraction_correct},
      {"ensemble_fraction", "incorrect", r.ensemble_fraction_incorrect},
      {"difference", "all", r.difference},
      {"difference_no_incorrect", "all", r.difference_no_incorrect ? 1.0 : 0.0},
  };
  for (std::size_t b = 0; b < r.calibration_bins.size(); ++b) {
    const auto& bin = r.calibration_bins[b];
    const std::string subset = "bin" + std::to_string(b);
    rows.push_back({"calibration_count", subset, static_cast<double>(bin.count)});
    rows.push_back({"calibration_confidence", subset,
                    bin.empty() ? std::nullopt : std::optional<double>(bin.mean_confidence)});
    rows.push_back({"calibration_accuracy", subset,
                    bin.empty() ? std::nullopt : std::optional<double>(bin.accuracy)});
  }
  return rows;
}

void write_eval_csv(std::ostream& os, const EvalReport& r) {
  const auto old_precision = os.precision(17);
  os << "metric,subset,value\n";
  for (const auto& row : eval_rows(r)) {
    os << row.metric << ',' << row.subset << ',';
    if (row.value) os << *row.value;
    else os << "undefined";
    os << '\n';
  }
  os.precision(old_precision);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS statistic needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace qcbnn

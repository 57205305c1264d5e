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

#include "qcbnn/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qcbnn/config.hpp"
#include "qcbnn/metrics.hpp"
#include "qcbnn/runner.hpp"
#include "qcbnn/svg.hpp"

namespace qcbnn {

namespace fs = std::filesystem;

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const fs::path& path) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw std::runtime_error(path.string() + ": missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path.string() + ": empty file");
  t.header = split_csv_line(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto row = split_csv_line(line);
    if (row.size() != t.header.size()) {
      throw std::runtime_error(path.string() + ": row has " + std::to_string(row.size()) +
                               " columns, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::optional<double> parse_value(const std::string& s) {
  if (s == "undefined" || s.empty()) return std::nullopt;
  return std::stod(s);
}

struct SeedRun {
  std::uint64_t seed = 0;
  fs::path dir;
};

struct Cell {
  std::string label;
  std::vector<SeedRun> seeds;
};

std::vector<Cell> discover(const fs::path& root) {
  std::vector<Cell> cells;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory() || entry.path().filename() == "report") continue;
    Cell c{entry.path().filename().string(), {}};
    for (const auto& sub : fs::directory_iterator(entry.path())) {
      const std::string name = sub.path().filename().string();
      if (!sub.is_directory() || name.rfind("seed_", 0) != 0) continue;
      try {
        c.seeds.push_back({std::stoull(name.substr(5)), sub.path()});
      } catch (const std::exception&) {
        continue;
      }
    }
    if (c.seeds.empty()) continue;
    std::sort(c.seeds.begin(), c.seeds.end(),
              [](const SeedRun& a, const SeedRun& b) { return a.seed < b.seed; });
    cells.push_back(std::move(c));
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.label < b.label; });
  return cells;
}

struct MeanStd {
  double mean = 0.0, std = 0.0;
  std::size_t n = 0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  out.n = v.size();
  if (v.empty()) return out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

class Writer {
 public:
  Writer(fs::path dir, ReportResult& result, std::ostream* log)
      : dir_(std::move(dir)), result_(result), log_(log) {}

  void file(const std::string& name, const std::string& text) {
    const fs::path path = dir_ / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << text;
    result_.written.push_back(path);
    if (log_ != nullptr) *log_ << "wrote " << path.string() << '\n';
  }

  void notice(const std::string& text) {
    result_.notices.push_back(text);
    if (log_ != nullptr) *log_ << "notice: " << text << '\n';
  }

  /// True when `path` exists; otherwise records a notice naming it.
  bool need(const fs::path& path, const std::string& figure) {
    if (fs::exists(path)) return true;
    notice(figure + ": missing input " + path.string());
    return false;
  }

 private:
  fs::path dir_;
  ReportResult& result_;
  std::ostream* log_;
};

std::ostringstream csv_stream() {
  std::ostringstream os;
  os.precision(17);
  return os;
}

void training_curves(const std::vector<Cell>& cells, Writer& w) {
  auto csv = csv_stream();
  csv << "cell,epoch,split,metric,mean,std,n\n";
  std::vector<PlotSeries> acc, loss;
  for (const auto& c : cells) {
    // (split, metric) -> epoch -> values over seeds
    std::map<std::pair<std::string, std::string>, std::map<std::size_t, std::vector<double>>> values;
    for (const auto& s : c.seeds) {
      const fs::path path = s.dir / run_files::kEpochs;
      if (!w.need(path, "training curves")) continue;
      const auto t = read_csv(path);
      const auto ce = t.column("epoch", path), cs = t.column("split", path);
      const auto ca = t.column("accuracy", path), cl = t.column("combined", path);
      for (const auto& row : t.rows) {
        const auto epoch = static_cast<std::size_t>(std::stoul(row[ce]));
        if (auto v = parse_value(row[ca])) values[{row[cs], "accuracy"}][epoch].push_back(*v);
        if (auto v = parse_value(row[cl])) values[{row[cs], "combined"}][epoch].push_back(*v);
      }
    }
    for (const auto& [key, by_epoch] : values) {
      PlotSeries series{c.label + " " + key.first, {}, {}, {}, false};
      for (const auto& [epoch, v] : by_epoch) {
        const auto ms = mean_std(v);
        csv << c.label << ',' << epoch << ',' << key.first << ',' << key.second << ',' << ms.mean << ','
            << ms.std << ',' << ms.n << '\n';
        series.x.push_back(static_cast<double>(epoch));
        series.y.push_back(ms.mean);
        series.spread.push_back(ms.std);
      }
      (key.second == "accuracy" ? acc : loss).push_back(std::move(series));
    }
  }
  if (acc.empty() && loss.empty()) {
    w.notice("training curves skipped: no epochs.csv found");
    return;
  }
  w.file("training_curves.csv", csv.str());
  w.file("accuracy_curves.svg",
         svg_line_plot({"Accuracy per epoch (mean +/- std over seeds)", "epoch", "accuracy", std::nullopt,
                        std::pair{0.0, 1.05}},
                       acc));
  w.file("loss_curves.svg",
         svg_line_plot({"Combined training loss (mean +/- std over seeds)", "epoch", "loss", std::nullopt,
                        std::nullopt},
                       loss));
}

/// Per-seed value of a metric/subset row in eval.csv.
std::optional<double> eval_value(const CsvTable& t, const fs::path& path, const std::string& metric,
                                 const std::string& subset) {
  const auto cm = t.column("metric", path), cs = t.column("subset", path), cv = t.column("value", path);
  for (const auto& row : t.rows) {
    if (row[cm] == metric && row[cs] == subset) return parse_value(row[cv]);
  }
  return std::nullopt;
}

struct EvalPoint {
  std::string cell;
  std::uint64_t seed;
  double accuracy;
  std::optional<double> difference;
};

std::vector<EvalPoint> collect_eval(const std::vector<Cell>& cells, Writer& w) {
  std::vector<EvalPoint> out;
  for (const auto& c : cells) {
    for (const auto& s : c.seeds) {
      const fs::path path = s.dir / run_files::kEval;
      if (!w.need(path, "test accuracy")) continue;
      const auto t = read_csv(path);
      const auto acc = eval_value(t, path, "accuracy", "all");
      if (!acc) {
        w.notice("test accuracy: no accuracy row in " + path.string());
        continue;
      }
      out.push_back({c.label, s.seed, *acc, eval_value(t, path, "difference", "all")});
    }
  }
  return out;
}

void test_accuracy(const std::vector<EvalPoint>& points, Writer& w) {
  if (points.empty()) {
    w.notice("test accuracy skipped: no eval.csv found");
    return;
  }
  auto csv = csv_stream();
  csv << "cell,seed,accuracy\n";
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by_cell;
  for (const auto& p : points) {
    csv << p.cell << ',' << p.seed << ',' << p.accuracy << '\n';
    if (!by_cell.count(p.cell)) order.push_back(p.cell);
    by_cell[p.cell].push_back(p.accuracy);
  }
  w.file("test_accuracy.csv", csv.str());
  auto box_csv = csv_stream();
  box_csv << "cell,min,q1,median,q3,max,n\n";
  std::vector<BoxStats> boxes;
  for (const auto& cell : order) {
    boxes.push_back(box_stats(cell, by_cell[cell]));
    const auto& b = boxes.back();
    box_csv << cell << ',' << b.min << ',' << b.q1 << ',' << b.median << ',' << b.q3 << ',' << b.max << ','
            << b.n << '\n';
  }
  w.file("test_accuracy_box.csv", box_csv.str());
  w.file("test_accuracy.svg",
         svg_box_plot({"Test accuracy over seeds", "", "accuracy", std::nullopt, std::nullopt}, boxes));
}

void difference_scatter(const std::vector<EvalPoint>& points, Writer& w) {
  auto csv = csv_stream();
  csv << "cell,seed,accuracy,difference\n";
  std::vector<PlotSeries> series;
  std::map<std::string, std::size_t> index;
  for (const auto& p : points) {
    if (!p.difference) continue;
    csv << p.cell << ',' << p.seed << ',' << p.accuracy << ',' << *p.difference << '\n';
    if (!index.count(p.cell)) {
      index[p.cell] = series.size();
      series.push_back({p.cell, {}, {}, {}, true});
    }
    auto& s = series[index[p.cell]];
    s.x.push_back(p.accuracy);
    s.y.push_back(*p.difference);
  }
  if (series.empty()) {
    w.notice("difference scatter skipped: no difference values in eval.csv files");
    return;
  }
  w.file("difference_vs_accuracy.csv", csv.str());
  w.file("difference_vs_accuracy.svg",
         svg_line_plot({"Difference metric against test accuracy", "test accuracy", "difference",
                        std::nullopt, std::nullopt},
                       series));
}

struct PooledPredictions {
  std::vector<double> confidence;
  std::vector<double> fraction;
  std::vector<bool> correct;
};

void prediction_figures(const std::vector<Cell>& cells, const OutputConfig& out_cfg, Writer& w) {
  auto density_csv = csv_stream();
  density_csv << "cell,quantity,subset,x,density,n,point_mass\n";
  auto calib_csv = csv_stream();
  calib_csv << "cell,bin,lower,upper,count,mean_confidence,accuracy\n";
  std::vector<PlotSeries> conf_series, frac_series, calib_series;
  const auto grid = linspace(0.0, 1.0, 201);
  for (const auto& c : cells) {
    PooledPredictions pooled;
    for (const auto& s : c.seeds) {
      const fs::path path = s.dir / run_files::kPredictions;
      if (!w.need(path, "confidence densities and calibration")) continue;
      std::ifstream is(path);
      std::vector<int> labels;
      const auto preds = read_predictions_csv(is, labels);
      for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto& p = preds[i];
        pooled.confidence.push_back(p.class_probabilities[static_cast<std::size_t>(p.predicted)]);
        pooled.fraction.push_back(ensemble_fraction(p.member_votes, p.predicted));
        pooled.correct.push_back(p.predicted == labels[i]);
      }
    }
    if (pooled.confidence.empty()) continue;
    for (const auto& [quantity, values, target] :
         {std::tuple{"confidence", &pooled.confidence, &conf_series},
          std::tuple{"ensemble_fraction", &pooled.fraction, &frac_series}}) {
      for (const bool want : {true, false}) {
        const std::string subset = want ? "correct" : "incorrect";
        std::vector<double> sub;
        for (std::size_t i = 0; i < values->size(); ++i) {
          if (pooled.correct[i] == want) sub.push_back((*values)[i]);
        }
        if (sub.empty()) {
          w.notice(std::string(quantity) + " density: cell " + c.label + " has no " + subset +
                   " predictions");
          continue;
        }
        const auto kde = kde_density(sub, grid);
        PlotSeries series{c.label + " " + subset, {}, {}, {}, false};
        for (std::size_t i = 0; i < grid.size(); ++i) {
          density_csv << c.label << ',' << quantity << ',' << subset << ',' << grid[i] << ','
                      << kde.density[i] << ',' << sub.size() << ','
                      << (kde.point_mass ? "true" : "false") << '\n';
        }
        if (kde.point_mass) {
          series.x = {kde.point_mass_at};
          series.y = {0.0};
          series.markers_only = true;
          series.name += " (all at " + std::to_string(kde.point_mass_at) + ")";
        } else {
          series.x = grid;
          series.y = kde.density;
        }
        target->push_back(std::move(series));
      }
    }
    const auto flags = std::make_unique<bool[]>(pooled.correct.size());
    std::copy(pooled.correct.begin(), pooled.correct.end(), flags.get());
    const auto bins = calibration_curve(pooled.confidence, {flags.get(), pooled.correct.size()},
                                        out_cfg.calibration_bins);
    PlotSeries series{c.label, {}, {}, {}, false};
    for (std::size_t b = 0; b < bins.size(); ++b) {
      const auto& bin = bins[b];
      calib_csv << c.label << ',' << b << ',' << bin.lower << ',' << bin.upper << ',' << bin.count << ',';
      if (bin.count > 0) {
        calib_csv << bin.mean_confidence << ',' << bin.accuracy << '\n';
        series.x.push_back(bin.mean_confidence);
        series.y.push_back(bin.accuracy);
      } else {
        calib_csv << "undefined,undefined\n";
      }
    }
    calib_series.push_back(std::move(series));
  }
  if (calib_series.empty()) {
    w.notice("confidence densities and calibration skipped: no predictions.csv found");
    return;
  }
  w.file("prediction_densities.csv", density_csv.str());
  w.file("confidence_density.svg",
         svg_line_plot({"Ensemble confidence density", "confidence", "density", std::pair{0.0, 1.0},
                        std::nullopt},
                       conf_series));
  w.file("ensemble_fraction_density.svg",
         svg_line_plot({"Ensemble vote fraction density", "fraction of members agreeing", "density",
                        std::pair{0.0, 1.0}, std::nullopt},
                       frac_series));
  w.file("calibration.csv", calib_csv.str());
  calib_series.insert(calib_series.begin(), PlotSeries{"ideal", {0.0, 1.0}, {0.0, 1.0}, {}, false});
  w.file("calibration.svg",
         svg_line_plot({"Calibration", "mean confidence", "accuracy", std::pair{0.0, 1.0},
                        std::pair{0.0, 1.0}},
                       calib_series));
}

std::vector<double> read_weights(const fs::path& path) {
  const auto t = read_csv(path);
  const auto cv = t.column("value", path);
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) out.push_back(std::stod(row[cv]));
  return out;
}

void weight_figures(const std::vector<Cell>& cells, const OutputConfig& out_cfg, Writer& w) {
  const auto grid = linspace(out_cfg.kde_low, out_cfg.kde_high, out_cfg.kde_points);
  auto kde_csv = csv_stream();
  kde_csv << "cell,x,density\n";
  auto peak_csv = csv_stream();
  peak_csv << "cell,seed,peak_near_zero\n";
  std::vector<PlotSeries> series;
  for (const auto& c : cells) {
    std::vector<double> pooled;
    for (const auto& s : c.seeds) {
      const fs::path path = s.dir / run_files::kWeights;
      if (!w.need(path, "weight density")) continue;
      const auto values = read_weights(path);
      const auto kde = kde_density(values, grid);
      peak_csv << c.label << ',' << s.seed << ','
               << kde.peak_in(-kPeakNearZeroHalfWidth, kPeakNearZeroHalfWidth) << '\n';
      pooled.insert(pooled.end(), values.begin(), values.end());
    }
    if (pooled.empty()) continue;
    const auto kde = kde_density(pooled, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) kde_csv << c.label << ',' << grid[i] << ',' << kde.density[i] << '\n';
    series.push_back({c.label, grid, kde.density, {}, false});
  }
  if (series.empty()) {
    w.notice("weight density skipped: no weights.csv found");
    return;
  }
  w.file("weight_kde.csv", kde_csv.str());
  w.file("weight_peaks.csv", peak_csv.str());
  w.file("weight_kde.svg", svg_line_plot({"Pooled convolution-weight density", "weight value", "density",
                                          std::pair{out_cfg.kde_low, out_cfg.kde_high}, std::nullopt},
                                         series));
}

struct DepthKey {
  std::string arch;
  bool reupload;
  auto operator<=>(const DepthKey&) const = default;
};

void depth_comparison(const std::vector<EvalPoint>& points, Writer& w) {
  // Labels of quantum cells: quantum_<arch>_L<n>[_re].
  std::map<DepthKey, std::map<std::size_t, std::vector<double>>> acc;
  for (const auto& p : points) {
    if (p.cell.rfind("quantum_", 0) != 0) continue;
    std::string rest = p.cell.substr(8);
    bool re = false;
    if (rest.size() > 3 && rest.compare(rest.size() - 3, 3, "_re") == 0) {
      re = true;
      rest.resize(rest.size() - 3);
    }
    const auto pos = rest.rfind("_L");
    if (pos == std::string::npos) continue;
    std::size_t layers = 0;
    try {
      layers = std::stoul(rest.substr(pos + 2));
    } catch (const std::exception&) {
      continue;
    }
    acc[{rest.substr(0, pos), re}][layers].push_back(p.accuracy);
  }
  if (acc.empty()) {
    w.notice("depth comparison skipped: no quantum cells with test accuracy");
    return;
  }
  auto csv = csv_stream();
  csv << "arch,reupload,layers,mean_accuracy,std,n\n";
  std::vector<PlotSeries> series;
  for (const auto& [key, by_layers] : acc) {
    PlotSeries s{key.arch + (key.reupload ? " reupload" : ""), {}, {}, {}, by_layers.size() == 1};
    for (const auto& [layers, v] : by_layers) {
      const auto ms = mean_std(v);
      csv << key.arch << ',' << (key.reupload ? "true" : "false") << ',' << layers << ',' << ms.mean << ','
          << ms.std << ',' << ms.n << '\n';
      s.x.push_back(static_cast<double>(layers));
      s.y.push_back(ms.mean);
      s.spread.push_back(ms.std);
    }
    series.push_back(std::move(s));
  }
  w.file("depth_comparison.csv", csv.str());
  w.file("depth_comparison.svg", svg_line_plot({"Test accuracy against circuit depth", "layers",
                                                "test accuracy", std::nullopt, std::nullopt},
                                               series));
}

}  // namespace

ReportResult run_report(const fs::path& results_dir, std::ostream* log) {
  if (!fs::is_directory(results_dir)) {
    throw std::runtime_error("results directory " + results_dir.string() + " does not exist");
  }
  ReportResult result;
  const fs::path out = results_dir / "report";
  fs::create_directories(out);
  Writer w(out, result, log);

  OutputConfig out_cfg;
  if (const fs::path root_cfg = results_dir / run_files::kConfig; fs::exists(root_cfg)) {
    out_cfg = load_config(root_cfg).output;
  }
  const auto cells = discover(results_dir);
  if (cells.empty()) {
    w.notice("no <cell>/seed_<k> run directories under " + results_dir.string());
    return result;
  }
  for (const auto& c : cells) {
    for (const auto& s : c.seeds) {
      if (fs::exists(s.dir / run_files::kIncomplete)) {
        w.notice("run " + s.dir.string() + " is marked incomplete");
      }
    }
  }
  training_curves(cells, w);
  const auto points = collect_eval(cells, w);
  test_accuracy(points, w);
  difference_scatter(points, w);
  prediction_figures(cells, out_cfg, w);
  weight_figures(cells, out_cfg, w);
  depth_comparison(points, w);
  return result;
}

}  // namespace qcbnn

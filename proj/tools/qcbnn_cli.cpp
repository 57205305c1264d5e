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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qcbnn/bayes_train.hpp"
#include "qcbnn/config.hpp"
#include "qcbnn/report.hpp"
#include "qcbnn/runner.hpp"

namespace {

using namespace qcbnn;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ",") + x;
  return out;
}

struct TrainArgs {
  std::string config;
  std::vector<std::string> archs, seeds, layers, reuploads, sets;
  std::optional<std::string> model, out;
  std::optional<double> alpha, beta;
  std::optional<std::size_t> ensemble, epochs, threads;
};

RunConfig build_config(const TrainArgs& a) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : load_config(a.config);
  if (const char* env = std::getenv("QBNN_OUT"); env != nullptr && *env != '\0') {
    apply_override(cfg, "output.out", env);
  }
  if (a.model) apply_override(cfg, "train.model", *a.model);
  if (!a.archs.empty()) apply_override(cfg, "sweep.archs", join(a.archs));
  if (!a.seeds.empty()) apply_override(cfg, "sweep.seeds", join(a.seeds));
  if (!a.layers.empty()) apply_override(cfg, "sweep.layer_counts", join(a.layers));
  if (!a.reuploads.empty()) apply_override(cfg, "sweep.reuploads", join(a.reuploads));
  if (a.alpha) apply_override(cfg, "train.alpha", std::to_string(*a.alpha));
  if (a.beta) apply_override(cfg, "train.beta", std::to_string(*a.beta));
  if (a.ensemble) apply_override(cfg, "train.ensemble", std::to_string(*a.ensemble));
  if (a.epochs) apply_override(cfg, "train.epochs", std::to_string(*a.epochs));
  if (a.threads) apply_override(cfg, "train.threads", std::to_string(*a.threads));
  if (a.out) apply_override(cfg, "output.out", *a.out);
  for (const auto& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

void print_report(const ReportResult& r) {
  std::cout << "report: " << r.written.size() << " files written";
  if (!r.notices.empty()) std::cout << ", " << r.notices.size() << " notices";
  std::cout << '\n';
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-classical Bayesian neural network toolkit"};
  app.require_subcommand(1);

  TrainArgs train_args;
  bool print_config = false;
  auto* train_cmd = app.add_subcommand("train", "Train every sweep cell and seed");
  train_cmd->add_option("--config", train_args.config, "Configuration file")->check(CLI::ExistingFile);
  train_cmd->add_option("--model", train_args.model, "quantum, classical or vi");
  train_cmd->add_option("--arch", train_args.archs, "Architecture ids or 'all'")->delimiter(',');
  train_cmd->add_option("--seed", train_args.seeds, "Seeds")->delimiter(',');
  train_cmd->add_option("--layers", train_args.layers, "Layer counts")->delimiter(',');
  train_cmd->add_option("--reupload", train_args.reuploads, "Re-uploading flags")->delimiter(',');
  train_cmd->add_option("--alpha", train_args.alpha, "Likelihood weight");
  train_cmd->add_option("--beta", train_args.beta, "KL weight");
  train_cmd->add_option("--ensemble", train_args.ensemble, "Ensemble size at evaluation");
  train_cmd->add_option("--epochs", train_args.epochs, "Training epochs");
  train_cmd->add_option("--threads", train_args.threads, "Worker threads");
  train_cmd->add_option("--out", train_args.out, "Output root (overrides QBNN_OUT)");
  train_cmd->add_option("--set", train_args.sets, "Config override key=value")->take_all();
  train_cmd->add_flag("--print-config", print_config, "Print the effective config and exit");

  std::string run_dir;
  std::optional<std::size_t> eval_ensemble;
  std::optional<std::uint64_t> eval_seed;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("evaluate", "Re-evaluate a finished seed directory");
  eval_cmd->add_option("--run", run_dir, "Seed directory")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--ensemble", eval_ensemble, "Ensemble size");
  eval_cmd->add_option("--seed", eval_seed, "Evaluation seed");
  eval_cmd->add_option("--out", eval_out, "Eval CSV path (default stdout)");

  std::size_t n_draws = 100;
  std::uint64_t draw_seed = 0;
  std::string weights_out, kde_out;
  auto* sample_cmd = app.add_subcommand("sample-weights", "Draw convolution weights from a run");
  sample_cmd->add_option("--run", run_dir, "Seed directory")->required()->check(CLI::ExistingDirectory);
  sample_cmd->add_option("--n", n_draws, "Number of weight draws")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", draw_seed, "Draw seed");
  sample_cmd->add_option("--weights-out", weights_out, "Weights CSV (default <run>/sampled_weights.csv)");
  sample_cmd->add_option("--kde-out", kde_out, "KDE CSV (default <run>/sampled_kde.csv)");

  ToyConfig toy;
  std::string toy_out;
  bool toy_full = false;
  auto* toy_cmd = app.add_subcommand("toy-adversarial", "Fit a classical generator to the prior");
  toy_cmd->add_option("--steps", toy.steps, "Maximum steps");
  toy_cmd->add_option("--seed", toy.seed, "Seed");
  toy_cmd->add_option("--noise-dim", toy.noise_dim, "Generator noise width");
  toy_cmd->add_option("--check-every", toy.check_every, "Steps between KS checks");
  toy_cmd->add_flag("--no-stop", toy_full, "Run every step instead of stopping at the KS target");
  toy_cmd->add_option("--out", toy_out, "Trace CSV (default stdout)");

  std::string results_dir;
  auto* report_cmd = app.add_subcommand("report", "Aggregate CSV and SVG figures from a results root");
  report_cmd->add_option("--results", results_dir, "Results root (default QBNN_OUT or 'results')");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train_cmd) {
      const RunConfig cfg = build_config(train_args);
      if (print_config) {
        std::cout << echo_config(cfg);
        return kExitOk;
      }
      run_train(cfg, &std::cout);
      std::cout << "results in " << cfg.output.out.string() << '\n';
      if (cfg.output.report) print_report(run_report(cfg.output.out, &std::cout));
    } else if (*eval_cmd) {
      if (eval_out.empty()) {
        run_evaluate(run_dir, eval_ensemble, eval_seed, std::cout);
      } else {
        auto os = open_out(eval_out);
        run_evaluate(run_dir, eval_ensemble, eval_seed, os);
      }
    } else if (*sample_cmd) {
      const fs::path dir = run_dir;
      auto w = open_out(weights_out.empty() ? dir / "sampled_weights.csv" : fs::path(weights_out));
      auto k = open_out(kde_out.empty() ? dir / "sampled_kde.csv" : fs::path(kde_out));
      run_sample_weights(dir, n_draws, draw_seed, w, k);
    } else if (*toy_cmd) {
      toy.stop_at_target = !toy_full;
      const ToyResult r = run_toy_adversarial(toy);
      if (toy_out.empty()) {
        write_toy_csv(std::cout, r);
      } else {
        auto os = open_out(toy_out);
        write_toy_csv(os, r);
      }
      std::cerr << "final KS " << r.final_ks;
      if (r.reached_at) std::cerr << ", reached " << toy.ks_target << " at step " << *r.reached_at;
      std::cerr << '\n';
    } else if (*report_cmd) {
      if (results_dir.empty()) {
        const char* env = std::getenv("QBNN_OUT");
        results_dir = env != nullptr && *env != '\0' ? env : "results";
      }
      const ReportResult r = run_report(results_dir, &std::cout);
      print_report(r);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const TrainingDivergence& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
  return kExitOk;
}

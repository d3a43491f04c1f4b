// Copyright 2026 The tcnae Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tcnae/errors.hpp"
#include "tcnae/experiment.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string checkpoint;
  std::string series;
  std::optional<double> delta;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "Experiment config (JSON)")->required();
  cmd->add_option("--seed", o.seed, "Override the training seed (synth: the generator seed)");
  cmd->add_option("--out", o.out, "Override the output directory");
}

void add_checkpoint(CLI::App* cmd, Options& o) {
  cmd->add_option("--checkpoint", o.checkpoint,
                  "Checkpoint directory (default: <out>/checkpoint)");
}

int run(const std::string& command, const Options& o) {
  using namespace tcnae;
  ExperimentConfig config = load_experiment_config(o.config);
  if (!o.out.empty()) config.output_dir = o.out;
  if (o.seed) {
    if (command == "synth") {
      config.data.synth_seed = *o.seed;
    } else {
      config.training.seed = *o.seed;
    }
  }
  const std::filesystem::path checkpoint =
      o.checkpoint.empty() ? config.output_dir / "checkpoint" : std::filesystem::path(o.checkpoint);
  std::optional<std::filesystem::path> series;
  if (!o.series.empty()) series = o.series;

  if (command == "train") {
    run_train(config, std::cerr);
  } else if (command == "eval") {
    const MetricsReport r = run_eval(config, checkpoint, std::cerr);
    std::cout << r.to_json().dump(2) << "\n";
  } else if (command == "stream") {
    const StreamSummary s = run_stream(config, checkpoint, series, o.delta, std::cerr);
    if (s.multi_shot.tp + s.multi_shot.fp + s.multi_shot.fn > 0) {
      std::cout << "multi-shot F1 " << s.multi_shot_f1() << "\n";
    }
    if (s.one_shot.tp + s.one_shot.fp + s.one_shot.fn > 0) {
      std::cout << "1-shot F1 " << s.one_shot_f1() << " (delta " << s.delta << ")\n";
    }
  } else if (command == "compress") {
    const CompressionReport r = run_compress(config, checkpoint, series, std::cerr);
    if (!r.lossless || !r.reconstruction_exact) {
      std::cerr << "error: decoded latents or reconstructions do not match\n";
      return kExitFailure;
    }
  } else if (command == "sweep") {
    bool failed = false;
    for (const SweepRow& row : run_sweep(config, std::cerr)) failed = failed || !row.error.empty();
    if (failed) std::cerr << "some sweep cells failed; see sweep.csv\n";
  } else if (command == "synth") {
    run_synth(config, std::cerr);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate-distortion optimized temporal convolutional autoencoder for time-series "
               "anomaly detection"};
  app.require_subcommand(1);
  Options o;
  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  auto* eval = app.add_subcommand("eval", "1-shot F1 over the delta grid on the validation sets");
  auto* stream = app.add_subcommand("stream", "Stride-1 multi-shot detection");
  auto* compress = app.add_subcommand("compress", "Entropy-code window latents to bitstreams");
  auto* sweep = app.add_subcommand("sweep", "Train and evaluate a grid of model types and fractions");
  auto* synth = app.add_subcommand("synth", "Write the synthetic corpus as CSV files");
  for (auto* cmd : {train, eval, stream, compress, sweep, synth}) add_common(cmd, o);
  for (auto* cmd : {eval, stream, compress}) add_checkpoint(cmd, o);
  for (auto* cmd : {stream, compress}) {
    cmd->add_option("--series", o.series, "A single CSV series instead of the validation sets");
  }
  stream->add_option("--delta", o.delta, "1-shot threshold (default: best validation delta)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tcnae::kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, o);
  } catch (const tcnae::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return tcnae::kExitConfig;
  } catch (const tcnae::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return tcnae::kExitData;
  } catch (const tcnae::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return tcnae::kExitData;
  } catch (const tcnae::NumericAbort& e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return tcnae::kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tcnae::kExitFailure;
  }
}

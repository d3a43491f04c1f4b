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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcnae/checkpoint.hpp"
#include "tcnae/data.hpp"
#include "tcnae/evaluation.hpp"
#include "tcnae/model.hpp"
#include "tcnae/training.hpp"

namespace tcnae {

struct DataConfig {
  std::string source = "synth";  // "synth" or "csv"
  std::filesystem::path directory;
  CsvOptions csv;
  SynthConfig synth;
  std::uint64_t synth_seed = 0;
  double anomaly_fraction = 0.05;
  std::uint64_t split_seed = 0;
  std::size_t validation_sets = 5;
  std::size_t train_stride = 10;
};

struct DetectionConfig {
  double delta_min = 0.2;
  double delta_max = 3.0;
  double delta_step = 0.05;
  // Used by `stream` on a single series when no sweep is available.
  double delta = kDefaultDelta;
  double confidence_limit = kDefaultConfidenceLimit;

  std::vector<double> grid() const { return delta_grid(delta_min, delta_max, delta_step); }
};

struct SweepConfig {
  std::vector<double> anomaly_fractions = {0.0, 0.05};
  std::vector<std::string> models = {"rdo", "ae"};
  std::vector<std::uint64_t> seeds = {0};
};

struct ExperimentConfig {
  TcnConfig model;
  TrainOptions training;
  DataConfig data;
  DetectionConfig detection;
  SweepConfig sweep;
  std::filesystem::path output_dir = "runs/default";

  // Canonical form: every field, sorted keys.
  nlohmann::json to_json() const;
  // Strict: unknown keys and invalid values raise ConfigError. Missing keys
  // keep their defaults.
  static ExperimentConfig from_json(const nlohmann::json& j);
  // 16 hex digits of FNV-1a 64 over the canonical JSON dump.
  std::string hash() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Loaded or synthesized sets with the split and the training-set
// normalization applied to every set.
struct PreparedData {
  std::vector<LabeledSeries> raw;
  std::vector<LabeledSeries> normalized;
  std::vector<std::size_t> train_sets;
  std::vector<std::size_t> validation_sets;
  Normalization normalization;
};

PreparedData prepare_data(const DataConfig& config, std::size_t channels);

struct MetricsReport {
  std::string config_hash;
  std::string model_type;  // "RDO" or "AE"
  double anomaly_pct = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::size_t channel_width = 0;
  std::uint64_t seed = 0;
  DeltaSweep sweep;
  std::vector<std::string> validation_ids;
  std::string train_report;  // file name beside metrics.json, when present

  double best_f1() const { return sweep.best_point().f1; }
  double best_delta() const { return sweep.best_point().delta; }
  nlohmann::json to_json() const;
};

struct TrainOutcome {
  std::filesystem::path checkpoint_dir;
  TrainReport report;
};

// Each command writes into config.output_dir. Outputs are documented in
// README.md; every file records the config hash.
TrainOutcome run_train(const ExperimentConfig& config, std::ostream& log);
MetricsReport run_eval(const ExperimentConfig& config,
                       const std::filesystem::path& checkpoint_dir, std::ostream& log);

struct StreamSummary {
  double delta = 0.0;
  DetectionCounts multi_shot;
  DetectionCounts one_shot;  // same delta, same series
  double multi_shot_f1() const { return multi_shot.f1(); }
  double one_shot_f1() const { return one_shot.f1(); }
};

// Streams the validation sets, or `series` when given. The threshold is the
// best 1-shot delta on the validation sets unless `delta` is set.
StreamSummary run_stream(const ExperimentConfig& config,
                         const std::filesystem::path& checkpoint_dir,
                         const std::optional<std::filesystem::path>& series,
                         std::optional<double> delta, std::ostream& log);
CompressionReport run_compress(const ExperimentConfig& config,
                               const std::filesystem::path& checkpoint_dir,
                               const std::optional<std::filesystem::path>& series,
                               std::ostream& log);

struct SweepRow {
  std::string model;
  double anomaly_fraction = 0.0;
  std::uint64_t seed = 0;
  std::optional<MetricsReport> metrics;
  std::string error;  // set when the cell failed
};

// Trains and evaluates every (model, fraction, seed) cell under
// output_dir/cells/, isolating failures, and writes output_dir/sweep.csv.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config, std::ostream& log);
// Writes the synthetic sets as CSV files plus synth.json into output_dir.
void run_synth(const ExperimentConfig& config, std::ostream& log);

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitNumeric = 4,
};

}  // namespace tcnae

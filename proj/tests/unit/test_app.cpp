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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tcnae/experiment.hpp"

using namespace tcnae;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config(const fs::path& out) {
  nlohmann::json j = {
      {"model", {{"input_channels", 2}, {"window_length", 40}, {"blocks", 2},
                 {"channel_width", 4}, {"latent_dim", 8}}},
      {"training", {{"lambda1", 50.0}, {"lambda2", 50.0}, {"learning_rate", 0.003},
                    {"batch_size", 8}, {"epochs", 2}, {"seed", 3}}},
      {"data", {{"synth", {{"channels", 2}, {"length", 200}, {"sets", 6}}},
                {"synth_seed", 4}, {"validation_sets", 2}, {"anomaly_fraction", 0.05},
                {"train_stride", 5}}},
      {"output", {{"directory", out.string()}}}};
  return ExperimentConfig::from_json(j);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tcnae_unit_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("experiment config is strict and canonical") {
  const ExperimentConfig defaults = ExperimentConfig::from_json(nlohmann::json::object());
  CHECK(defaults.model.channel_width == 128);
  CHECK(defaults.training.weights.lambda1 == 1e5);
  CHECK(defaults.detection.grid().size() == 57);

  const ExperimentConfig back = ExperimentConfig::from_json(defaults.to_json());
  CHECK(back.to_json() == defaults.to_json());
  CHECK(back.hash() == defaults.hash());
  CHECK(defaults.hash().size() == 16);

  CHECK_THROWS_AS(ExperimentConfig::from_json({{"modle", nlohmann::json::object()}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"training", {{"epochz", 3}}}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"training", {{"epochs", "many"}}}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"training", {{"lambda1", -1.0}}}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"model", {{"latent_dim", 100000}}}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"data", {{"source", "ftp"}}}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"detection", {{"confidence_limit", 1.5}}}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"sweep", {{"models", {"rdo", "gan"}}}}}), ConfigError);
}

TEST_CASE("hash ignores the output directory only") {
  const ExperimentConfig a = tiny_config("/tmp/a");
  const ExperimentConfig b = tiny_config("/tmp/b");
  CHECK(a.hash() == b.hash());
  ExperimentConfig c = a;
  c.training.seed = 99;
  CHECK(c.hash() != a.hash());
}

TEST_CASE("config files") {
  const fs::path dir = fresh_dir("config");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(load_experiment_config(dir / "bad.json"), ConfigError);
  CHECK_THROWS_AS(load_experiment_config(dir / "absent.json"), ConfigError);
  std::ofstream(dir / "good.json") << tiny_config(dir).to_json().dump();
  CHECK(load_experiment_config(dir / "good.json").hash() == tiny_config(dir).hash());
}

TEST_CASE("train, evaluate, stream and compress a tiny model") {
  const fs::path out = fresh_dir("pipeline");
  const ExperimentConfig config = tiny_config(out);
  std::ostringstream log;
  const TrainOutcome trained = run_train(config, log);
  CHECK(trained.report.epochs.size() == 2);
  CHECK(fs::exists(out / "checkpoint" / "model.bin"));
  CHECK(fs::exists(out / "train_report.csv"));
  CHECK(fs::exists(out / "corpus.json"));

  const MetricsReport metrics = run_eval(config, trained.checkpoint_dir, log);
  CHECK(metrics.config_hash == config.hash());
  CHECK(metrics.model_type == "RDO");
  CHECK(metrics.validation_ids.size() == 2);
  CHECK(fs::exists(out / "metrics.json"));
  CHECK(fs::exists(out / "one_shot_scores.csv"));

  const StreamSummary stream = run_stream(config, trained.checkpoint_dir, std::nullopt, std::nullopt, log);
  CHECK(stream.delta == metrics.best_delta());

  const CompressionReport compressed = run_compress(config, trained.checkpoint_dir, std::nullopt, log);
  CHECK(compressed.lossless);
  CHECK(compressed.reconstruction_exact);
  CHECK(compressed.windows > 0);
}

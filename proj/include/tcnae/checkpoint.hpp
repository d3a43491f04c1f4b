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

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcnae/model.hpp"

namespace tcnae {

inline constexpr int kCheckpointFormatVersion = 1;

// Data-side context stored alongside the network.
struct CheckpointMeta {
  std::vector<std::string> feature_names;
  std::vector<double> feature_mean;
  std::vector<double> feature_std;
  std::vector<std::int32_t> latent_lo;  // observed training latent range
  std::vector<std::int32_t> latent_hi;
  std::string config_hash;
  nlohmann::json experiment;  // the producing experiment config, verbatim
};

struct LoadedCheckpoint {
  TcnAutoencoder model;
  CheckpointMeta meta;
};

nlohmann::json tcn_config_to_json(const TcnConfig& config);
// Rejects unknown keys; missing keys keep their defaults.
TcnConfig tcn_config_from_json(const nlohmann::json& j);

// Writes <dir>/model.bin (parameter blob) and <dir>/model.json (manifest).
// Layout is documented in docs/formats.md. Output is a pure function of the
// model and meta, so identical models give byte-identical files.
void save_checkpoint(const TcnAutoencoder& model, const CheckpointMeta& meta,
                     const std::filesystem::path& dir);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace tcnae

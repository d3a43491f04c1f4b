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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tcnae/tensor.hpp"

namespace tcnae {

// One multichannel recording. Values are channel-major: values[c * length + t].
struct LabeledSeries {
  std::string id;
  std::vector<std::string> feature_names;
  std::vector<std::string> timestamps;
  std::vector<double> values;
  std::vector<std::uint8_t> labels;  // empty when the source had no labels

  std::size_t channels() const { return feature_names.size(); }
  std::size_t length() const { return timestamps.size(); }
  bool labeled() const { return !labels.empty(); }
  double at(std::size_t c, std::size_t t) const { return values[c * length() + t]; }
  // Index of the first anomalous sample, or length() when there is none.
  std::size_t first_anomaly() const;
  bool has_anomaly() const { return first_anomaly() < length(); }
};

struct CsvOptions {
  char delimiter = ';';
  std::string timestamp_column = "datetime";
  std::string label_column = "anomaly";
  // Non-feature columns that are read past (e.g. secondary labels).
  std::vector<std::string> ignore_columns = {"changepoint"};
  bool require_labels = true;
};

// Feature columns are every header column that is not the timestamp, label or
// an ignored column, in header order. Throws ParseError("<file>:<line>: ...").
LabeledSeries load_series(const std::filesystem::path& path, const CsvOptions& options);
// Every *.csv file directly under `dir`, sorted by file name.
std::vector<LabeledSeries> load_directory(const std::filesystem::path& dir,
                                          const CsvOptions& options);
void write_series(const std::filesystem::path& path, const LabeledSeries& series,
                  const CsvOptions& options);

struct Normalization {
  static constexpr double kStdFloor = 1e-8;
  std::vector<double> mean;
  std::vector<double> stddev;  // floored
  std::vector<std::size_t> constant_channels;  // channels whose std hit the floor
};

// Per-channel population mean and standard deviation pooled over `sets`.
Normalization fit_normalization(std::span<const LabeledSeries> sets);
LabeledSeries normalize(const LabeledSeries& series, const Normalization& stats);

// [C, T] copy of series[:, offset : offset + T].
Tensor window_at(const LabeledSeries& series, std::size_t offset, std::size_t length);

struct WindowBatch {
  std::vector<Tensor> windows;
  // Traceability only; never fed to a model.
  std::vector<std::string> set_ids;
  std::vector<std::size_t> offsets;
};

// Windows at offsets 0, stride, 2*stride, ... that fit inside the first
// `limit` samples (the whole series by default):
// floor((limit - T) / stride) + 1 of them. ContractError when limit < T.
WindowBatch window(const LabeledSeries& series, std::size_t length, std::size_t stride,
                   std::size_t limit = static_cast<std::size_t>(-1));

std::size_t window_count(std::size_t n, std::size_t length, std::size_t stride);

// Seeded choice of `count` validation sets among those containing anomalies;
// indices are returned sorted. ContractError when too few are available.
std::vector<std::size_t> choose_validation_sets(std::span<const LabeledSeries> sets,
                                                std::size_t count, std::uint64_t seed);

struct CorpusOptions {
  std::size_t window_length = 200;
  std::size_t stride = 10;
  double anomaly_fraction = 0.0;  // p in [0, 0.25]
  std::uint64_t seed = 0;
};

struct CorpusSplit {
  std::vector<std::size_t> train_sets;       // indices into the input sets
  std::vector<std::size_t> validation_sets;
  double anomaly_fraction = 0.0;
  std::uint64_t seed = 0;
  std::size_t normal_windows = 0;
  std::size_t anomalous_windows = 0;
  // Unlabeled, shuffled training windows; `origin` and `anomalous_origin`
  // are bookkeeping for manifests and tests.
  WindowBatch corpus;
  std::vector<std::uint8_t> anomalous_origin;

  double achieved_fraction() const;
};

// Normal-prefix windows of every training set plus windows overlapping
// labelled anomalies, drawn without replacement until the pool is exhausted
// and with replacement after that, so that anomalous-origin windows make up
// `anomaly_fraction` of the corpus. `sets` must already be normalized.
CorpusSplit build_training_corpus(std::span<const LabeledSeries> sets,
                                  std::span<const std::size_t> train_sets,
                                  std::span<const std::size_t> validation_sets,
                                  const CorpusOptions& options);

enum class AnomalyKind { kLevelShift, kVarianceBurst, kFrequencyChange };

const char* anomaly_kind_name(AnomalyKind kind);
AnomalyKind parse_anomaly_kind(const std::string& name);  // ConfigError

struct SynthConfig {
  std::size_t channels = 8;
  std::size_t length = 1200;
  std::size_t sets = 12;
  // Sets without any anomaly, placed first.
  std::size_t clean_sets = 1;
  std::size_t sources = 3;
  double min_period = 16.0;
  double max_period = 60.0;
  double noise = 0.1;
  // Fraction of each anomalous set covered by its anomaly interval.
  double anomaly_rate = 0.1;
  // Position of the anomaly onset as a fraction of the series length.
  double onset_min = 0.5;
  double onset_max = 0.7;
  // Fraction of channels an anomaly touches (at least one).
  double affected_channels = 0.5;
  double level_shift = 5.0;         // in units of the channel's clean std
  double burst_std = 1.5;           // in units of the channel's clean std
  double frequency_factor = 1.8;
  std::vector<AnomalyKind> kinds = {AnomalyKind::kLevelShift, AnomalyKind::kVarianceBurst,
                                    AnomalyKind::kFrequencyChange};

  void validate() const;  // ConfigError
};

struct SynthSet {
  LabeledSeries series;
  std::vector<double> clean;  // noise-free, anomaly-free signal, same layout
  AnomalyKind kind = AnomalyKind::kLevelShift;
  std::vector<std::size_t> affected;
};

// Quasi-periodic correlated channels: shared sinusoidal sources mixed per
// channel plus Gaussian noise, with one labelled anomaly interval per
// anomalous set. Fully determined by (config, seed).
std::vector<SynthSet> synth_corpus(const SynthConfig& config, std::uint64_t seed);

}  // namespace tcnae

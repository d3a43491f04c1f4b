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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tcnae/data.hpp"
#include "tcnae/detection.hpp"
#include "tcnae/entropy_coding.hpp"
#include "tcnae/model.hpp"

namespace tcnae {

// Maps a [C, T] window to its reconstruction.
using Reconstructor = std::function<Tensor(const Tensor&)>;

// Inference reconstruction of `model` (rounded latent when the bottleneck is
// enabled). The model must outlive the returned callable.
Reconstructor model_reconstructor(const TcnAutoencoder& model);

struct ScoringOptions {
  std::size_t window_length = 200;
  std::size_t subset = kSubsetSize;
};

// 1-shot scores for a whole series: windows tile the series at stride T and,
// when N is not a multiple of T, one more window aligned to the end covers the
// remainder. Each time step takes the subset mean of the window that scored it.
struct SeriesScores {
  std::string id;
  std::vector<double> mae;
  std::vector<double> score;
  std::vector<std::uint8_t> labels;
};

SeriesScores one_shot_scores(const LabeledSeries& series, const Reconstructor& reconstruct,
                             std::span<const double> omega, const ScoringOptions& options);

std::vector<std::uint8_t> threshold(std::span<const double> score, double delta);

// lo, lo + step, ..., hi (inclusive, up to rounding).
std::vector<double> delta_grid(double lo = 0.2, double hi = 3.0, double step = 0.05);

struct DeltaPoint {
  double delta = 0.0;
  DetectionCounts counts;  // pooled over every series
  double f1 = 0.0;
};

struct DeltaSweep {
  std::vector<DeltaPoint> points;
  std::size_t best = 0;  // first index attaining the maximum F1
  std::vector<DetectionCounts> per_series_at_best;

  const DeltaPoint& best_point() const { return points.at(best); }
};

// Every series must be labelled with at least one anomaly in total, else
// DegenerateMetricError.
DeltaSweep sweep_delta(std::span<const SeriesScores> scores, std::span<const double> grid);

struct StreamOptions {
  std::size_t window_length = 200;
  std::size_t subset = kSubsetSize;
  double delta = kDefaultDelta;
  double confidence_limit = kDefaultConfidenceLimit;
};

// Stride-1 multi-shot detection. mae[t] comes from the newest window ending at
// t (the first window for t < T - 1).
struct StreamResult {
  std::string id;
  std::vector<double> mae;
  std::vector<double> cs;
  std::vector<std::uint8_t> zeta;
  std::vector<std::uint8_t> labels;
};

StreamResult stream_series(const LabeledSeries& series, const Reconstructor& reconstruct,
                           std::span<const double> omega, const StreamOptions& options);

struct CompressionReport {
  std::size_t windows = 0;
  std::size_t symbols = 0;
  std::size_t escapes = 0;
  std::size_t bytes = 0;              // every bitstream, headers included
  double estimated_bits = 0.0;        // density rate of the rounded latents
  double table_bits = 0.0;            // ideal code length under the tables
  bool lossless = true;               // decompress(compress(z)) == z everywhere
  bool reconstruction_exact = true;   // decode(decompressed) == forward_eval bit for bit
  std::vector<Bitstream> streams;     // one per window
};

// Requires a bottleneck model carrying entropy tables.
CompressionReport compress_windows(const TcnAutoencoder& model, std::span<const Tensor> windows);

}  // namespace tcnae

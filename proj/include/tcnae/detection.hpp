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
#include <span>
#include <vector>

#include "tcnae/tensor.hpp"

namespace tcnae {

inline constexpr std::size_t kSubsetSize = 10;
inline constexpr double kDefaultDelta = 1.0;
inline constexpr double kDefaultConfidenceLimit = 0.85;

// ae[c, t] = omega[c] * |x[c, t] - x_hat[c, t]|; returns [C, T].
Tensor scaled_abs_error(const Tensor& x, const Tensor& x_hat, std::span<const double> omega);

// Column-wise maximum over channels of a [C, T] error array.
std::vector<double> max_abs_error(const Tensor& ae);

// Means of consecutive, disjoint runs of `subset` samples:
// M[k] = mean(mae[subset*k .. subset*(k+1))).
std::vector<double> subset_means(std::span<const double> mae,
                                 std::size_t subset = kSubsetSize);

// d[k] = 1 iff M[k] > delta.
std::vector<std::uint8_t> one_shot(std::span<const double> means, double delta);

// Per-time votes: vote[t] = d[t / subset].
std::vector<std::uint8_t> expand_votes(std::span<const std::uint8_t> d,
                                       std::size_t subset = kSubsetSize);

// Accumulates per-time votes from windows that advance one sample at a time.
//
// The window pushed k-th (0-based) starts at time k and covers
// k .. k + length - 1. Pushing it completes time k, which by then holds the
// votes of every window covering it, min(k + 1, length) of them, and its
// confidence CS = (sum of votes) / (number of votes) is returned. flush()
// completes the trailing length - 1 times covered only by the final windows,
// each normalized by its own vote count.
class ConfidenceStream {
 public:
  explicit ConfidenceStream(std::size_t window_length);

  std::size_t window_length() const { return length_; }
  // Windows pushed so far == number of completed times before flush().
  std::size_t pushed() const { return pushed_; }

  // votes.size() must equal window_length.
  double push(std::span<const std::uint8_t> votes);
  // Confidence for the remaining times in order. The stream accepts no
  // pushes afterwards.
  std::vector<double> flush();
  // Votes accumulated so far for absolute time t (not yet completed).
  std::size_t votes_at(std::size_t t) const;

 private:
  std::size_t length_;
  std::size_t pushed_ = 0;
  bool flushed_ = false;
  std::vector<std::uint32_t> sum_;    // ring over times pushed_ .. pushed_ + length - 1
  std::vector<std::uint32_t> count_;
};

// zeta[t] = 1 iff cs[t] > limit.
std::vector<std::uint8_t> multi_shot(std::span<const double> cs, double limit);

struct DetectionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  DetectionCounts& operator+=(const DetectionCounts& o);
  // 2TP / (2TP + FP + FN); DegenerateMetricError when the denominator is 0.
  double f1() const;
};

DetectionCounts count_detections(std::span<const std::uint8_t> predictions,
                                 std::span<const std::uint8_t> labels);

struct F1Result {
  double f1 = 0.0;
  DetectionCounts counts;
};

F1Result f1_score(std::span<const std::uint8_t> predictions,
                  std::span<const std::uint8_t> labels);

}  // namespace tcnae

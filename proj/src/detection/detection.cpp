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

#include "tcnae/detection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcnae/errors.hpp"

namespace tcnae {

Tensor scaled_abs_error(const Tensor& x, const Tensor& x_hat, std::span<const double> omega) {
  if (x.rank() != 2 || x.shape() != x_hat.shape() || omega.size() != x.dim(0)) {
    throw DimensionError("scaled_abs_error: x " + shape_string(x.shape()) + ", x_hat " +
                         shape_string(x_hat.shape()) + ", omega [" +
                         std::to_string(omega.size()) + "]");
  }
  const std::size_t channels = x.dim(0), len = x.dim(1);
  std::vector<double> out(channels * len);
  const auto a = x.data(), b = x_hat.data();
  for (std::size_t c = 0; c < channels; ++c) {
    if (!(omega[c] > 0.0)) throw DomainError("scaled_abs_error: omega must be positive");
    for (std::size_t t = 0; t < len; ++t) {
      out[c * len + t] = omega[c] * std::fabs(a[c * len + t] - b[c * len + t]);
    }
  }
  return Tensor({channels, len}, std::move(out));
}

std::vector<double> max_abs_error(const Tensor& ae) {
  if (ae.rank() != 2) throw DimensionError("max_abs_error expects [C, T]");
  const std::size_t channels = ae.dim(0), len = ae.dim(1);
  if (channels == 0) throw DomainError("max_abs_error: empty channel axis");
  const auto d = ae.data();
  std::vector<double> out(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(len));
  for (std::size_t c = 1; c < channels; ++c) {
    for (std::size_t t = 0; t < len; ++t) out[t] = std::max(out[t], d[c * len + t]);
  }
  return out;
}

std::vector<double> subset_means(std::span<const double> mae, std::size_t subset) {
  if (subset == 0 || mae.empty() || mae.size() % subset != 0) {
    throw ContractError("subset_means: length " + std::to_string(mae.size()) +
                        " is not a positive multiple of " + std::to_string(subset));
  }
  std::vector<double> out(mae.size() / subset);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < subset; ++j) s += mae[k * subset + j];
    out[k] = s / static_cast<double>(subset);
  }
  return out;
}

std::vector<std::uint8_t> one_shot(std::span<const double> means, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("one_shot: delta must be positive");
  std::vector<std::uint8_t> d(means.size());
  for (std::size_t k = 0; k < means.size(); ++k) d[k] = means[k] > delta ? 1 : 0;
  return d;
}

std::vector<std::uint8_t> expand_votes(std::span<const std::uint8_t> d, std::size_t subset) {
  std::vector<std::uint8_t> out(d.size() * subset);
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = d[t / subset];
  return out;
}

ConfidenceStream::ConfidenceStream(std::size_t window_length)
    : length_(window_length), sum_(window_length, 0), count_(window_length, 0) {
  if (window_length == 0) throw ContractError("ConfidenceStream: window length must be positive");
}

double ConfidenceStream::push(std::span<const std::uint8_t> votes) {
  if (flushed_) throw ContractError("ConfidenceStream: push after flush");
  if (votes.size() != length_) {
    throw DimensionError("ConfidenceStream: expected " + std::to_string(length_) +
                         " votes, got " + std::to_string(votes.size()));
  }
  for (std::size_t j = 0; j < length_; ++j) {
    const std::size_t slot = (pushed_ + j) % length_;
    sum_[slot] += votes[j] ? 1 : 0;
    count_[slot] += 1;
  }
  const std::size_t slot = pushed_ % length_;
  const double cs = static_cast<double>(sum_[slot]) / static_cast<double>(count_[slot]);
  sum_[slot] = 0;
  count_[slot] = 0;
  ++pushed_;
  return cs;
}

std::vector<double> ConfidenceStream::flush() {
  if (flushed_) throw ContractError("ConfidenceStream: flushed twice");
  flushed_ = true;
  std::vector<double> out;
  if (pushed_ == 0) return out;
  for (std::size_t j = 0; j + 1 < length_; ++j) {
    const std::size_t slot = (pushed_ + j) % length_;
    out.push_back(static_cast<double>(sum_[slot]) / static_cast<double>(count_[slot]));
    sum_[slot] = 0;
    count_[slot] = 0;
  }
  return out;
}

std::size_t ConfidenceStream::votes_at(std::size_t t) const {
  if (t < pushed_ || t >= pushed_ + length_) return 0;
  return count_[t % length_];
}

std::vector<std::uint8_t> multi_shot(std::span<const double> cs, double limit) {
  if (!(limit > 0.0 && limit <= 1.0)) throw DomainError("multi_shot: limit must lie in (0, 1]");
  std::vector<std::uint8_t> z(cs.size());
  for (std::size_t t = 0; t < cs.size(); ++t) z[t] = cs[t] > limit ? 1 : 0;
  return z;
}

DetectionCounts& DetectionCounts::operator+=(const DetectionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

double DetectionCounts::f1() const {
  const std::size_t denom = 2 * tp + fp + fn;
  if (denom == 0) {
    throw DegenerateMetricError("F1 undefined: no positive labels and no positive predictions");
  }
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

DetectionCounts count_detections(std::span<const std::uint8_t> predictions,
                                 std::span<const std::uint8_t> labels) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("predictions and labels differ in length");
  }
  DetectionCounts c;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const bool p = predictions[t] != 0, l = labels[t] != 0;
    if (p && l) ++c.tp;
    else if (p) ++c.fp;
    else if (l) ++c.fn;
    else ++c.tn;
  }
  return c;
}

F1Result f1_score(std::span<const std::uint8_t> predictions,
                  std::span<const std::uint8_t> labels) {
  F1Result r;
  r.counts = count_detections(predictions, labels);
  r.f1 = r.counts.f1();
  return r;
}

}  // namespace tcnae

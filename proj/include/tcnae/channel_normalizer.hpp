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
#include <span>
#include <vector>

namespace tcnae {

// Per-channel residual scale learned during training and frozen for
// inference: omega_c = 1 / max(sigma_c, floor), with sigma_c an exponential
// moving average of the per-channel residual standard deviation.
struct ChannelNormalizer {
  static constexpr double kSigmaFloor = 1e-6;

  std::vector<double> omega;
  std::vector<double> sigma;
  double decay = 0.99;
  bool initialized = false;  // first update seeds sigma directly

  ChannelNormalizer() = default;
  explicit ChannelNormalizer(std::size_t channels, double decay = 0.99);

  std::size_t channels() const { return omega.size(); }

  // residual_std: per-channel standard deviation of x - x_hat over a batch.
  void update(std::span<const double> residual_std);
};

}  // namespace tcnae

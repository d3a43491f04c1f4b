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

#include "tcnae/channel_normalizer.hpp"

#include <algorithm>
#include <cmath>

#include "tcnae/errors.hpp"

namespace tcnae {

ChannelNormalizer::ChannelNormalizer(std::size_t channels, double decay_rate)
    : omega(channels, 1.0), sigma(channels, 1.0), decay(decay_rate) {
  if (!(decay >= 0.0 && decay < 1.0)) {
    throw ContractError("normalizer decay must be in [0, 1)");
  }
}

void ChannelNormalizer::update(std::span<const double> residual_std) {
  if (residual_std.size() != omega.size()) {
    throw DimensionError("normalizer: expected " + std::to_string(omega.size()) +
                         " channel deviations, got " +
                         std::to_string(residual_std.size()));
  }
  for (std::size_t c = 0; c < omega.size(); ++c) {
    const double s = residual_std[c];
    if (!std::isfinite(s) || s < 0.0) continue;
    sigma[c] = initialized ? decay * sigma[c] + (1.0 - decay) * s : s;
    omega[c] = 1.0 / std::max(sigma[c], kSigmaFloor);
  }
  initialized = true;
}

}  // namespace tcnae

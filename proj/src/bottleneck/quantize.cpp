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

#include "tcnae/quantize.hpp"

#include <cmath>

#include "tcnae/errors.hpp"
#include "tcnae/ops.hpp"

namespace tcnae {

Tensor quantize(const Tensor& y, QuantizerMode mode, Rng* rng) {
  const auto yd = y.data();
  if (mode == QuantizerMode::kRound) {
    std::vector<double> out(yd.size());
    for (std::size_t i = 0; i < yd.size(); ++i) out[i] = std::round(yd[i]);
    return Tensor(y.shape(), std::move(out));
  }
  if (rng == nullptr) throw ContractError("noise quantization requires an rng");
  std::vector<double> noise(yd.size());
  for (double& u : noise) u = rng->uniform() - 0.5;
  return add(y, Tensor(y.shape(), std::move(noise)));
}

}  // namespace tcnae

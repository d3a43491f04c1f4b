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

#include "tcnae/rng.hpp"
#include "tcnae/tensor.hpp"

namespace tcnae {

enum class QuantizerMode {
  kNoise,  // z = y + u, u ~ U(-1/2, 1/2); dz/dy = identity
  kRound,  // z = round half away from zero; no gradient
};

// `rng` is consumed only in kNoise mode and may be null for kRound.
Tensor quantize(const Tensor& y, QuantizerMode mode, Rng* rng);

}  // namespace tcnae

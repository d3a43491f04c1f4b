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
#include <vector>

#include "tcnae/rng.hpp"
#include "tcnae/tensor.hpp"

namespace tcnae {

struct DensityOptions {
  // Widths of the hidden monotone layers; the full stack is 1 -> hidden -> 1.
  std::vector<std::size_t> hidden = {3, 3, 3};
  // Width of the initial density (the cumulative reaches ~0.88 at u = 2*scale).
  double init_scale = 10.0;
  // Lower bound on every per-element likelihood.
  double likelihood_floor = 1e-9;
};

// Independent per-dimension univariate density defined through a learned
// monotone cumulative. For latent dimension i,
//
//   logit_i(u) = f_K( ... f_1(u) ... ),   f_k(h) = g_k(H_k h + b_k),
//   g_k(h) = h + a_k * tanh(h)   (all but the last layer),
//   cumulative_i(u) = sigmoid(logit_i(u)),
//
// with H_k = softplus(raw matrix) > 0 and a_k = tanh(raw factor) in (-1, 1),
// so each layer is strictly increasing and the cumulative is monotone.
class FactorizedDensity {
 public:
  FactorizedDensity() = default;
  FactorizedDensity(std::size_t dims, DensityOptions options, Rng& rng);

  std::size_t dims() const { return dims_; }
  const DensityOptions& options() const { return options_; }

  // u: [dims, B] -> logits [dims, B]. Differentiable in u and parameters.
  Tensor logits(const Tensor& u) const;
  Tensor cumulative(const Tensor& u) const;

  // Graph-free evaluation for one dimension.
  double logit(double u, std::size_t dim) const;
  double cumulative(double u, std::size_t dim) const;

  // z: [dims] or [dims, B]. P(z) = cumulative(z + 1/2) - cumulative(z - 1/2),
  // evaluated in the tail-stable form and floored at likelihood_floor.
  Tensor likelihood(const Tensor& z) const;

  // Sum over elements of -log2 likelihood(z); a scalar tensor.
  Tensor rate_bits(const Tensor& z) const;

  // Unfloored probability mass of integer v in one dimension.
  double pmf(std::int64_t v, std::size_t dim) const;

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }

 private:
  std::size_t layer_count() const { return options_.hidden.size() + 1; }
  const Tensor& matrix(std::size_t k) const { return params_[k].tensor; }
  const Tensor& bias(std::size_t k) const { return params_[layer_count() + k].tensor; }
  const Tensor& factor(std::size_t k) const {
    return params_[2 * layer_count() + k].tensor;
  }

  std::size_t dims_ = 0;
  DensityOptions options_;
  std::vector<std::size_t> widths_;  // 1, hidden..., 1
  // Ordered: matrices, biases, factors.
  std::vector<Parameter> params_;
};

}  // namespace tcnae

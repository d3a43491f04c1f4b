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

#include "tcnae/tensor.hpp"

// Differentiable operations over Tensor. Every op validates shapes and throws
// DimensionError on mismatch.
namespace tcnae {

// x: [C_in, T], weight: [C_out, C_in, K], bias: [C_out] -> [C_out, T].
// out[c, t] = bias[c] + sum_{i,k} weight[c, i, k] * x[i, t - (K-1-k)*dilation],
// with x treated as zero before t = 0. Output t depends only on inputs <= t.
Tensor causal_conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
                     std::size_t dilation);

// x: [C_in, T], weight: [C_in, C_out, K], bias: [C_out] -> [C_out, T].
// The exact adjoint of causal_conv1d for the same weight array and dilation:
// out[o, t] = bias[o] + sum_{i,k} weight[i, o, k] * x[i, t + (K-1-k)*dilation],
// with x treated as zero past the end of the window.
Tensor causal_transposed_conv1d(const Tensor& x, const Tensor& weight,
                                const Tensor& bias, std::size_t dilation);

// x: [N], weight: [M, N], bias: [M] -> [M].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

// a: [G, M, N], x: [G, N, B] -> [G, M, B]; one independent matmul per group.
Tensor batched_matmul(const Tensor& a, const Tensor& x);

Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);  // DomainError on non-positive input
Tensor square(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);
// Elementwise lower clamp; gradient flows only where x >= floor.
Tensor clamp_min(const Tensor& x, double floor);

// b's shape must be a leading prefix of x's shape; b is repeated across the
// trailing axes.
Tensor add_broadcast(const Tensor& x, const Tensor& b);
Tensor mul_broadcast(const Tensor& x, const Tensor& b);

Tensor reshape(const Tensor& x, Shape shape);

// Full reductions to a scalar. DomainError on empty input.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Reductions over one axis; the axis is removed from the result shape.
Tensor sum(const Tensor& x, std::size_t axis);
Tensor mean(const Tensor& x, std::size_t axis);
Tensor max(const Tensor& x, std::size_t axis);

// Mean squared error over all elements.
Tensor mse(const Tensor& a, const Tensor& b);

}  // namespace tcnae

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

#include "tcnae/density.hpp"

#include <cmath>
#include <numbers>

#include "tcnae/errors.hpp"
#include "tcnae/ops.hpp"

namespace tcnae {
namespace {

double softplus_scalar(double v) {
  return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}

double sigmoid_scalar(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

FactorizedDensity::FactorizedDensity(std::size_t dims, DensityOptions options,
                                     Rng& rng)
    : dims_(dims), options_(std::move(options)) {
  if (dims_ == 0) throw ContractError("density needs at least one dimension");
  if (!(options_.likelihood_floor > 0.0) || !(options_.init_scale > 0.0)) {
    throw ContractError("density floor and init scale must be positive");
  }
  widths_.push_back(1);
  for (std::size_t h : options_.hidden) {
    if (h == 0) throw ContractError("density hidden width must be positive");
    widths_.push_back(h);
  }
  widths_.push_back(1);

  const std::size_t layers = layer_count();
  const double scale =
      std::pow(options_.init_scale, 1.0 / static_cast<double>(layers));

  for (std::size_t k = 0; k < layers; ++k) {
    const std::size_t rows = widths_[k + 1], cols = widths_[k];
    const double init =
        std::log(std::expm1(1.0 / scale / static_cast<double>(rows)));
    params_.push_back({"density.matrix" + std::to_string(k),
                       Tensor::full({dims_, rows, cols}, init, true)});
  }
  // Hidden biases are zero-mean within each (dimension, layer) so that the
  // initial stack, which is linear, maps 0 to 0 and cumulative(0) == 1/2.
  for (std::size_t k = 0; k < layers; ++k) {
    const std::size_t rows = widths_[k + 1];
    Tensor b = Tensor::zeros({dims_, rows}, true);
    if (k + 1 < layers) {
      auto bd = b.mutable_data();
      for (std::size_t d = 0; d < dims_; ++d) {
        double mean = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
          bd[d * rows + r] = rng.uniform(-0.5, 0.5);
          mean += bd[d * rows + r];
        }
        mean /= static_cast<double>(rows);
        for (std::size_t r = 0; r < rows; ++r) bd[d * rows + r] -= mean;
      }
    }
    params_.push_back({"density.bias" + std::to_string(k), std::move(b)});
  }
  for (std::size_t k = 0; k + 1 < layers; ++k) {
    params_.push_back({"density.factor" + std::to_string(k),
                       Tensor::zeros({dims_, widths_[k + 1]}, true)});
  }
}

Tensor FactorizedDensity::logits(const Tensor& u) const {
  if (u.rank() != 2 || u.dim(0) != dims_) {
    throw DimensionError("density input must be [" + std::to_string(dims_) +
                         ", B], got " + shape_string(u.shape()));
  }
  const std::size_t cols = u.dim(1);
  Tensor h = reshape(u, {dims_, 1, cols});
  const std::size_t layers = layer_count();
  for (std::size_t k = 0; k < layers; ++k) {
    h = batched_matmul(softplus(matrix(k)), h);
    h = add_broadcast(h, bias(k));
    if (k + 1 < layers) {
      h = add(h, mul_broadcast(tcnae::tanh(h), tcnae::tanh(factor(k))));
    }
  }
  return reshape(h, {dims_, cols});
}

Tensor FactorizedDensity::cumulative(const Tensor& u) const {
  return sigmoid(logits(u));
}

double FactorizedDensity::logit(double u, std::size_t dim) const {
  if (dim >= dims_) throw DimensionError("density dimension out of range");
  std::vector<double> h{u}, next;
  const std::size_t layers = layer_count();
  for (std::size_t k = 0; k < layers; ++k) {
    const std::size_t rows = widths_[k + 1], cols = widths_[k];
    const auto m = matrix(k).data().subspan(dim * rows * cols, rows * cols);
    const auto b = bias(k).data().subspan(dim * rows, rows);
    next.assign(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < cols; ++c) s += softplus_scalar(m[r * cols + c]) * h[c];
      s += b[r];
      if (k + 1 < layers) {
        s += std::tanh(factor(k).data()[dim * rows + r]) * std::tanh(s);
      }
      next[r] = s;
    }
    h.swap(next);
  }
  return h[0];
}

double FactorizedDensity::cumulative(double u, std::size_t dim) const {
  return sigmoid_scalar(logit(u, dim));
}

double FactorizedDensity::pmf(std::int64_t v, std::size_t dim) const {
  const double lo = logit(static_cast<double>(v) - 0.5, dim);
  const double hi = logit(static_cast<double>(v) + 0.5, dim);
  const double s = (lo + hi > 0.0) ? -1.0 : 1.0;
  return std::fabs(sigmoid_scalar(s * hi) - sigmoid_scalar(s * lo));
}

Tensor FactorizedDensity::likelihood(const Tensor& z) const {
  Tensor zz = z;
  if (z.rank() == 1) {
    zz = reshape(z, {z.dim(0), 1});
  } else if (z.rank() != 2) {
    throw DimensionError("likelihood expects [dims] or [dims, B], got " +
                         shape_string(z.shape()));
  }
  const Tensor lower = logits(add_scalar(zz, -0.5));
  const Tensor upper = logits(add_scalar(zz, 0.5));
  // Evaluate the difference on the side of the sigmoid where it does not
  // cancel: reflect both logits when their midpoint is positive.
  std::vector<double> sign(lower.numel());
  const auto lo = lower.data(), up = upper.data();
  for (std::size_t i = 0; i < sign.size(); ++i) {
    sign[i] = (lo[i] + up[i] > 0.0) ? -1.0 : 1.0;
  }
  const Tensor s(lower.shape(), std::move(sign));
  Tensor lik = tcnae::abs(sub(sigmoid(mul(upper, s)), sigmoid(mul(lower, s))));
  lik = clamp_min(lik, options_.likelihood_floor);
  return z.rank() == 1 ? reshape(lik, z.shape()) : lik;
}

Tensor FactorizedDensity::rate_bits(const Tensor& z) const {
  return scale(sum(tcnae::log(likelihood(z))), -1.0 / std::numbers::ln2);
}

}  // namespace tcnae

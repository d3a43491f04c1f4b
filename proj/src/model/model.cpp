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

#include "tcnae/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcnae/errors.hpp"
#include "tcnae/ops.hpp"

namespace tcnae {
namespace {

// Kaiming-uniform: U(-b, b) with b = gain * sqrt(3 / fan_in).
void kaiming_uniform(Tensor& t, std::size_t fan_in, double gain, Rng& rng) {
  const double bound = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
  for (double& v : t.mutable_data()) v = rng.uniform(-bound, bound);
}

constexpr double kReluGain = 1.4142135623730951;
constexpr double kLinearGain = 1.0;
// Each block sums two branches; scaling both keeps activation variance flat
// across depth at initialization.
constexpr double kBranchScale = 0.7071067811865476;

}  // namespace

void TcnConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ContractError("TcnConfig: " + msg); };
  if (input_channels == 0) fail("input_channels must be positive");
  if (window_length == 0) fail("window_length must be positive");
  if (blocks == 0 || blocks > 30) fail("blocks must be in [1, 30]");
  if (layers_per_block == 0) fail("layers_per_block must be positive");
  if (channel_width == 0) fail("channel_width must be positive");
  if (kernel_width == 0) fail("kernel_width must be positive");
  if (latent_dim == 0) fail("latent_dim must be positive");
  if (latent_dim >= input_channels * window_length) {
    fail("latent_dim must be smaller than channels * window_length");
  }
  if (!dilations.empty()) {
    if (dilations.size() != blocks) fail("dilation schedule length must equal blocks");
    for (std::size_t l = 0; l < blocks; ++l) {
      if (dilations[l] != dilation(l)) {
        fail("dilation of block " + std::to_string(l) + " must be " +
             std::to_string(dilation(l)) + ", got " + std::to_string(dilations[l]));
      }
    }
  }
}

std::size_t TcnConfig::receptive_field() const {
  std::size_t rf = 1;
  for (std::size_t l = 0; l < blocks; ++l) {
    rf += layers_per_block * (kernel_width - 1) * dilation(l);
  }
  return rf;
}

TcnAutoencoder::TcnAutoencoder(TcnConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.validate();
  Rng rng(seed);
  build(rng);
}

TcnAutoencoder::Conv TcnAutoencoder::add_conv(const std::string& name,
                                              Shape weight_shape,
                                              std::size_t bias_len,
                                              std::size_t fan_in, double gain,
                                              std::size_t dilation, Rng& rng) {
  Conv c;
  c.weight = Tensor::zeros(std::move(weight_shape), true);
  kaiming_uniform(c.weight, fan_in, gain, rng);
  c.bias = Tensor::zeros({bias_len}, true);
  c.dilation = dilation;
  params_.push_back({name + ".weight", c.weight});
  params_.push_back({name + ".bias", c.bias});
  return c;
}

void TcnAutoencoder::build(Rng& rng) {
  const std::size_t c_in = config_.input_channels;
  const std::size_t width = config_.channel_width;
  const std::size_t k = config_.kernel_width;
  const std::size_t len = config_.window_length;
  const std::size_t nb = config_.blocks;
  const std::size_t nl = config_.layers_per_block;

  for (std::size_t l = 0; l < nb; ++l) {
    const std::string prefix = "encoder.block" + std::to_string(l);
    const std::size_t block_in = l == 0 ? c_in : width;
    Block b;
    for (std::size_t j = 0; j < nl; ++j) {
      const std::size_t in = j == 0 ? block_in : width;
      const double gain = j + 1 == nl ? kReluGain * kBranchScale : kReluGain;
      b.layers.push_back(add_conv(prefix + ".conv" + std::to_string(j),
                                  {width, in, k}, width, in * k, gain,
                                  config_.dilation(l), rng));
    }
    b.residual = add_conv(prefix + ".residual", {width, block_in, 1}, width,
                          block_in, kLinearGain * kBranchScale, 1, rng);
    encoder_.push_back(std::move(b));
  }

  const std::size_t flat = width * len;
  enc_latent_w_ = Tensor::zeros({config_.latent_dim, flat}, true);
  kaiming_uniform(enc_latent_w_, flat, kLinearGain, rng);
  enc_latent_b_ = Tensor::zeros({config_.latent_dim}, true);
  params_.push_back({"encoder.latent.weight", enc_latent_w_});
  params_.push_back({"encoder.latent.bias", enc_latent_b_});

  dec_latent_w_ = Tensor::zeros({flat, config_.latent_dim}, true);
  kaiming_uniform(dec_latent_w_, config_.latent_dim, kLinearGain, rng);
  dec_latent_b_ = Tensor::zeros({flat}, true);
  params_.push_back({"decoder.latent.weight", dec_latent_w_});
  params_.push_back({"decoder.latent.bias", dec_latent_b_});

  // Decoder block j mirrors encoder block nb-1-j.
  for (std::size_t j = 0; j < nb; ++j) {
    const std::size_t mirror = nb - 1 - j;
    const std::string prefix = "decoder.block" + std::to_string(j);
    const std::size_t block_out = mirror == 0 ? c_in : width;
    const bool last_block = j + 1 == nb;
    Block b;
    for (std::size_t i = 0; i < nl; ++i) {
      const std::size_t out = i + 1 == nl ? block_out : width;
      const bool activated = !(last_block && i + 1 == nl);
      double gain = activated ? kReluGain : kLinearGain;
      if (i + 1 == nl) gain *= kBranchScale;
      b.layers.push_back(add_conv(prefix + ".tconv" + std::to_string(i),
                                  {width, out, k}, out, width * k, gain,
                                  config_.dilation(mirror), rng));
    }
    b.residual = add_conv(prefix + ".residual", {width, block_out, 1}, block_out,
                          width, kLinearGain * kBranchScale, 1, rng);
    decoder_.push_back(std::move(b));
  }

  network_param_count_ = params_.size();
  density_ = FactorizedDensity(config_.latent_dim, config_.density, rng);
  for (const Parameter& p : density_.parameters()) params_.push_back(p);
  normalizer_ = ChannelNormalizer(c_in);
}

TcnAutoencoder TcnAutoencoder::clone() const {
  TcnAutoencoder copy(config_, 0);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto src = params_[i].tensor.data();
    auto dst = copy.params_[i].tensor.mutable_data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
  copy.normalizer_ = normalizer_;
  copy.tables_ = tables_;
  return copy;
}

Tensor TcnAutoencoder::run_encoder_stack(const Tensor& x,
                                         std::vector<Tensor>* trace) const {
  if (x.rank() != 2 || x.dim(0) != config_.input_channels ||
      x.dim(1) != config_.window_length) {
    throw DimensionError("encoder input must be [" +
                         std::to_string(config_.input_channels) + "x" +
                         std::to_string(config_.window_length) + "], got " +
                         shape_string(x.shape()));
  }
  Tensor h = x;
  for (const Block& b : encoder_) {
    Tensor inner = h;
    for (const Conv& c : b.layers) {
      inner = relu(causal_conv1d(inner, c.weight, c.bias, c.dilation));
      if (trace) trace->push_back(inner);
    }
    h = add(inner, causal_conv1d(h, b.residual.weight, b.residual.bias, 1));
    if (trace) trace->push_back(h);
  }
  return h;
}

Tensor TcnAutoencoder::encode(const Tensor& x) const {
  const Tensor features = run_encoder_stack(x, nullptr);
  return linear(reshape(features, {features.numel()}), enc_latent_w_, enc_latent_b_);
}

std::vector<Tensor> TcnAutoencoder::encoder_activations(const Tensor& x) const {
  std::vector<Tensor> trace;
  run_encoder_stack(x, &trace);
  return trace;
}

Tensor TcnAutoencoder::decode(const Tensor& z) const {
  if (z.rank() != 1 || z.dim(0) != config_.latent_dim) {
    throw DimensionError("decoder input must be [" + std::to_string(config_.latent_dim) +
                         "], got " + shape_string(z.shape()));
  }
  Tensor h = reshape(linear(z, dec_latent_w_, dec_latent_b_),
                     {config_.channel_width, config_.window_length});
  for (std::size_t j = 0; j < decoder_.size(); ++j) {
    const Block& b = decoder_[j];
    const bool last_block = j + 1 == decoder_.size();
    Tensor inner = h;
    for (std::size_t i = 0; i < b.layers.size(); ++i) {
      const Conv& c = b.layers[i];
      inner = causal_transposed_conv1d(inner, c.weight, c.bias, c.dilation);
      if (!(last_block && i + 1 == b.layers.size())) inner = relu(inner);
    }
    h = add(inner, causal_transposed_conv1d(h, b.residual.weight, b.residual.bias, 1));
  }
  return h;
}

TrainForward TcnAutoencoder::forward_train(const Tensor& x, Rng& rng) const {
  if (!config_.bottleneck_enabled) {
    throw ContractError("forward_train requires the entropy bottleneck");
  }
  TrainForward out;
  out.y = encode(x);
  out.z = quantize(out.y, QuantizerMode::kNoise, &rng);
  out.x_hat = decode(out.z);
  out.x_tilde = decode(out.y);
  out.rate = density_.rate_bits(out.z);
  return out;
}

Tensor TcnAutoencoder::latent_eval(const Tensor& x) const {
  NoGradGuard guard;
  const Tensor y = encode(x);
  return config_.bottleneck_enabled ? quantize(y, QuantizerMode::kRound, nullptr) : y;
}

Tensor TcnAutoencoder::forward_eval(const Tensor& x) const {
  NoGradGuard guard;
  return decode(latent_eval(x));
}

std::vector<Parameter> TcnAutoencoder::trainable_parameters() const {
  if (config_.bottleneck_enabled) return params_;
  return {params_.begin(), params_.begin() + static_cast<std::ptrdiff_t>(network_param_count_)};
}

std::size_t TcnAutoencoder::encoder_conv_weight_count() const {
  std::size_t n = 0;
  for (const Block& b : encoder_) {
    for (const Conv& c : b.layers) n += c.weight.numel();
    n += b.residual.weight.numel();
  }
  return n;
}

std::size_t TcnAutoencoder::decoder_conv_weight_count() const {
  std::size_t n = 0;
  for (const Block& b : decoder_) {
    for (const Conv& c : b.layers) n += c.weight.numel();
    n += b.residual.weight.numel();
  }
  return n;
}

}  // namespace tcnae

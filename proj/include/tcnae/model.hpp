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
#include <optional>
#include <vector>

#include "tcnae/channel_normalizer.hpp"
#include "tcnae/density.hpp"
#include "tcnae/entropy_coding.hpp"
#include "tcnae/quantize.hpp"
#include "tcnae/rng.hpp"
#include "tcnae/tensor.hpp"

namespace tcnae {

struct TcnConfig {
  std::size_t input_channels = 8;
  std::size_t window_length = 200;
  std::size_t blocks = 8;
  std::size_t layers_per_block = 2;
  std::size_t channel_width = 128;
  std::size_t kernel_width = 3;
  // Optional explicit schedule; when given it must equal 2^l for block l.
  std::vector<std::size_t> dilations;
  std::size_t latent_dim = 64;
  bool bottleneck_enabled = true;
  DensityOptions density;

  // ContractError on any invalid field.
  void validate() const;
  std::size_t dilation(std::size_t block) const { return std::size_t{1} << block; }
  // Samples of history seen by the last encoder output.
  std::size_t receptive_field() const;
};

struct TrainForward {
  Tensor y;        // latent, [latent_dim]
  Tensor z;        // noisy latent
  Tensor x_hat;    // decode(z), [C, T]
  Tensor x_tilde;  // decode(y), same decoder parameters
  Tensor rate;     // scalar, bits
};

// Temporal convolutional autoencoder with an entropy bottleneck.
//
// Encoder: `blocks` residual blocks of dilated causal convolutions (block l
// uses dilation 2^l, ReLU after every convolution) plus a 1x1 residual
// convolution per block, then a linear map from the flattened features
// (channel-major, then time) to the latent. The decoder mirrors this with a
// linear expansion followed by causal transposed convolutions in reverse
// dilation order; the final convolution has no activation.
//
// The type is move-only: parameters are shared tensor handles.
class TcnAutoencoder {
 public:
  TcnAutoencoder(TcnConfig config, std::uint64_t seed);

  TcnAutoencoder(TcnAutoencoder&&) noexcept = default;
  TcnAutoencoder& operator=(TcnAutoencoder&&) noexcept = default;
  TcnAutoencoder(const TcnAutoencoder&) = delete;
  TcnAutoencoder& operator=(const TcnAutoencoder&) = delete;

  // Deep copy with independent parameter storage.
  TcnAutoencoder clone() const;

  const TcnConfig& config() const { return config_; }

  // x: [C, T] -> y: [latent_dim].
  Tensor encode(const Tensor& x) const;
  // Outputs of every encoder convolution (after activation) and every block,
  // in evaluation order, all [width, T]. Used to check causality.
  std::vector<Tensor> encoder_activations(const Tensor& x) const;
  // z: [latent_dim] -> [C, T].
  Tensor decode(const Tensor& z) const;

  // Noise-quantized training pass. Requires bottleneck_enabled.
  TrainForward forward_train(const Tensor& x, Rng& rng) const;
  // Inference reconstruction: decode(round(encode(x))), or decode(encode(x))
  // with the bottleneck disabled. Never records a graph, never draws noise.
  Tensor forward_eval(const Tensor& x) const;
  // Rounded latent (bottleneck) or raw latent (no bottleneck).
  Tensor latent_eval(const Tensor& x) const;

  // Every parameter in declared order: encoder, decoder, then density.
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  // Parameters optimized in the current mode (density excluded without a
  // bottleneck).
  std::vector<Parameter> trainable_parameters() const;
  std::size_t encoder_conv_weight_count() const;
  std::size_t decoder_conv_weight_count() const;

  const FactorizedDensity& density() const { return density_; }
  FactorizedDensity& density() { return density_; }
  ChannelNormalizer& normalizer() { return normalizer_; }
  const ChannelNormalizer& normalizer() const { return normalizer_; }

  const std::optional<EntropyTables>& entropy_tables() const { return tables_; }
  void set_entropy_tables(EntropyTables tables) { tables_ = std::move(tables); }

 private:
  struct Conv {
    Tensor weight;
    Tensor bias;
    std::size_t dilation = 1;
  };
  struct Block {
    std::vector<Conv> layers;
    Conv residual;
  };

  void build(Rng& rng);
  Tensor run_encoder_stack(const Tensor& x, std::vector<Tensor>* trace) const;
  Conv add_conv(const std::string& name, Shape weight_shape, std::size_t bias_len,
                std::size_t fan_in, double gain, std::size_t dilation, Rng& rng);

  TcnConfig config_;
  std::vector<Block> encoder_;
  Tensor enc_latent_w_, enc_latent_b_;
  Tensor dec_latent_w_, dec_latent_b_;
  std::vector<Block> decoder_;
  FactorizedDensity density_;
  ChannelNormalizer normalizer_;
  std::optional<EntropyTables> tables_;
  std::vector<Parameter> params_;
  std::size_t network_param_count_ = 0;  // params_ before the density entries
};

}  // namespace tcnae

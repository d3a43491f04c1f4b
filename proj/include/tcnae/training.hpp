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
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tcnae/adam.hpp"
#include "tcnae/errors.hpp"
#include "tcnae/model.hpp"

namespace tcnae {

struct LossWeights {
  double lambda1 = 1e5;  // weight of D(x, x_hat)
  double lambda2 = 1e5;  // weight of D(x_hat, x_tilde)

  void validate() const;
};

// rate + lambda1 * mse(x, x_hat) + lambda2 * mse(x_hat, x_tilde).
Tensor rdo_loss(const Tensor& x, const Tensor& x_hat, const Tensor& x_tilde,
                const Tensor& rate, const LossWeights& weights);

// mse(x, decode(encode(x))) with no quantization; ContractError when the
// model has its bottleneck enabled.
Tensor ae_loss(const Tensor& x, const TcnAutoencoder& model);

// Feeds the per-channel standard deviation of x - x_hat, pooled over every
// window and time step of the batch, into the normalizer's moving average.
void update_channel_normalizer(ChannelNormalizer& normalizer,
                               std::span<const Tensor> x,
                               std::span<const Tensor> x_hat);

struct TrainOptions {
  LossWeights weights;
  AdamOptions adam{.lr = 1e-4};
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  // Restore the parameters of the epoch with the lowest mean training loss.
  bool keep_best = true;
};

// Unscaled per-epoch means over the windows seen in that epoch.
struct EpochMetrics {
  std::size_t epoch = 0;
  double rate = 0.0;            // bits per window
  double distortion = 0.0;      // D(x, x_hat)
  double reconstruction = 0.0;  // D(x_hat, x_tilde)
  double total = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  bool bottleneck = true;
  std::vector<EpochMetrics> epochs;
  std::size_t best_epoch = 0;

  // Writes "# config_hash=<hash>" followed by
  // epoch,rate,distortion,reconstruction,total,seconds.
  void write_csv(const std::filesystem::path& path, const std::string& config_hash) const;
};

class TrainingAborted : public NumericAbort {
 public:
  TrainingAborted(const std::string& what, TrainReport report)
      : NumericAbort(what), report_(std::move(report)) {}
  // Epochs completed before the failure.
  const TrainReport& report() const { return report_; }

 private:
  TrainReport report_;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Trains on unlabeled [C, T] windows. Minibatches are drawn in an order
// shuffled per epoch from `options.seed`, which also drives the quantization
// noise, so identical inputs give bit-identical parameters. Throws
// TrainingAborted on a non-finite loss.
TrainReport fit(TcnAutoencoder& model, std::span<const Tensor> windows,
                const TrainOptions& options, const EpochCallback& on_epoch = {});

// Range of rounded latents over `windows`, widened by `margin` on each side.
struct LatentSupport {
  std::vector<std::int32_t> lo;
  std::vector<std::int32_t> hi;
};
LatentSupport latent_support(const TcnAutoencoder& model,
                             std::span<const Tensor> windows, std::int32_t margin = 2);

// Tabulates the model's density over `support` and stores the tables in the
// model for entropy coding.
void build_model_entropy_tables(TcnAutoencoder& model, const LatentSupport& support);

}  // namespace tcnae

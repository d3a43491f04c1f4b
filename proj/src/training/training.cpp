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

#include "tcnae/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "tcnae/ops.hpp"

namespace tcnae {

void LossWeights::validate() const {
  if (!std::isfinite(lambda1) || !std::isfinite(lambda2) || lambda1 < 0.0 ||
      lambda2 < 0.0) {
    throw ContractError("loss weights must be finite and non-negative");
  }
}

Tensor rdo_loss(const Tensor& x, const Tensor& x_hat, const Tensor& x_tilde,
                const Tensor& rate, const LossWeights& weights) {
  weights.validate();
  const Tensor d1 = mse(x, x_hat);
  const Tensor d2 = mse(x_hat, x_tilde);
  return add(add(rate, scale(d1, weights.lambda1)), scale(d2, weights.lambda2));
}

Tensor ae_loss(const Tensor& x, const TcnAutoencoder& model) {
  if (model.config().bottleneck_enabled) {
    throw ContractError("ae_loss requires a model with the bottleneck disabled");
  }
  return mse(x, model.decode(model.encode(x)));
}

void update_channel_normalizer(ChannelNormalizer& normalizer,
                               std::span<const Tensor> x,
                               std::span<const Tensor> x_hat) {
  if (x.size() != x_hat.size() || x.empty()) {
    throw DimensionError("normalizer update needs matching, non-empty batches");
  }
  const std::size_t channels = normalizer.channels();
  std::vector<double> sum(channels, 0.0), sum_sq(channels, 0.0);
  std::size_t count = 0;
  for (std::size_t w = 0; w < x.size(); ++w) {
    if (x[w].shape() != x_hat[w].shape() || x[w].rank() != 2 ||
        x[w].dim(0) != channels) {
      throw DimensionError("normalizer update: window shape mismatch");
    }
    const std::size_t len = x[w].dim(1);
    const auto a = x[w].data(), b = x_hat[w].data();
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t t = 0; t < len; ++t) {
        const double r = a[c * len + t] - b[c * len + t];
        sum[c] += r;
        sum_sq[c] += r * r;
      }
    }
    count += len;
  }
  std::vector<double> stddev(channels);
  const double n = static_cast<double>(count);
  for (std::size_t c = 0; c < channels; ++c) {
    const double m = sum[c] / n;
    stddev[c] = std::sqrt(std::max(0.0, sum_sq[c] / n - m * m));
  }
  normalizer.update(stddev);
}

void TrainReport::write_csv(const std::filesystem::path& path,
                            const std::string& config_hash) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ContractError("cannot write " + path.string());
  out.precision(17);
  out << "# config_hash=" << config_hash << "\n";
  out << "epoch,rate,distortion,reconstruction,total,seconds\n";
  for (const EpochMetrics& m : epochs) {
    out << m.epoch << ',' << m.rate << ',' << m.distortion << ','
        << m.reconstruction << ',' << m.total << ',' << m.seconds << '\n';
  }
}

TrainReport fit(TcnAutoencoder& model, std::span<const Tensor> windows,
                const TrainOptions& options, const EpochCallback& on_epoch) {
  options.weights.validate();
  if (windows.empty()) throw ContractError("fit: empty training corpus");
  if (options.batch_size == 0) throw ContractError("fit: batch_size must be positive");
  const TcnConfig& cfg = model.config();
  for (const Tensor& w : windows) {
    if (w.rank() != 2 || w.dim(0) != cfg.input_channels || w.dim(1) != cfg.window_length) {
      throw DimensionError("fit: window shape " + shape_string(w.shape()) +
                           " does not match the model");
    }
  }

  const bool rdo = cfg.bottleneck_enabled;
  std::vector<Parameter> params = model.trainable_parameters();
  AdamState adam(params, options.adam);
  Rng rng(options.seed);

  TrainReport report;
  report.bottleneck = rdo;
  std::vector<std::vector<double>> best_params;
  ChannelNormalizer best_normalizer;
  double best_total = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    shuffle(order.begin(), order.end(), rng);
    double sum_rate = 0.0, sum_d1 = 0.0, sum_d2 = 0.0, sum_total = 0.0;

    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t end = std::min(order.size(), begin + options.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - begin);
      for (Parameter& p : params) p.tensor.zero_grad();

      std::vector<Tensor> batch_x, batch_rec;
      for (std::size_t b = begin; b < end; ++b) {
        const Tensor& x = windows[order[b]];
        Tensor loss;
        Tensor rec;
        double rate = 0.0, d1 = 0.0, d2 = 0.0;
        try {
          if (rdo) {
            TrainForward f = model.forward_train(x, rng);
            const Tensor m1 = mse(x, f.x_hat);
            const Tensor m2 = mse(f.x_hat, f.x_tilde);
            loss = add(add(f.rate, scale(m1, options.weights.lambda1)),
                       scale(m2, options.weights.lambda2));
            rate = f.rate.item();
            d1 = m1.item();
            d2 = m2.item();
            rec = f.x_hat;
          } else {
            rec = model.decode(model.encode(x));
            loss = mse(x, rec);
            d1 = loss.item();
          }
        } catch (const DomainError& e) {
          throw TrainingAborted(std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                                    ", window " + std::to_string(order[b]),
                                report);
        }
        const double total = loss.item();
        if (!std::isfinite(total)) {
          throw TrainingAborted("non-finite loss at epoch " + std::to_string(epoch) +
                                    ", window " + std::to_string(order[b]),
                                report);
        }
        sum_rate += rate;
        sum_d1 += d1;
        sum_d2 += d2;
        sum_total += total;
        backward(scale(loss, inv_batch));
        batch_x.push_back(x);
        batch_rec.push_back(rec.detach());
      }
      update_channel_normalizer(model.normalizer(), batch_x, batch_rec);
      adam_step(params, adam);
      for (const Parameter& p : params) {
        for (double v : p.tensor.data()) {
          if (!std::isfinite(v)) {
            throw TrainingAborted("non-finite parameter '" + p.name + "' in epoch " +
                                      std::to_string(epoch),
                                  report);
          }
        }
      }
    }

    const double n = static_cast<double>(windows.size());
    EpochMetrics m;
    m.epoch = epoch;
    m.rate = sum_rate / n;
    m.distortion = sum_d1 / n;
    m.reconstruction = sum_d2 / n;
    m.total = sum_total / n;
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report.epochs.push_back(m);
    if (on_epoch) on_epoch(m);

    if (options.keep_best && m.total < best_total) {
      best_total = m.total;
      report.best_epoch = epoch;
      best_params.clear();
      for (const Parameter& p : model.parameters()) {
        best_params.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
      }
      best_normalizer = model.normalizer();
    }
  }

  if (options.keep_best && !best_params.empty()) {
    auto& all = model.parameters();
    for (std::size_t i = 0; i < all.size(); ++i) {
      auto dst = all[i].tensor.mutable_data();
      std::copy(best_params[i].begin(), best_params[i].end(), dst.begin());
    }
    model.normalizer() = best_normalizer;
  } else if (!options.keep_best && !report.epochs.empty()) {
    report.best_epoch = report.epochs.size() - 1;
  }
  return report;
}

LatentSupport latent_support(const TcnAutoencoder& model,
                             std::span<const Tensor> windows, std::int32_t margin) {
  const std::size_t dims = model.config().latent_dim;
  LatentSupport s;
  s.lo.assign(dims, std::numeric_limits<std::int32_t>::max());
  s.hi.assign(dims, std::numeric_limits<std::int32_t>::min());
  for (const Tensor& w : windows) {
    const Tensor z = quantize(model.latent_eval(w), QuantizerMode::kRound, nullptr);
    const auto zd = z.data();
    for (std::size_t d = 0; d < dims; ++d) {
      const double clamped = std::clamp(zd[d], -1e6, 1e6);
      const auto v = static_cast<std::int32_t>(clamped);
      s.lo[d] = std::min(s.lo[d], v);
      s.hi[d] = std::max(s.hi[d], v);
    }
  }
  for (std::size_t d = 0; d < dims; ++d) {
    if (windows.empty()) {
      s.lo[d] = 0;
      s.hi[d] = 0;
    }
    s.lo[d] -= margin;
    s.hi[d] += margin;
    // Keep tables bounded; anything beyond is escape-coded.
    if (static_cast<std::int64_t>(s.hi[d]) - s.lo[d] + 1 > static_cast<std::int64_t>(kMaxSupport)) {
      const std::int64_t mid = (static_cast<std::int64_t>(s.hi[d]) + s.lo[d]) / 2;
      s.lo[d] = static_cast<std::int32_t>(mid - static_cast<std::int64_t>(kMaxSupport) / 2 + 1);
      s.hi[d] = static_cast<std::int32_t>(mid + static_cast<std::int64_t>(kMaxSupport) / 2);
    }
  }
  return s;
}

void build_model_entropy_tables(TcnAutoencoder& model, const LatentSupport& support) {
  model.set_entropy_tables(build_entropy_tables(model.density(), support.lo, support.hi));
}

}  // namespace tcnae

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

#include <doctest.h>

#include <cmath>

#include "tcnae/model.hpp"
#include "tcnae/ops.hpp"
#include "tcnae/training.hpp"

using namespace tcnae;

namespace {

TcnConfig toy_config(bool bottleneck = true) {
  TcnConfig c;
  c.input_channels = 2;
  c.window_length = 16;
  c.blocks = 2;
  c.channel_width = 4;
  c.latent_dim = 8;
  c.bottleneck_enabled = bottleneck;
  return c;
}

// Two noisy sinusoids with a per-window phase.
std::vector<Tensor> toy_windows(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Tensor> out;
  for (std::size_t w = 0; w < n; ++w) {
    const double phase = rng.uniform(0.0, 6.28);
    std::vector<double> v(32);
    for (std::size_t t = 0; t < 16; ++t) {
      v[t] = std::sin(0.4 * t + phase) + 0.05 * rng.normal();
      v[16 + t] = std::cos(0.4 * t + phase) + 0.05 * rng.normal();
    }
    out.emplace_back(Shape{2, 16}, std::move(v));
  }
  return out;
}

double mean_loss(const TcnAutoencoder& m, const std::vector<Tensor>& windows,
                 const LossWeights& w) {
  NoGradGuard guard;
  Rng rng(99);
  double total = 0.0;
  for (const Tensor& x : windows) {
    if (m.config().bottleneck_enabled) {
      const TrainForward f = m.forward_train(x, rng);
      total += rdo_loss(x, f.x_hat, f.x_tilde, f.rate, w).item();
    } else {
      total += ae_loss(x, m).item();
    }
  }
  return total / static_cast<double>(windows.size());
}

std::vector<double> flat_params(const TcnAutoencoder& m) {
  std::vector<double> out;
  for (const Parameter& p : m.parameters()) out.insert(out.end(), p.tensor.data().begin(), p.tensor.data().end());
  return out;
}

}  // namespace

TEST_CASE("rdo loss adds its terms") {
  const Tensor x({1, 2}, {1.0, 3.0});
  const Tensor x_hat({1, 2}, {0.0, 1.0});
  const Tensor x_tilde({1, 2}, {0.0, 2.0});
  const Tensor rate = Tensor::scalar(7.0);
  CHECK(rdo_loss(x, x_hat, x_tilde, rate, {.lambda1 = 1.0, .lambda2 = 1.0}).item() == doctest::Approx(10.0));
  CHECK(rdo_loss(x, x_hat, x_tilde, rate, {.lambda1 = 2.0, .lambda2 = 0.0}).item() == doctest::Approx(12.0));
  CHECK(rdo_loss(x, x, x, Tensor::scalar(0.0), {}).item() == 0.0);
  CHECK_THROWS_AS(rdo_loss(x, x_hat, x_tilde, rate, {.lambda1 = -1.0, .lambda2 = 1.0}), ContractError);
}

TEST_CASE("ae loss is plain mse and refuses a bottleneck") {
  const TcnAutoencoder ae(toy_config(false), 1);
  const Tensor x = toy_windows(1, 2)[0];
  CHECK(ae_loss(x, ae).item() == mse(x, ae.forward_eval(x)).item());
  const TcnAutoencoder rdo(toy_config(), 1);
  CHECK_THROWS_AS(ae_loss(x, rdo), ContractError);
}

TEST_CASE("channel normalizer") {
  ChannelNormalizer n(2);
  CHECK(n.omega == std::vector<double>{1.0, 1.0});
  n.update(std::vector<double>{2.0, 0.0});
  CHECK(n.omega[0] == doctest::Approx(0.5));
  CHECK(n.omega[1] == doctest::Approx(1e6));
  for (int i = 0; i < 2000; ++i) n.update(std::vector<double>{4.0, 0.0});
  CHECK(n.omega[0] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK_THROWS_AS(n.update(std::vector<double>{1.0}), DimensionError);
  CHECK_THROWS_AS(ChannelNormalizer(2, 1.0), ContractError);

  ChannelNormalizer m(1);
  std::vector<Tensor> xs{Tensor({1, 4}, {1.0, -1.0, 1.0, -1.0})};
  std::vector<Tensor> zeros{Tensor::zeros({1, 4})};
  update_channel_normalizer(m, xs, zeros);
  CHECK(m.omega[0] == doctest::Approx(1.0));
  update_channel_normalizer(m, xs, xs);
  CHECK(m.sigma[0] == doctest::Approx(0.99));
}

TEST_CASE("reported epochs decompose exactly") {
  const auto windows = toy_windows(24, 3);
  TcnAutoencoder m(toy_config(), 4);
  TrainOptions opt;
  opt.weights = {.lambda1 = 50.0, .lambda2 = 20.0};
  opt.adam.lr = 3e-3;
  opt.batch_size = 8;
  opt.epochs = 3;
  std::size_t callbacks = 0;
  const TrainReport report = fit(m, windows, opt, [&](const EpochMetrics&) { ++callbacks; });
  CHECK(callbacks == 3);
  REQUIRE(report.epochs.size() == 3);
  for (const EpochMetrics& e : report.epochs) {
    const double expect = e.rate + 50.0 * e.distortion + 20.0 * e.reconstruction;
    CHECK(std::fabs(e.total - expect) <= 1e-9 * std::max(1.0, std::fabs(expect)));
    CHECK(e.rate >= 0.0);
  }

  TcnAutoencoder ae(toy_config(false), 4);
  const auto density_before = flat_params(ae);
  const TrainReport ae_report = fit(ae, windows, opt);
  for (const EpochMetrics& e : ae_report.epochs) {
    CHECK(e.total == e.distortion);
    CHECK(e.rate == 0.0);
    CHECK(e.reconstruction == 0.0);
  }
  const auto after = flat_params(ae);
  const std::size_t density_count = [&] {
    std::size_t n = 0;
    for (const Parameter& p : ae.density().parameters()) n += p.tensor.numel();
    return n;
  }();
  CHECK(std::equal(after.end() - density_count, after.end(), density_before.end() - density_count));
}

TEST_CASE("training is deterministic") {
  const auto windows = toy_windows(16, 5);
  TrainOptions opt;
  opt.weights = {.lambda1 = 10.0, .lambda2 = 10.0};
  opt.adam.lr = 1e-3;
  opt.batch_size = 4;
  opt.epochs = 2;
  opt.seed = 6;
  TcnAutoencoder a(toy_config(), 7), b(toy_config(), 7);
  const TrainReport ra = fit(a, windows, opt);
  const TrainReport rb = fit(b, windows, opt);
  CHECK(flat_params(a) == flat_params(b));
  CHECK(a.normalizer().omega == b.normalizer().omega);
  for (std::size_t i = 0; i < ra.epochs.size(); ++i) CHECK(ra.epochs[i].total == rb.epochs[i].total);
}

TEST_CASE("one epoch lowers the loss") {
  const LossWeights w{.lambda1 = 100.0, .lambda2 = 100.0};
  int improved = 0;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const auto windows = toy_windows(10, 100 + trial);
    TcnAutoencoder m(toy_config(), 200 + trial);
    const double before = mean_loss(m, windows, w);
    TrainOptions opt;
    opt.weights = w;
    opt.adam.lr = 3e-3;
    opt.batch_size = 4;
    opt.epochs = 1;
    opt.seed = trial;
    fit(m, windows, opt);
    if (mean_loss(m, windows, w) < before) ++improved;
  }
  CHECK(improved >= 9);
}

TEST_CASE("invalid training input") {
  TcnAutoencoder m(toy_config(), 8);
  TrainOptions opt;
  CHECK_THROWS_AS(fit(m, std::vector<Tensor>{}, opt), ContractError);
  const std::vector<Tensor> wrong{Tensor::zeros({3, 16})};
  CHECK_THROWS_AS(fit(m, wrong, opt), DimensionError);
  opt.batch_size = 0;
  CHECK_THROWS_AS(fit(m, toy_windows(2, 9), opt), ContractError);
}

TEST_CASE("a diverging run aborts with the epochs so far") {
  TcnAutoencoder m(toy_config(), 10);
  TrainOptions opt;
  opt.weights = {.lambda1 = 1.0, .lambda2 = 1.0};
  opt.adam.lr = 1e300;
  opt.epochs = 3;
  opt.batch_size = 2;
  CHECK_THROWS_AS(fit(m, toy_windows(4, 11), opt), TrainingAborted);
}

TEST_CASE("latent support brackets the rounded latents") {
  const auto windows = toy_windows(8, 12);
  TcnAutoencoder m(toy_config(), 13);
  const LatentSupport s = latent_support(m, windows, 2);
  REQUIRE(s.lo.size() == 8);
  for (const Tensor& x : windows) {
    const Tensor y = m.latent_eval(x);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(s.lo[i] + 2 <= y.data()[i]);
      CHECK(s.hi[i] - 2 >= y.data()[i]);
    }
  }
  build_model_entropy_tables(m, s);
  CHECK(m.entropy_tables().has_value());
}

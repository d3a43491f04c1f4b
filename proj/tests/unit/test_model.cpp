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

#include <filesystem>
#include <fstream>
#include <set>

#include "oracles.hpp"
#include "tcnae/checkpoint.hpp"
#include "tcnae/errors.hpp"
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

Tensor random_window(const TcnConfig& c, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(c.input_channels * c.window_length);
  for (double& x : v) x = rng.normal();
  return Tensor({c.input_channels, c.window_length}, std::move(v));
}

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

Parameter& find(TcnAutoencoder& m, const std::string& name) {
  for (Parameter& p : m.parameters()) {
    if (p.name == name) return p;
  }
  FAIL("no parameter " << name);
  throw std::logic_error("unreachable");
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tcnae_unit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("config validation") {
  TcnConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.receptive_field() >= c.window_length);
  for (std::size_t l = 0; l < c.blocks; ++l) CHECK(c.dilation(l) == (std::size_t{1} << l));

  TcnConfig d = toy_config();
  d.dilations = {1, 2};
  CHECK_NOTHROW(d.validate());
  d.dilations = {1, 3};
  CHECK_THROWS_AS(d.validate(), ContractError);
  CHECK_THROWS_AS(TcnAutoencoder(d, 0), ContractError);

  TcnConfig e = toy_config();
  e.latent_dim = e.input_channels * e.window_length;
  CHECK_THROWS_AS(e.validate(), ContractError);
}

TEST_CASE("parameters are uniquely named and mirrored") {
  const TcnAutoencoder m(toy_config(), 1);
  std::set<std::string> names;
  for (const Parameter& p : m.parameters()) names.insert(p.name);
  CHECK(names.size() == m.parameters().size());
  CHECK(names.count("encoder.block1.conv1.weight") == 1);
  CHECK(names.count("decoder.block0.tconv0.weight") == 1);
  CHECK(names.count("encoder.latent.weight") == 1);
  CHECK(m.encoder_conv_weight_count() == m.decoder_conv_weight_count());

  TcnConfig wide;
  const TcnAutoencoder big(wide, 0);
  CHECK(big.encoder_conv_weight_count() == big.decoder_conv_weight_count());

  const TcnAutoencoder ae(toy_config(false), 1);
  CHECK(ae.trainable_parameters().size() + ae.density().parameters().size() ==
        ae.parameters().size());
}

TEST_CASE("encode and decode shapes and purity") {
  const TcnConfig c = toy_config();
  const TcnAutoencoder m(c, 2);
  const Tensor x = random_window(c, 3);
  const Tensor y = m.encode(x);
  CHECK(y.shape() == Shape{c.latent_dim});
  CHECK(values(m.encode(x)) == values(y));
  const Tensor r = m.decode(y);
  CHECK(r.shape() == Shape{c.input_channels, c.window_length});
  CHECK(values(m.decode(y)) == values(r));
  CHECK_THROWS_AS(m.encode(Tensor::zeros({c.input_channels, c.window_length + 1})), DimensionError);
  CHECK_THROWS_AS(m.decode(Tensor::zeros({c.latent_dim + 1})), DimensionError);

  const TcnAutoencoder twin(c, 2);
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    CHECK(values(m.parameters()[i].tensor) == values(twin.parameters()[i].tensor));
  }
}

TEST_CASE("zero input yields the latent bias") {
  const TcnConfig c = toy_config();
  TcnAutoencoder m(c, 4);
  Rng rng(5);
  auto bias = find(m, "encoder.latent.bias").tensor.mutable_data();
  for (double& b : bias) b = rng.normal();
  const Tensor y = m.encode(Tensor::zeros({c.input_channels, c.window_length}));
  CHECK(values(y) == std::vector<double>(bias.begin(), bias.end()));
}

TEST_CASE("all-zero network decodes to zero") {
  const TcnConfig c = toy_config();
  TcnAutoencoder m(c, 6);
  for (Parameter& p : m.parameters()) {
    if (p.name.rfind("decoder.", 0) == 0) {
      for (double& v : p.tensor.mutable_data()) v = 0.0;
    }
  }
  const Tensor r = m.decode(Tensor::full({c.latent_dim}, 3.0));
  for (double v : r.data()) CHECK(v == 0.0);
}

TEST_CASE("encoder activations are causal") {
  const TcnConfig c = toy_config();
  const TcnAutoencoder m(c, 7);
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor x = random_window(c, 100 + trial);
    const auto before = m.encoder_activations(x);
    const std::size_t t = rng.below(c.window_length);
    x.mutable_data()[rng.below(c.input_channels) * c.window_length + t] += rng.uniform(0.5, 2.0);
    const auto after = m.encoder_activations(x);
    REQUIRE(before.size() == after.size());
    for (std::size_t a = 0; a < before.size(); ++a) {
      const std::size_t len = before[a].dim(1);
      for (std::size_t ch = 0; ch < before[a].dim(0); ++ch) {
        for (std::size_t s = 0; s < t; ++s) {
          CHECK(before[a].data()[ch * len + s] == after[a].data()[ch * len + s]);
        }
      }
    }
  }
}

TEST_CASE("blocks with silent convolutions and identity residuals are identities") {
  TcnConfig c = toy_config();
  c.channel_width = c.input_channels;
  TcnAutoencoder m(c, 9);
  for (Parameter& p : m.parameters()) {
    const bool residual_weight = p.name.find(".residual.weight") != std::string::npos;
    const bool conv = p.name.find(".conv") != std::string::npos ||
                      p.name.find(".tconv") != std::string::npos ||
                      p.name.find(".residual.bias") != std::string::npos;
    auto v = p.tensor.mutable_data();
    if (residual_weight) {
      std::fill(v.begin(), v.end(), 0.0);
      for (std::size_t i = 0; i < c.channel_width; ++i) v[i * c.channel_width + i] = 1.0;
    } else if (conv) {
      std::fill(v.begin(), v.end(), 0.0);
    }
  }
  const Tensor x = random_window(c, 10);
  const auto acts = m.encoder_activations(x);
  const std::size_t per_block = c.layers_per_block + 1;
  for (std::size_t b = 0; b < c.blocks; ++b) CHECK(values(acts[b * per_block + c.layers_per_block]) == values(x));

  const Tensor z = Tensor::full({c.latent_dim}, 0.25);
  const Tensor expanded = linear(z, find(m, "decoder.latent.weight").tensor,
                                 find(m, "decoder.latent.bias").tensor);
  CHECK(values(m.decode(z)) == values(expanded));
}

TEST_CASE("training pass wiring") {
  const TcnConfig c = toy_config();
  const TcnAutoencoder m(c, 11);
  const Tensor x = random_window(c, 12);
  Rng a(13), b(13);
  const TrainForward f = m.forward_train(x, a);
  const TrainForward g = m.forward_train(x, b);
  CHECK(values(f.x_hat) == values(g.x_hat));
  CHECK(values(f.x_tilde) == values(m.decode(m.encode(x))));
  CHECK(values(f.x_hat) == values(m.decode(f.z)));
  CHECK(f.rate.item() >= 0.0);
  for (std::size_t i = 0; i < c.latent_dim; ++i) {
    CHECK(std::fabs(f.z.data()[i] - f.y.data()[i]) <= 0.5);
  }

  const Tensor rounded = quantize(m.encode(x), QuantizerMode::kRound, nullptr);
  CHECK(values(m.forward_eval(x)) == values(m.decode(rounded)));
  CHECK(values(m.latent_eval(x)) == values(rounded));

  const TcnAutoencoder ae(toy_config(false), 11);
  CHECK_THROWS_AS(ae.forward_train(x, a), ContractError);
  CHECK(values(ae.forward_eval(x)) == values(ae.decode(ae.encode(x))));
}

TEST_CASE("the loss gradient reaches the encoder and matches finite differences") {
  const TcnConfig c = toy_config();
  TcnAutoencoder m(c, 14);
  // Zero biases put silent ReLU columns exactly on the kink.
  Rng rng(17);
  for (Parameter& p : m.parameters()) {
    if (p.name.find(".bias") == std::string::npos) continue;
    for (double& b : p.tensor.mutable_data()) b = rng.uniform(-0.1, 0.1);
  }
  const Tensor x = random_window(c, 15);
  const LossWeights w{.lambda1 = 3.0, .lambda2 = 2.0};
  auto loss = [&] {
    Rng rng(16);
    const TrainForward f = m.forward_train(x, rng);
    return rdo_loss(x, f.x_hat, f.x_tilde, f.rate, w);
  };
  std::vector<Tensor> wrt;
  for (const Parameter& p : m.parameters()) wrt.push_back(p.tensor);
  CHECK(oracle::max_relative_grad_error(loss, wrt) < 1e-4);

  const Tensor& enc = m.parameters().front().tensor;
  bool nonzero = false;
  for (double g : enc.grad()) nonzero = nonzero || g != 0.0;
  CHECK(nonzero);
}

TEST_CASE("clone has independent storage") {
  TcnAutoencoder m(toy_config(), 17);
  TcnAutoencoder copy = m.clone();
  auto v = m.parameters().front().tensor.mutable_data();
  const double before = copy.parameters().front().tensor.data()[0];
  v[0] += 1.0;
  CHECK(copy.parameters().front().tensor.data()[0] == before);
}

TEST_CASE("checkpoint round-trip is exact and byte-stable") {
  const TcnConfig c = toy_config();
  TcnAutoencoder m(c, 18);
  m.normalizer().update(std::vector<double>{0.5, 2.0});
  build_model_entropy_tables(m, LatentSupport{std::vector<std::int32_t>(c.latent_dim, -5),
                                              std::vector<std::int32_t>(c.latent_dim, 5)});
  CheckpointMeta meta;
  meta.feature_names = {"a", "b"};
  meta.feature_mean = {1.0, -2.0};
  meta.feature_std = {0.5, 3.0};
  meta.latent_lo.assign(c.latent_dim, -5);
  meta.latent_hi.assign(c.latent_dim, 5);
  meta.config_hash = "0123456789abcdef";
  meta.experiment = {{"note", "unit"}};

  const auto dir = temp_dir("ckpt");
  save_checkpoint(m, meta, dir / "a");
  const LoadedCheckpoint loaded = load_checkpoint(dir / "a");
  REQUIRE(loaded.model.parameters().size() == m.parameters().size());
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    CHECK(loaded.model.parameters()[i].name == m.parameters()[i].name);
    CHECK(values(loaded.model.parameters()[i].tensor) == values(m.parameters()[i].tensor));
  }
  CHECK(loaded.model.normalizer().omega == m.normalizer().omega);
  CHECK(loaded.model.entropy_tables() == m.entropy_tables());
  CHECK(loaded.meta.feature_names == meta.feature_names);
  CHECK(loaded.meta.feature_std == meta.feature_std);
  CHECK(loaded.meta.config_hash == meta.config_hash);
  const Tensor x = random_window(c, 19);
  CHECK(values(loaded.model.forward_eval(x)) == values(m.forward_eval(x)));

  save_checkpoint(loaded.model, loaded.meta, dir / "b");
  CHECK(slurp(dir / "a" / "model.bin") == slurp(dir / "b" / "model.bin"));
  CHECK(slurp(dir / "a" / "model.json") == slurp(dir / "b" / "model.json"));

  std::string blob = slurp(dir / "a" / "model.bin");
  blob[blob.size() / 2] ^= 0x40;
  std::ofstream(dir / "a" / "model.bin", std::ios::binary | std::ios::trunc) << blob;
  CHECK_THROWS_AS(load_checkpoint(dir / "a"), ParseError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing"), ParseError);
}

TEST_CASE("model config json is strict") {
  const TcnConfig c = toy_config();
  const TcnConfig back = tcn_config_from_json(tcn_config_to_json(c));
  CHECK(back.channel_width == c.channel_width);
  CHECK(back.latent_dim == c.latent_dim);
  CHECK(back.bottleneck_enabled == c.bottleneck_enabled);
  nlohmann::json j = tcn_config_to_json(c);
  j["colour"] = "blue";
  CHECK_THROWS_AS(tcn_config_from_json(j), ConfigError);
  nlohmann::json bad = tcn_config_to_json(c);
  bad["blocks"] = "eight";
  CHECK_THROWS_AS(tcn_config_from_json(bad), ConfigError);
}

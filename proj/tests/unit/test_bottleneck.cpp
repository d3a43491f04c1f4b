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
#include <numbers>

#include "oracles.hpp"
#include "tcnae/density.hpp"
#include "tcnae/entropy_coding.hpp"
#include "tcnae/errors.hpp"
#include "tcnae/ops.hpp"
#include "tcnae/quantize.hpp"

using namespace tcnae;

namespace {

// A density whose parameters have been pushed away from initialization.
FactorizedDensity perturbed_density(std::size_t dims, std::uint64_t seed, double amount) {
  Rng rng(seed);
  FactorizedDensity d(dims, DensityOptions{}, rng);
  for (Parameter& p : d.parameters()) {
    for (double& v : p.tensor.mutable_data()) v += rng.uniform(-amount, amount);
  }
  return d;
}

std::vector<std::int32_t> sample_symbols(const EntropyTables& t, std::size_t n, Rng& rng) {
  std::vector<std::int32_t> out;
  const double total = std::ldexp(1.0, static_cast<int>(t.precision_bits));
  for (std::size_t j = 0; j < n; ++j) {
    const PmfTable& table = t.tables[j % t.tables.size()];
    double u = rng.uniform() * total, acc = 0.0;
    std::size_t i = 0;
    for (; i + 1 < table.freq.size(); ++i) {
      acc += table.freq[i];
      if (u < acc) break;
    }
    out.push_back(table.offset + static_cast<std::int32_t>(std::min(i, table.support() - 1)));
  }
  return out;
}

}  // namespace

TEST_CASE("density at initialization is centred and wide") {
  Rng rng(1);
  const FactorizedDensity d(6, DensityOptions{}, rng);
  for (std::size_t i = 0; i < d.dims(); ++i) {
    CHECK(std::fabs(d.cumulative(0.0, i) - 0.5) < 0.05);
    CHECK(d.cumulative(20.0 * 10.0, i) > 0.99);
    CHECK(d.cumulative(-20.0 * 10.0, i) < 0.01);
  }
}

TEST_CASE("cumulative is monotone for arbitrary parameters") {
  for (std::uint64_t seed : {2, 3, 4}) {
    const FactorizedDensity d = perturbed_density(4, seed, 1.5);
    Rng rng(seed + 100);
    for (int k = 0; k < 1000; ++k) {
      double a = rng.uniform(-60.0, 60.0), b = rng.uniform(-60.0, 60.0);
      if (a > b) std::swap(a, b);
      const std::size_t dim = rng.below(4);
      CHECK(d.cumulative(a, dim) <= d.cumulative(b, dim));
    }
  }
}

TEST_CASE("tensor and scalar density evaluation agree") {
  const FactorizedDensity d = perturbed_density(3, 5, 0.5);
  const Tensor u({3, 4}, {-3, -0.5, 0.2, 4, -1, 0, 1, 2, 10, -10, 0.5, 0.25});
  const Tensor c = d.cumulative(u);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(c.data()[i * 4 + j] == doctest::Approx(d.cumulative(u.data()[i * 4 + j], i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("likelihood is floored, sums to at most one, and is a unit-spaced difference") {
  const FactorizedDensity d = perturbed_density(2, 6, 0.8);
  const double floor = d.options().likelihood_floor;
  const Tensor far = d.likelihood(Tensor::from({1e6, -1e6}));
  CHECK(far.data()[0] == floor);
  CHECK(far.data()[1] == floor);

  for (std::size_t dim = 0; dim < 2; ++dim) {
    std::vector<double> grid;
    for (int v = -100; v <= 100; ++v) grid.push_back(v);
    std::vector<double> z(2 * grid.size(), 0.0);
    std::copy(grid.begin(), grid.end(), z.begin() + static_cast<std::ptrdiff_t>(dim * grid.size()));
    const Tensor lik = d.likelihood(Tensor({2, grid.size()}, z));
    double total = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double p = lik.data()[dim * grid.size() + k];
      CHECK(p >= floor);
      CHECK(p <= 1.0);
      const double direct = d.cumulative(grid[k] + 0.5, dim) - d.cumulative(grid[k] - 0.5, dim);
      if (direct > 1e-6) CHECK(std::fabs(p - direct) < 1e-12);
      total += d.pmf(static_cast<std::int64_t>(grid[k]), dim);
    }
    CHECK(total <= 1.0 + 1e-6);
  }
}

TEST_CASE("rate is the base-2 negative log-likelihood") {
  const FactorizedDensity d = perturbed_density(4, 7, 0.5);
  const Tensor z = Tensor::from({0.3, -2.0, 5.0, 1.0});
  const Tensor lik = d.likelihood(z);
  double product_log = 0.0;
  for (double p : lik.data()) product_log += std::log(p);
  const double rate = d.rate_bits(z).item();
  CHECK(rate >= 0.0);
  CHECK(std::fabs(rate + product_log / std::numbers::ln2) < 1e-10);
}

TEST_CASE("rate gradients match central differences") {
  FactorizedDensity d = perturbed_density(3, 8, 0.3);
  Tensor z = Tensor({3, 2}, {0.3, -1.2, 2.2, 0.7, -0.4, 1.6}, true);
  std::vector<Tensor> wrt = {z};
  for (const Parameter& p : d.parameters()) wrt.push_back(p.tensor);
  CHECK(oracle::max_relative_grad_error([&] { return d.rate_bits(z); }, wrt) < 1e-4);
}

TEST_CASE("quantization modes") {
  const Tensor y = Tensor::from({1.4, -1.5, 2.5, -0.4, 0.5});
  const Tensor r = quantize(y, QuantizerMode::kRound, nullptr);
  CHECK(std::vector<double>(r.data().begin(), r.data().end()) ==
        std::vector<double>{1, -2, 3, -0, 1});
  CHECK_THROWS_AS(quantize(y, QuantizerMode::kNoise, nullptr), ContractError);

  Rng a(9), b(9);
  const Tensor za = quantize(y, QuantizerMode::kNoise, &a);
  const Tensor zb = quantize(y, QuantizerMode::kNoise, &b);
  for (std::size_t i = 0; i < y.numel(); ++i) {
    CHECK(std::fabs(za.data()[i] - y.data()[i]) <= 0.5);
    CHECK(za.data()[i] == zb.data()[i]);
  }

  const std::size_t n = 100000;
  Rng rng(10);
  const Tensor zeros = Tensor::zeros({n});
  const Tensor noise = quantize(zeros, QuantizerMode::kNoise, &rng);
  double mean = 0.0;
  for (double v : noise.data()) mean += v;
  mean /= static_cast<double>(n);
  CHECK(std::fabs(mean) < 3.0 / std::sqrt(12.0 * static_cast<double>(n)));

  Tensor yg = Tensor::from({0.2, -0.7}, true);
  Rng g(11);
  backward(sum(quantize(yg, QuantizerMode::kNoise, &g)));
  CHECK(yg.grad()[0] == 1.0);
  CHECK(yg.grad()[1] == 1.0);
}

TEST_CASE("quantized pmfs sum to the precision and keep every entry positive") {
  const std::vector<double> probs = {0.7, 1e-12, 0.2, 0.0999999, 1e-9};
  const auto f = quantize_pmf(probs, 16);
  std::uint64_t total = 0;
  for (auto v : f) {
    CHECK(v >= 1);
    total += v;
  }
  CHECK(total == 65536);
}

TEST_CASE("entropy coding round-trips and approaches the table entropy") {
  const FactorizedDensity d = perturbed_density(8, 12, 0.3);
  const std::vector<std::int32_t> lo(8, -30), hi(8, 30);
  const EntropyTables tables = build_entropy_tables(d, lo, hi);
  Rng rng(13);
  const auto symbols = sample_symbols(tables, 20000, rng);
  CodingStats stats;
  const Bitstream bs = compress(symbols, tables, &stats);
  CHECK(decompress(bs, tables) == symbols);
  CHECK(stats.symbols == symbols.size());
  const double ideal_bytes = table_code_length_bits(symbols, tables) / 8.0;
  const double actual = static_cast<double>(bs.bytes.size());
  CHECK(actual <= ideal_bytes * 1.01 + 64.0);
  CHECK(actual >= ideal_bytes);
}

TEST_CASE("escape symbols carry out-of-support values losslessly") {
  const FactorizedDensity d = perturbed_density(2, 14, 0.3);
  const std::vector<std::int32_t> lo(2, -3), hi(2, 3);
  const EntropyTables tables = build_entropy_tables(d, lo, hi);
  const std::vector<std::int32_t> symbols = {0, 1, 100, -100, 2147483647, -2147483647 - 1, 3, -4};
  CodingStats stats;
  const Bitstream bs = compress(symbols, tables, &stats);
  CHECK(stats.escapes == 5);
  CHECK(decompress(bs, tables) == symbols);
}

TEST_CASE("a near-degenerate source codes to little more than the header") {
  EntropyTables t;
  t.tables.push_back({0, {65534, 1, 1}});
  const std::vector<std::int32_t> symbols(10000, 0);
  const Bitstream bs = compress(symbols, t);
  CHECK(bs.bytes.size() <= kBitstreamHeaderBytes + 8);
  CHECK(decompress(bs, t) == symbols);
}

TEST_CASE("bitstream header is validated") {
  EntropyTables t;
  t.tables.push_back({-1, {16384, 32768, 16383, 1}});
  const std::vector<std::int32_t> symbols = {-1, 0, 1, 0};
  Bitstream bs = compress(symbols, t);
  REQUIRE(bs.bytes.size() >= kBitstreamHeaderBytes);
  CHECK(bs.bytes[0] == 'T');
  CHECK(bs.bytes[4] == kBitstreamVersion);
  CHECK(bs.bytes[5] == 16);
  CHECK(bs.bytes[8] == 4);

  EntropyTables other = t;
  other.tables[0].freq = {16383, 32769, 16383, 1};
  CHECK_THROWS_AS(decompress(bs, other), ContractError);
  Bitstream bad = bs;
  bad.bytes[0] = 'X';
  CHECK_THROWS_AS(decompress(bad, t), ContractError);
  Bitstream short_stream;
  short_stream.bytes = {'T', 'C'};
  CHECK_THROWS_AS(decompress(short_stream, t), ContractError);
}

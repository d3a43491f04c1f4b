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

// Acceptance suite: one PASS/FAIL line per criterion. Criteria may be
// selected by number on the command line; the default runs all ten.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "tcnae/checkpoint.hpp"
#include "tcnae/detection.hpp"
#include "tcnae/entropy_coding.hpp"
#include "tcnae/evaluation.hpp"
#include "tcnae/experiment.hpp"
#include "tcnae/model.hpp"
#include "tcnae/training.hpp"

using namespace tcnae;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigDir = TCNAE_CONFIG_DIR;
fs::path g_runs = "acceptance_runs";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ExperimentConfig acceptance_config(const std::string& name, const std::string& run) {
  ExperimentConfig c = load_experiment_config(kConfigDir / "acceptance" / (name + ".json"));
  c.output_dir = g_runs / run;
  return c;
}

TcnConfig toy_model() {
  TcnConfig c;
  c.input_channels = 2;
  c.window_length = 16;
  c.blocks = 2;
  c.channel_width = 4;
  c.latent_dim = 8;
  return c;
}

Tensor random_window(std::size_t channels, std::size_t length, Rng& rng) {
  std::vector<double> v(channels * length);
  for (double& x : v) x = rng.normal();
  return Tensor({channels, length}, std::move(v));
}

// Gradients of the full training objective against central differences.
Outcome gradient_check() {
  TcnAutoencoder m(toy_model(), 1);
  Rng rng(2);
  // Away from initialization so no ReLU input sits exactly on its kink.
  for (Parameter& p : m.parameters()) {
    const bool bias = p.name.find(".bias") != std::string::npos;
    for (double& v : p.tensor.mutable_data()) v += bias ? rng.uniform(-0.1, 0.1) : rng.uniform(-0.05, 0.05);
  }
  const LossWeights weights;  // defaults: 1e5, 1e5
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const Tensor x = random_window(2, 16, rng);
    const std::uint64_t noise_seed = rng.next_u64();
    auto loss = [&] {
      Rng noise(noise_seed);
      const TrainForward f = m.forward_train(x, noise);
      return rdo_loss(x, f.x_hat, f.x_tilde, f.rate, weights);
    };
    std::vector<Tensor> wrt;
    for (const Parameter& p : m.parameters()) wrt.push_back(p.tensor);
    worst = std::max(worst, oracle::max_relative_grad_error(loss, wrt, 1e-5));
  }
  return {worst < 1e-4, fmt("max relative error %.3g over %zu parameters, 3 windows", worst,
                            m.parameters().size())};
}

Outcome causality() {
  TcnConfig c;
  c.input_channels = 3;
  c.window_length = 64;
  c.blocks = 4;
  c.channel_width = 6;
  c.latent_dim = 16;
  const TcnAutoencoder m(c, 3);
  Rng rng(4);
  std::size_t violations = 0, compared = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Tensor x = random_window(c.input_channels, c.window_length, rng);
    const auto before = m.encoder_activations(x);
    const std::size_t t = rng.below(c.window_length);
    x.mutable_data()[rng.below(c.input_channels) * c.window_length + t] += rng.uniform(-3.0, 3.0);
    const auto after = m.encoder_activations(x);
    for (std::size_t a = 0; a < before.size(); ++a) {
      const std::size_t len = before[a].dim(1);
      for (std::size_t ch = 0; ch < before[a].dim(0); ++ch) {
        for (std::size_t s = 0; s < t; ++s) {
          ++compared;
          if (before[a].data()[ch * len + s] != after[a].data()[ch * len + s]) ++violations;
        }
      }
    }
  }
  return {violations == 0,
          fmt("%zu changed activations before the perturbed index (%zu compared)", violations, compared)};
}

FactorizedDensity perturbed_density(std::size_t dims, std::uint64_t seed, double amount) {
  Rng rng(seed);
  FactorizedDensity d(dims, DensityOptions{}, rng);
  for (Parameter& p : d.parameters()) {
    for (double& v : p.tensor.mutable_data()) v += rng.uniform(-amount, amount);
  }
  return d;
}

Outcome coder_consistency() {
  const std::size_t dims = 16;
  const FactorizedDensity d = perturbed_density(dims, 5, 0.4);
  const std::vector<std::int32_t> lo(dims, -40), hi(dims, 40);
  const EntropyTables tables = build_entropy_tables(d, lo, hi);
  // Symbols drawn from the model itself by inverting its cumulative.
  Rng rng(6);
  std::vector<std::int32_t> symbols;
  double ideal_bits = 0.0;
  for (std::size_t n = 0; n < 20000; ++n) {
    const std::size_t dim = n % dims;
    const double u = rng.uniform();
    std::int32_t v = lo[dim];
    while (v < hi[dim] && d.cumulative(v + 0.5, dim) < u) ++v;
    symbols.push_back(v);
    ideal_bits -= std::log2(d.pmf(v, dim));
  }
  CodingStats stats;
  const Bitstream bs = compress(symbols, tables, &stats);
  const bool lossless = decompress(bs, tables) == symbols;
  const double ideal_bytes = ideal_bits / 8.0;
  const double actual = static_cast<double>(bs.bytes.size());
  const bool within = actual <= ideal_bytes * 1.01 + 64.0;
  return {lossless && within,
          fmt("%zu symbols: %.0f bytes coded vs %.1f ideal (%+.3f%%), round-trip %s", symbols.size(),
              actual, ideal_bytes, 100.0 * (actual - ideal_bytes) / ideal_bytes,
              lossless ? "exact" : "BROKEN")};
}

Outcome density_validity() {
  std::size_t checked = 0, bad = 0;
  double worst_mass = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const FactorizedDensity d = seed == 0 ? perturbed_density(8, 7, 0.0) : perturbed_density(8, 7 + seed, 1.0);
    const double floor = d.options().likelihood_floor;
    for (std::size_t dim = 0; dim < d.dims(); ++dim) {
      double prev = -1.0;
      for (int k = 0; k < 1000; ++k) {
        const double u = -100.0 + 200.0 * k / 999.0;
        const double c = d.cumulative(u, dim);
        if (c < prev || c < 0.0 || c > 1.0) ++bad;
        prev = c;
        ++checked;
      }
      std::vector<double> grid;
      for (int v = -200; v <= 200; ++v) grid.push_back(v);
      std::vector<double> z(d.dims() * grid.size(), 0.0);
      std::copy(grid.begin(), grid.end(), z.begin() + static_cast<std::ptrdiff_t>(dim * grid.size()));
      const Tensor lik = d.likelihood(Tensor({d.dims(), grid.size()}, z));
      double mass = 0.0;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        if (lik.data()[dim * grid.size() + k] < floor) ++bad;
        mass += d.pmf(static_cast<std::int64_t>(grid[k]), dim);
      }
      worst_mass = std::max(worst_mass, mass);
      if (mass > 1.0 + 1e-6) ++bad;
    }
  }
  return {bad == 0, fmt("%zu grid points, %zu violations, largest integer mass %.9f", checked, bad, worst_mass)};
}

Outcome detection_oracles() {
  Rng rng(11);
  std::size_t one_shot_mismatch = 0, stream_mismatch = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = 1 + rng.below(8);
    const Tensor x = random_window(c, 200, rng);
    Tensor x_hat = random_window(c, 200, rng);
    std::vector<double> omega(c);
    for (double& w : omega) w = rng.uniform(0.05, 3.0);
    const double delta = rng.uniform(0.2, 3.0);
    const auto d = one_shot(subset_means(max_abs_error(scaled_abs_error(x, x_hat, omega))), delta);
    const std::vector<double> xv(x.data().begin(), x.data().end());
    const std::vector<double> hv(x_hat.data().begin(), x_hat.data().end());
    if (d != oracle::one_shot_pipeline(xv, hv, omega, c, 200, delta)) ++one_shot_mismatch;
  }
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t windows = 1 + rng.below(600);
    std::vector<std::vector<std::uint8_t>> votes(windows);
    for (auto& w : votes) {
      std::vector<std::uint8_t> d(20);
      const double p = rng.uniform();
      for (auto& v : d) v = rng.uniform() < p ? 1 : 0;
      w = expand_votes(d);
    }
    ConfidenceStream s(200);
    std::vector<double> cs;
    for (const auto& w : votes) cs.push_back(s.push(w));
    const auto tail = s.flush();
    cs.insert(cs.end(), tail.begin(), tail.end());
    const auto expect = oracle::confidence(votes, 200);
    const double limit = rng.uniform(0.5, 1.0);
    if (cs != expect || multi_shot(cs, limit) != multi_shot(expect, limit)) ++stream_mismatch;
  }
  return {one_shot_mismatch == 0 && stream_mismatch == 0,
          fmt("1-shot mismatches %zu/100, streaming mismatches %zu/100", one_shot_mismatch, stream_mismatch)};
}

std::vector<Tensor> sinusoid_windows(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Tensor> out;
  for (std::size_t w = 0; w < n; ++w) {
    const double phase = rng.uniform(0.0, 6.28);
    std::vector<double> v(32);
    for (std::size_t t = 0; t < 16; ++t) {
      v[t] = std::sin(0.4 * t + phase) + 0.05 * rng.normal();
      v[16 + t] = std::cos(0.3 * t + phase) + 0.05 * rng.normal();
    }
    out.emplace_back(Shape{2, 16}, std::move(v));
  }
  return out;
}

Outcome loss_decomposition() {
  const auto windows = sinusoid_windows(64, 12);
  TrainOptions opt;
  opt.adam.lr = 1e-3;
  opt.batch_size = 8;
  opt.epochs = 5;
  opt.seed = 13;
  TcnAutoencoder rdo(toy_model(), 14);
  const TrainReport r = fit(rdo, windows, opt);
  double worst = 0.0;
  for (const EpochMetrics& e : r.epochs) {
    const double expect = e.rate + opt.weights.lambda1 * e.distortion + opt.weights.lambda2 * e.reconstruction;
    worst = std::max(worst, std::fabs(e.total - expect) / std::max(1.0, std::fabs(expect)));
  }
  TcnConfig ae_config = toy_model();
  ae_config.bottleneck_enabled = false;
  TcnAutoencoder ae(ae_config, 14);
  const TrainReport a = fit(ae, windows, opt);
  bool ae_exact = true;
  for (const EpochMetrics& e : a.epochs) {
    ae_exact = ae_exact && e.total == e.distortion && e.rate == 0.0 && e.reconstruction == 0.0;
  }
  return {worst <= 1e-9 && ae_exact,
          fmt("RDO worst relative gap %.3g over %zu epochs, AE total equals MSE %s", worst,
              r.epochs.size(), ae_exact ? "exactly" : "NOT exactly")};
}

Outcome robustness() {
  const ExperimentConfig config = acceptance_config("robustness", "robustness");
  std::ofstream log(g_runs / "robustness.log");
  const std::vector<SweepRow> rows = run_sweep(config, log);
  std::map<std::string, std::map<double, std::vector<double>>> f1;
  for (const SweepRow& row : rows) {
    if (!row.metrics) return {false, "cell " + row.model + " failed: " + row.error};
    f1[row.model][row.anomaly_fraction].push_back(row.metrics->best_f1());
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double lo = config.sweep.anomaly_fractions.front(), hi = config.sweep.anomaly_fractions.back();
  const double rdo0 = mean(f1["rdo"][lo]), rdo5 = mean(f1["rdo"][hi]);
  const double ae0 = mean(f1["ae"][lo]), ae5 = mean(f1["ae"][hi]);
  const double rdo_drop = rdo0 - rdo5, ae_drop = ae0 - ae5;
  return {ae_drop > rdo_drop,
          fmt("mean best F1 over %zu seeds: RDO %.4f -> %.4f (drop %+.4f), AE %.4f -> %.4f (drop %+.4f)",
              config.sweep.seeds.size(), rdo0, rdo5, rdo_drop, ae0, ae5, ae_drop)};
}

// Trains unless this run already produced a checkpoint for the same config.
fs::path ensure_trained(const ExperimentConfig& config, std::ostream& log) {
  const fs::path ckpt = config.output_dir / "checkpoint";
  if (fs::exists(ckpt / "model.json")) {
    const auto manifest = nlohmann::json::parse(slurp(ckpt / "model.json"));
    if (manifest.value("config_hash", "") == config.hash()) return ckpt;
  }
  return run_train(config, log).checkpoint_dir;
}

// Replays the reconstructions of the first pass, so a stride-1 stream can be
// re-thresholded at every delta without running the model again.
class ReplayReconstructor {
 public:
  explicit ReplayReconstructor(Reconstructor inner) : inner_(std::move(inner)) {}
  Reconstructor callable() {
    return [this](const Tensor& x) {
      if (next_ == cache_.size()) cache_.push_back(inner_(x));
      return cache_.at(next_++);
    };
  }
  void rewind() { next_ = 0; }

 private:
  Reconstructor inner_;
  std::vector<Tensor> cache_;
  std::size_t next_ = 0;
};

Outcome multi_shot_gain() {
  ExperimentConfig config = acceptance_config("robustness", "robustness");
  config.model.bottleneck_enabled = true;
  config.data.anomaly_fraction = config.sweep.anomaly_fractions.back();
  config.training.seed = config.sweep.seeds.front();
  config.output_dir = config.output_dir / "cells" /
                      fmt("rdo_p%d_s%llu", static_cast<int>(std::lround(config.data.anomaly_fraction * 1000)),
                          static_cast<unsigned long long>(config.training.seed));
  std::ofstream log(g_runs / "multi_shot.log");
  const fs::path ckpt = ensure_trained(config, log);
  const MetricsReport one = run_eval(config, ckpt, log);

  // Both modes get their best delta over the same grid on the same series.
  const LoadedCheckpoint ck = load_checkpoint(ckpt);
  Normalization norm;
  norm.mean = ck.meta.feature_mean;
  norm.stddev = ck.meta.feature_std;
  const PreparedData data = prepare_data(config.data, ck.model.config().input_channels);
  StreamOptions opts;
  opts.window_length = ck.model.config().window_length;
  opts.confidence_limit = config.detection.confidence_limit;
  std::vector<ReplayReconstructor> replay;
  std::vector<LabeledSeries> sets;
  for (std::size_t i : data.validation_sets) {
    sets.push_back(normalize(data.raw[i], norm));
    replay.emplace_back(model_reconstructor(ck.model));
  }
  double best_f1 = -1.0, best_delta = 0.0;
  for (double delta : config.detection.grid()) {
    opts.delta = delta;
    DetectionCounts pooled;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      replay[i].rewind();
      const StreamResult r =
          stream_series(sets[i], replay[i].callable(), ck.model.normalizer().omega, opts);
      pooled += count_detections(r.zeta, r.labels);
    }
    if (pooled.f1() > best_f1) best_f1 = pooled.f1(), best_delta = delta;
  }
  log << "multi-shot best F1 " << best_f1 << " at delta " << best_delta << "\n";
  run_stream(config, ckpt, std::nullopt, best_delta, log);
  return {best_f1 >= one.best_f1(),
          fmt("validation series, best delta per mode: multi-shot F1 %.4f (delta %.2f), "
              "1-shot F1 %.4f (delta %.2f)",
              best_f1, best_delta, one.best_f1(), one.best_delta())};
}

Outcome capacity_rate() {
  const ExperimentConfig base = acceptance_config("capacity", "capacity");
  std::ofstream log(g_runs / "capacity.log");
  std::string detail;
  double sum_wide = 0.0, sum_narrow = 0.0;
  std::size_t wins = 0;
  for (std::uint64_t seed : base.sweep.seeds) {
    double rate[2] = {0.0, 0.0};
    const std::size_t widths[2] = {128, 30};
    for (int i = 0; i < 2; ++i) {
      ExperimentConfig c = base;
      c.model.channel_width = widths[i];
      c.training.seed = seed;
      c.output_dir = base.output_dir / fmt("w%zu_s%llu", widths[i], static_cast<unsigned long long>(seed));
      const TrainOutcome t = run_train(c, log);
      const auto& epochs = t.report.epochs;
      // Converged rate: mean over the final quarter of training.
      const std::size_t tail = std::max<std::size_t>(1, epochs.size() / 4);
      for (std::size_t e = epochs.size() - tail; e < epochs.size(); ++e) rate[i] += epochs[e].rate;
      rate[i] /= static_cast<double>(tail);
    }
    sum_wide += rate[0];
    sum_narrow += rate[1];
    if (rate[0] <= rate[1]) ++wins;
    detail += fmt(" s%llu %.2f/%.2f", static_cast<unsigned long long>(seed), rate[0], rate[1]);
  }
  const double n = static_cast<double>(base.sweep.seeds.size());
  return {base.sweep.seeds.size() >= 3 && sum_wide <= sum_narrow,
          fmt("mean converged rate, width 128 vs 30: %.2f vs %.2f bits, 128 lower on %zu/%zu seeds;",
              sum_wide / n, sum_narrow / n, wins, base.sweep.seeds.size()) + detail};
}

Outcome determinism() {
  std::ofstream log(g_runs / "determinism.log");
  std::string a_bytes[4], b_bytes[4];
  for (int run = 0; run < 2; ++run) {
    const ExperimentConfig c = acceptance_config("determinism", run == 0 ? "determinism_a" : "determinism_b");
    fs::remove_all(c.output_dir);
    const TrainOutcome t = run_train(c, log);
    run_eval(c, t.checkpoint_dir, log);
    std::string* dst = run == 0 ? a_bytes : b_bytes;
    dst[0] = slurp(t.checkpoint_dir / "model.bin");
    dst[1] = slurp(t.checkpoint_dir / "model.json");
    dst[2] = slurp(c.output_dir / "metrics.json");
    dst[3] = slurp(c.output_dir / "corpus.json");
  }
  const char* names[4] = {"model.bin", "model.json", "metrics.json", "corpus.json"};
  std::string differing;
  for (int i = 0; i < 4; ++i) {
    if (a_bytes[i].empty() || a_bytes[i] != b_bytes[i]) differing += std::string(" ") + names[i];
  }
  return {differing.empty(), differing.empty()
                                 ? fmt("model.bin (%zu bytes), model.json, metrics.json and corpus.json identical",
                                       a_bytes[0].size())
                                 : "differing:" + differing};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradient_check},
      {"causality", causality},
      {"entropy coder consistency", coder_consistency},
      {"density validity", density_validity},
      {"detection oracle equivalence", detection_oracles},
      {"loss decomposition", loss_decomposition},
      {"robustness trend", robustness},
      {"multi-shot gain", multi_shot_gain},
      {"capacity and rate trend", capacity_rate},
      {"determinism", determinism},
  };
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--runs" && i + 1 < argc) {
      g_runs = argv[++i];
    } else {
      selected.insert(std::stoul(arg));
    }
  }
  fs::remove_all(g_runs);
  fs::create_directories(g_runs);

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(i + 1)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2zu %s  %s: %s [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

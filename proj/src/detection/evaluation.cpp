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

#include "tcnae/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "tcnae/errors.hpp"

namespace tcnae {

Reconstructor model_reconstructor(const TcnAutoencoder& model) {
  return [&model](const Tensor& x) { return model.forward_eval(x); };
}

namespace {

struct WindowScore {
  std::vector<double> mae;
  std::vector<double> means;
};

WindowScore score_window(const Tensor& x, const Reconstructor& reconstruct,
                         std::span<const double> omega, std::size_t subset) {
  WindowScore w;
  w.mae = max_abs_error(scaled_abs_error(x, reconstruct(x), omega));
  w.means = subset_means(w.mae, subset);
  return w;
}

}  // namespace

SeriesScores one_shot_scores(const LabeledSeries& series, const Reconstructor& reconstruct,
                             std::span<const double> omega, const ScoringOptions& options) {
  const std::size_t n = series.length(), len = options.window_length;
  window_count(n, len, len);
  SeriesScores out;
  out.id = series.id;
  out.labels = series.labels;
  out.mae.assign(n, 0.0);
  out.score.assign(n, 0.0);

  std::vector<std::size_t> offsets;
  for (std::size_t o = 0; o + len <= n; o += len) offsets.push_back(o);
  const std::size_t tiled_end = offsets.back() + len;
  if (tiled_end < n) offsets.push_back(n - len);

  for (std::size_t o : offsets) {
    const WindowScore w = score_window(window_at(series, o, len), reconstruct, omega,
                                       options.subset);
    const std::size_t from = o < tiled_end && o + len > tiled_end ? tiled_end - o : 0;
    for (std::size_t j = from; j < len; ++j) {
      out.mae[o + j] = w.mae[j];
      out.score[o + j] = w.means[j / options.subset];
    }
  }
  return out;
}

std::vector<std::uint8_t> threshold(std::span<const double> score, double delta) {
  std::vector<std::uint8_t> out(score.size());
  for (std::size_t t = 0; t < score.size(); ++t) out[t] = score[t] > delta ? 1 : 0;
  return out;
}

std::vector<double> delta_grid(double lo, double hi, double step) {
  if (!(lo > 0.0) || !(hi >= lo) || !(step > 0.0)) {
    throw ContractError("delta grid needs 0 < lo <= hi and step > 0");
  }
  const auto steps = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> grid;
  for (std::size_t i = 0; i <= steps; ++i) {
    grid.push_back(std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9);
  }
  return grid;
}

DeltaSweep sweep_delta(std::span<const SeriesScores> scores, std::span<const double> grid) {
  if (grid.empty()) throw ContractError("empty delta grid");
  if (scores.empty()) throw ContractError("no series to evaluate");
  for (const SeriesScores& s : scores) {
    if (s.labels.size() != s.score.size()) {
      throw ContractError("series '" + s.id + "' carries no labels");
    }
  }
  DeltaSweep sweep;
  for (double delta : grid) {
    DeltaPoint p;
    p.delta = delta;
    for (const SeriesScores& s : scores) p.counts += count_detections(threshold(s.score, delta), s.labels);
    p.f1 = p.counts.f1();
    if (sweep.points.empty() || p.f1 > sweep.best_point().f1) sweep.best = sweep.points.size();
    sweep.points.push_back(p);
  }
  const double best_delta = sweep.best_point().delta;
  for (const SeriesScores& s : scores) {
    sweep.per_series_at_best.push_back(count_detections(threshold(s.score, best_delta), s.labels));
  }
  return sweep;
}

StreamResult stream_series(const LabeledSeries& series, const Reconstructor& reconstruct,
                           std::span<const double> omega, const StreamOptions& options) {
  const std::size_t n = series.length(), len = options.window_length;
  const std::size_t windows = window_count(n, len, 1);
  StreamResult out;
  out.id = series.id;
  out.labels = series.labels;
  out.mae.assign(n, 0.0);

  ConfidenceStream stream(len);
  for (std::size_t s = 0; s < windows; ++s) {
    const WindowScore w = score_window(window_at(series, s, len), reconstruct, omega,
                                       options.subset);
    if (s == 0) {
      std::copy(w.mae.begin(), w.mae.end(), out.mae.begin());
    } else {
      out.mae[s + len - 1] = w.mae[len - 1];
    }
    out.cs.push_back(stream.push(expand_votes(one_shot(w.means, options.delta), options.subset)));
  }
  const std::vector<double> tail = stream.flush();
  out.cs.insert(out.cs.end(), tail.begin(), tail.end());
  out.zeta = multi_shot(out.cs, options.confidence_limit);
  return out;
}

CompressionReport compress_windows(const TcnAutoencoder& model, std::span<const Tensor> windows) {
  if (!model.config().bottleneck_enabled) {
    throw ContractError("compression requires a model with the bottleneck enabled");
  }
  if (!model.entropy_tables()) throw ContractError("model carries no entropy tables");
  const EntropyTables& tables = *model.entropy_tables();
  NoGradGuard no_grad;
  CompressionReport r;
  for (const Tensor& x : windows) {
    const Tensor z = model.latent_eval(x);
    std::vector<std::int32_t> symbols;
    for (double v : z.data()) {
      const double c = std::clamp(v, -2147483647.0, 2147483647.0);
      symbols.push_back(static_cast<std::int32_t>(c));
    }
    CodingStats stats;
    Bitstream bs = compress(symbols, tables, &stats);
    const std::vector<std::int32_t> decoded = decompress(bs, tables);
    r.lossless = r.lossless && decoded == symbols;

    std::vector<double> zd(decoded.begin(), decoded.end());
    const Tensor x_dec = model.decode(Tensor({zd.size()}, zd));
    const Tensor x_ref = model.forward_eval(x);
    r.reconstruction_exact = r.reconstruction_exact &&
                             std::equal(x_dec.data().begin(), x_dec.data().end(),
                                        x_ref.data().begin(), x_ref.data().end());

    r.windows += 1;
    r.symbols += stats.symbols;
    r.escapes += stats.escapes;
    r.bytes += bs.bytes.size();
    r.estimated_bits += model.density().rate_bits(z).item();
    r.table_bits += table_code_length_bits(symbols, tables);
    r.streams.push_back(std::move(bs));
  }
  return r;
}

}  // namespace tcnae

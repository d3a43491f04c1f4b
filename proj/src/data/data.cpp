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

#include "tcnae/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tcnae/errors.hpp"
#include "tcnae/rng.hpp"

namespace tcnae {
namespace {

constexpr double kTwoPi = 6.283185307179586;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line,
                       const std::string& what) {
  throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::size_t LabeledSeries::first_anomaly() const {
  const auto it = std::find(labels.begin(), labels.end(), std::uint8_t{1});
  return it == labels.end() ? length() : static_cast<std::size_t>(it - labels.begin());
}

LabeledSeries load_series(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");

  std::string line;
  std::size_t line_no = 0;
  do {
    if (!std::getline(in, line)) fail(path, line_no, "missing header row");
    ++line_no;
  } while (trim(line).empty());

  const std::vector<std::string_view> header = split(line, options.delimiter);
  std::ptrdiff_t ts_col = -1, label_col = -1;
  std::vector<std::size_t> feature_cols;
  LabeledSeries s;
  s.id = path.stem().string();
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name(header[i]);
    if (!options.timestamp_column.empty() && name == options.timestamp_column) {
      ts_col = static_cast<std::ptrdiff_t>(i);
    } else if (!options.label_column.empty() && name == options.label_column) {
      label_col = static_cast<std::ptrdiff_t>(i);
    } else if (std::find(options.ignore_columns.begin(), options.ignore_columns.end(),
                         name) == options.ignore_columns.end()) {
      if (name.empty()) fail(path, line_no, "empty column name at position " + std::to_string(i + 1));
      feature_cols.push_back(i);
      s.feature_names.push_back(name);
    }
  }
  if (!options.timestamp_column.empty() && ts_col < 0) {
    fail(path, line_no, "missing timestamp column '" + options.timestamp_column + "'");
  }
  if (options.require_labels && label_col < 0) {
    fail(path, line_no, "missing label column '" + options.label_column + "'");
  }
  if (feature_cols.empty()) fail(path, line_no, "no feature columns");

  std::vector<std::vector<double>> rows_by_channel(feature_cols.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string_view> cells = split(line, options.delimiter);
    if (cells.size() != header.size()) {
      fail(path, line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                              std::to_string(cells.size()));
    }
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      double v;
      if (!parse_double(cells[feature_cols[f]], v)) {
        fail(path, line_no, "non-numeric value '" + std::string(cells[feature_cols[f]]) +
                                "' in column '" + s.feature_names[f] + "'");
      }
      rows_by_channel[f].push_back(v);
    }
    if (label_col >= 0) {
      double v;
      const std::string_view cell = cells[static_cast<std::size_t>(label_col)];
      if (!parse_double(cell, v) || (v != 0.0 && v != 1.0)) {
        fail(path, line_no, "label '" + std::string(cell) + "' in column '" +
                                options.label_column + "' is not 0 or 1");
      }
      s.labels.push_back(static_cast<std::uint8_t>(v));
    }
    s.timestamps.push_back(ts_col >= 0 ? std::string(cells[static_cast<std::size_t>(ts_col)])
                                       : std::to_string(s.timestamps.size()));
  }
  if (s.timestamps.empty()) fail(path, line_no, "no data rows");
  s.values.reserve(feature_cols.size() * s.timestamps.size());
  for (const auto& ch : rows_by_channel) s.values.insert(s.values.end(), ch.begin(), ch.end());
  return s;
}

std::vector<LabeledSeries> load_directory(const std::filesystem::path& dir,
                                          const CsvOptions& options) {
  if (!std::filesystem::is_directory(dir)) {
    throw ParseError(dir.string() + ": not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ParseError(dir.string() + ": no .csv files");
  std::vector<LabeledSeries> out;
  for (const auto& f : files) {
    out.push_back(load_series(f, options));
    if (out.back().feature_names != out.front().feature_names) {
      throw ParseError(f.string() + ": feature columns differ from " + files.front().string());
    }
  }
  return out;
}

void write_series(const std::filesystem::path& path, const LabeledSeries& series,
                  const CsvOptions& options) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ContractError("cannot write " + path.string());
  out.precision(17);
  const char d = options.delimiter;
  out << (options.timestamp_column.empty() ? "t" : options.timestamp_column);
  for (const auto& name : series.feature_names) out << d << name;
  if (series.labeled()) out << d << options.label_column;
  out << '\n';
  for (std::size_t t = 0; t < series.length(); ++t) {
    out << series.timestamps[t];
    for (std::size_t c = 0; c < series.channels(); ++c) out << d << series.at(c, t);
    if (series.labeled()) out << d << static_cast<int>(series.labels[t]);
    out << '\n';
  }
}

Normalization fit_normalization(std::span<const LabeledSeries> sets) {
  if (sets.empty()) throw ContractError("normalization needs at least one set");
  const std::size_t channels = sets.front().channels();
  Normalization n;
  n.mean.assign(channels, 0.0);
  n.stddev.assign(channels, 0.0);
  std::size_t count = 0;
  for (const auto& s : sets) {
    if (s.channels() != channels) throw DimensionError("sets differ in channel count");
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t t = 0; t < s.length(); ++t) n.mean[c] += s.at(c, t);
    }
    count += s.length();
  }
  for (double& m : n.mean) m /= static_cast<double>(count);
  for (const auto& s : sets) {
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t t = 0; t < s.length(); ++t) {
        const double r = s.at(c, t) - n.mean[c];
        n.stddev[c] += r * r;
      }
    }
  }
  for (std::size_t c = 0; c < channels; ++c) {
    n.stddev[c] = std::sqrt(n.stddev[c] / static_cast<double>(count));
    if (n.stddev[c] < Normalization::kStdFloor) {
      n.stddev[c] = Normalization::kStdFloor;
      n.constant_channels.push_back(c);
    }
  }
  return n;
}

LabeledSeries normalize(const LabeledSeries& series, const Normalization& stats) {
  if (stats.mean.size() != series.channels()) {
    throw DimensionError("normalization has " + std::to_string(stats.mean.size()) +
                         " channels, series has " + std::to_string(series.channels()));
  }
  LabeledSeries out = series;
  const std::size_t n = series.length();
  for (std::size_t c = 0; c < series.channels(); ++c) {
    for (std::size_t t = 0; t < n; ++t) {
      out.values[c * n + t] = (series.values[c * n + t] - stats.mean[c]) / stats.stddev[c];
    }
  }
  return out;
}

Tensor window_at(const LabeledSeries& series, std::size_t offset, std::size_t length) {
  if (offset + length > series.length()) {
    throw ContractError("window [" + std::to_string(offset) + ", " +
                        std::to_string(offset + length) + ") exceeds series length " +
                        std::to_string(series.length()));
  }
  const std::size_t c_count = series.channels(), n = series.length();
  std::vector<double> data(c_count * length);
  for (std::size_t c = 0; c < c_count; ++c) {
    std::copy_n(series.values.begin() + static_cast<std::ptrdiff_t>(c * n + offset), length,
                data.begin() + static_cast<std::ptrdiff_t>(c * length));
  }
  return Tensor({c_count, length}, std::move(data));
}

std::size_t window_count(std::size_t n, std::size_t length, std::size_t stride) {
  if (length == 0 || stride == 0) throw ContractError("window length and stride must be positive");
  if (n < length) {
    throw ContractError("series of length " + std::to_string(n) +
                        " is shorter than the window length " + std::to_string(length));
  }
  return (n - length) / stride + 1;
}

WindowBatch window(const LabeledSeries& series, std::size_t length, std::size_t stride,
                   std::size_t limit) {
  const std::size_t n = std::min(limit, series.length());
  const std::size_t count = window_count(n, length, stride);
  WindowBatch b;
  for (std::size_t i = 0; i < count; ++i) {
    b.windows.push_back(window_at(series, i * stride, length));
    b.set_ids.push_back(series.id);
    b.offsets.push_back(i * stride);
  }
  return b;
}

std::vector<std::size_t> choose_validation_sets(std::span<const LabeledSeries> sets,
                                                std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].has_anomaly()) candidates.push_back(i);
  }
  if (candidates.size() < count) {
    throw ContractError("need " + std::to_string(count) + " validation sets with anomalies, only " +
                        std::to_string(candidates.size()) + " available");
  }
  Rng rng(seed);
  shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(count);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

double CorpusSplit::achieved_fraction() const {
  const std::size_t total = normal_windows + anomalous_windows;
  return total == 0 ? 0.0 : static_cast<double>(anomalous_windows) / static_cast<double>(total);
}

CorpusSplit build_training_corpus(std::span<const LabeledSeries> sets,
                                  std::span<const std::size_t> train_sets,
                                  std::span<const std::size_t> validation_sets,
                                  const CorpusOptions& options) {
  const double p = options.anomaly_fraction;
  if (!(p >= 0.0 && p <= 0.25)) throw ContractError("anomaly fraction must lie in [0, 0.25]");
  for (std::size_t i : train_sets) {
    if (i >= sets.size()) throw ContractError("training set index out of range");
    if (std::find(validation_sets.begin(), validation_sets.end(), i) != validation_sets.end()) {
      throw ContractError("set '" + sets[i].id + "' is both a training and a validation set");
    }
  }
  const std::size_t len = options.window_length;

  CorpusSplit split;
  split.train_sets.assign(train_sets.begin(), train_sets.end());
  split.validation_sets.assign(validation_sets.begin(), validation_sets.end());
  split.anomaly_fraction = p;
  split.seed = options.seed;

  struct Source {
    std::size_t set;
    std::size_t offset;
  };
  std::vector<Source> normal, pool;
  for (std::size_t i : train_sets) {
    const LabeledSeries& s = sets[i];
    const std::size_t prefix = s.first_anomaly();
    if (prefix >= len) {
      const std::size_t count = window_count(prefix, len, options.stride);
      for (std::size_t k = 0; k < count; ++k) normal.push_back({i, k * options.stride});
    }
    if (!s.labeled() || s.length() < len) continue;
    std::vector<std::size_t> cum(s.length() + 1, 0);
    for (std::size_t t = 0; t < s.length(); ++t) cum[t + 1] = cum[t] + s.labels[t];
    for (std::size_t o = 0; o + len <= s.length(); o += options.stride) {
      if (cum[o + len] > cum[o]) pool.push_back({i, o});
    }
  }
  if (normal.empty()) throw ContractError("training sets contain no normal-prefix windows");

  std::size_t n_anom = 0;
  if (p > 0.0) {
    if (pool.empty()) throw ContractError("anomaly fraction > 0 but no anomalous windows are available");
    n_anom = static_cast<std::size_t>(
        std::llround(p * static_cast<double>(normal.size()) / (1.0 - p)));
  }

  Rng rng(options.seed);
  std::vector<std::size_t> pool_order(pool.size());
  std::iota(pool_order.begin(), pool_order.end(), 0);
  shuffle(pool_order.begin(), pool_order.end(), rng);
  std::vector<std::pair<Source, std::uint8_t>> chosen;
  for (const Source& s : normal) chosen.push_back({s, 0});
  for (std::size_t k = 0; k < n_anom; ++k) {
    const std::size_t idx = k < pool.size() ? pool_order[k] : rng.below(pool.size());
    chosen.push_back({pool[idx], 1});
  }
  shuffle(chosen.begin(), chosen.end(), rng);

  split.normal_windows = normal.size();
  split.anomalous_windows = n_anom;
  for (const auto& [src, anomalous] : chosen) {
    split.corpus.windows.push_back(window_at(sets[src.set], src.offset, len));
    split.corpus.set_ids.push_back(sets[src.set].id);
    split.corpus.offsets.push_back(src.offset);
    split.anomalous_origin.push_back(anomalous);
  }
  return split;
}

const char* anomaly_kind_name(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::kLevelShift: return "level_shift";
    case AnomalyKind::kVarianceBurst: return "variance_burst";
    case AnomalyKind::kFrequencyChange: return "frequency_change";
  }
  return "unknown";
}

AnomalyKind parse_anomaly_kind(const std::string& name) {
  for (AnomalyKind k : {AnomalyKind::kLevelShift, AnomalyKind::kVarianceBurst,
                        AnomalyKind::kFrequencyChange}) {
    if (name == anomaly_kind_name(k)) return k;
  }
  throw ConfigError("unknown anomaly kind '" + name + "'");
}

void SynthConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("synth: ") + what);
  };
  require(channels >= 1, "channels must be >= 1");
  require(length >= 1, "length must be >= 1");
  require(clean_sets <= sets, "clean_sets exceeds sets");
  require(sources >= 1, "sources must be >= 1");
  require(min_period > 0.0 && min_period <= max_period, "need 0 < min_period <= max_period");
  require(noise >= 0.0 && std::isfinite(noise), "noise must be finite and >= 0");
  require(anomaly_rate >= 0.0 && anomaly_rate < 1.0, "anomaly_rate must lie in [0, 1)");
  require(onset_min >= 0.0 && onset_min <= onset_max && onset_max <= 1.0,
          "need 0 <= onset_min <= onset_max <= 1");
  require(affected_channels > 0.0 && affected_channels <= 1.0,
          "affected_channels must lie in (0, 1]");
  require(std::isfinite(level_shift) && burst_std >= 0.0 && frequency_factor > 0.0,
          "anomaly magnitudes must be finite and positive");
  require(!kinds.empty(), "kinds must not be empty");
}

std::vector<SynthSet> synth_corpus(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const std::size_t C = config.channels, J = config.sources, N = config.length;

  // Corpus-wide structure shared by every set.
  std::vector<double> freq(J);
  for (double& f : freq) f = 1.0 / rng.uniform(config.min_period, config.max_period);
  std::vector<double> mix(C * J);
  for (double& m : mix) m = rng.normal() / std::sqrt(static_cast<double>(J));
  std::vector<double> offset(C);
  for (double& o : offset) o = rng.normal();

  std::vector<SynthSet> out;
  std::size_t anomalous_index = 0;
  for (std::size_t i = 0; i < config.sets; ++i) {
    Rng set_rng = rng.split();
    SynthSet set;
    LabeledSeries& s = set.series;
    char id[32];
    std::snprintf(id, sizeof id, "synth_%02zu", i);
    s.id = id;
    for (std::size_t c = 0; c < C; ++c) s.feature_names.push_back("ch" + std::to_string(c));
    for (std::size_t t = 0; t < N; ++t) s.timestamps.push_back(std::to_string(t));
    s.labels.assign(N, 0);

    std::vector<double> phase0(J);
    for (double& ph : phase0) ph = set_rng.uniform(0.0, kTwoPi);

    const bool anomalous = i >= config.clean_sets && config.anomaly_rate > 0.0;
    std::size_t onset = N, end = N;
    if (anomalous) {
      set.kind = config.kinds[anomalous_index++ % config.kinds.size()];
      const auto span_len = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(config.anomaly_rate * static_cast<double>(N))));
      onset = static_cast<std::size_t>(
          std::floor(set_rng.uniform(config.onset_min, config.onset_max) * static_cast<double>(N)));
      onset = std::min(onset, N - std::min(span_len, N));
      end = std::min(N, onset + span_len);
      std::fill(s.labels.begin() + static_cast<std::ptrdiff_t>(onset),
                s.labels.begin() + static_cast<std::ptrdiff_t>(end), 1);
      std::vector<std::size_t> channels(C);
      std::iota(channels.begin(), channels.end(), 0);
      shuffle(channels.begin(), channels.end(), set_rng);
      const auto n_aff = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::llround(config.affected_channels * static_cast<double>(C))),
          1, C);
      set.affected.assign(channels.begin(), channels.begin() + static_cast<std::ptrdiff_t>(n_aff));
      std::sort(set.affected.begin(), set.affected.end());
    }

    set.clean.assign(C * N, 0.0);
    s.values.assign(C * N, 0.0);
    for (std::size_t c = 0; c < C; ++c) {
      const bool hit = std::binary_search(set.affected.begin(), set.affected.end(), c);
      double clean_var = 0.0;
      for (std::size_t j = 0; j < J; ++j) clean_var += 0.5 * mix[c * J + j] * mix[c * J + j];
      const double sigma = std::sqrt(clean_var);
      std::vector<double> phase = phase0;
      for (std::size_t t = 0; t < N; ++t) {
        const bool inside = hit && t >= onset && t < end;
        double clean = offset[c], signal = offset[c];
        for (std::size_t j = 0; j < J; ++j) {
          clean += mix[c * J + j] * std::sin(phase0[j] + kTwoPi * freq[j] * static_cast<double>(t));
          signal += mix[c * J + j] * std::sin(phase[j]);
          const double rate = inside && set.kind == AnomalyKind::kFrequencyChange
                                  ? config.frequency_factor
                                  : 1.0;
          phase[j] += kTwoPi * freq[j] * rate;
        }
        if (!(inside && set.kind == AnomalyKind::kFrequencyChange)) signal = clean;
        double v = signal + config.noise * set_rng.normal();
        if (inside && set.kind == AnomalyKind::kLevelShift) v += config.level_shift * sigma;
        if (inside && set.kind == AnomalyKind::kVarianceBurst) {
          v += config.burst_std * sigma * set_rng.normal();
        }
        set.clean[c * N + t] = clean;
        s.values[c * N + t] = v;
      }
    }
    out.push_back(std::move(set));
  }
  return out;
}

}  // namespace tcnae

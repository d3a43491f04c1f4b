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

#include "tcnae/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "tcnae/errors.hpp"
#include "tcnae/hash.hpp"

namespace tcnae {
namespace {

using nlohmann::json;

// Reads one JSON object, tracking which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
  }

  template <class T>
  void opt(const char* key, T& field) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      field = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(name_ + "." + key + ": wrong type (" + j_.at(key).dump() + ")");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(name_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

json synth_to_json(const SynthConfig& s) {
  std::vector<std::string> kinds;
  for (AnomalyKind k : s.kinds) kinds.emplace_back(anomaly_kind_name(k));
  return {{"channels", s.channels},
          {"length", s.length},
          {"sets", s.sets},
          {"clean_sets", s.clean_sets},
          {"sources", s.sources},
          {"min_period", s.min_period},
          {"max_period", s.max_period},
          {"noise", s.noise},
          {"anomaly_rate", s.anomaly_rate},
          {"onset_min", s.onset_min},
          {"onset_max", s.onset_max},
          {"affected_channels", s.affected_channels},
          {"level_shift", s.level_shift},
          {"burst_std", s.burst_std},
          {"frequency_factor", s.frequency_factor},
          {"kinds", kinds}};
}

SynthConfig synth_from_json(const json& j) {
  SynthConfig s;
  Section sec(j, "data.synth");
  sec.opt("channels", s.channels);
  sec.opt("length", s.length);
  sec.opt("sets", s.sets);
  sec.opt("clean_sets", s.clean_sets);
  sec.opt("sources", s.sources);
  sec.opt("min_period", s.min_period);
  sec.opt("max_period", s.max_period);
  sec.opt("noise", s.noise);
  sec.opt("anomaly_rate", s.anomaly_rate);
  sec.opt("onset_min", s.onset_min);
  sec.opt("onset_max", s.onset_max);
  sec.opt("affected_channels", s.affected_channels);
  sec.opt("level_shift", s.level_shift);
  sec.opt("burst_std", s.burst_std);
  sec.opt("frequency_factor", s.frequency_factor);
  std::vector<std::string> kinds;
  sec.opt("kinds", kinds);
  if (j.contains("kinds")) {
    s.kinds.clear();
    for (const auto& k : kinds) s.kinds.push_back(parse_anomaly_kind(k));
  }
  sec.finish();
  s.validate();
  return s;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::ofstream open_csv(const std::filesystem::path& path, const std::string& config_hash) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "# config_hash=" << config_hash << "\n";
  return out;
}

// Runs `fn`, turning precondition failures caused by the data into DataError.
template <class Fn>
auto with_data(Fn&& fn) {
  try {
    return fn();
  } catch (const ContractError& e) {
    throw DataError(e.what());
  } catch (const DimensionError& e) {
    throw DataError(e.what());
  }
}

struct Checkpointed {
  TcnAutoencoder model;
  CheckpointMeta meta;
  Normalization normalization;
};

Checkpointed open_checkpoint(const std::filesystem::path& dir) {
  LoadedCheckpoint c = load_checkpoint(dir);
  Normalization n;
  n.mean = c.meta.feature_mean;
  n.stddev = c.meta.feature_std;
  return {std::move(c.model), std::move(c.meta), std::move(n)};
}

// Series to run a checkpoint on: an explicit file, or the validation sets.
std::vector<LabeledSeries> target_series(const ExperimentConfig& config, const Checkpointed& ck,
                                         const std::optional<std::filesystem::path>& series) {
  std::vector<LabeledSeries> raw;
  if (series) {
    CsvOptions opts = config.data.csv;
    opts.require_labels = false;
    raw.push_back(load_series(*series, opts));
  } else {
    const PreparedData data = prepare_data(config.data, ck.model.config().input_channels);
    for (std::size_t i : data.validation_sets) raw.push_back(data.raw[i]);
  }
  std::vector<LabeledSeries> out;
  for (const LabeledSeries& s : raw) {
    if (s.feature_names != ck.meta.feature_names) {
      throw DataError("series '" + s.id + "' has features that differ from the checkpoint's");
    }
    out.push_back(normalize(s, ck.normalization));
  }
  return out;
}

std::vector<SeriesScores> score_all(const std::vector<LabeledSeries>& sets,
                                    const TcnAutoencoder& model) {
  const Reconstructor rec = model_reconstructor(model);
  ScoringOptions opts;
  opts.window_length = model.config().window_length;
  std::vector<SeriesScores> out;
  for (const LabeledSeries& s : sets) {
    out.push_back(with_data([&] { return one_shot_scores(s, rec, model.normalizer().omega, opts); }));
  }
  return out;
}

std::string fraction_tag(double p) {
  std::ostringstream os;
  os << std::llround(p * 1000.0);
  return os.str();
}

json counts_json(const DetectionCounts& c) {
  json j = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
  try {
    j["f1"] = c.f1();
  } catch (const DegenerateMetricError&) {
    j["f1"] = nullptr;
  }
  return j;
}

}  // namespace

json ExperimentConfig::to_json() const {
  return {
      {"model", tcn_config_to_json(model)},
      {"training",
       {{"lambda1", training.weights.lambda1},
        {"lambda2", training.weights.lambda2},
        {"learning_rate", training.adam.lr},
        {"adam_beta1", training.adam.beta1},
        {"adam_beta2", training.adam.beta2},
        {"adam_eps", training.adam.eps},
        {"batch_size", training.batch_size},
        {"epochs", training.epochs},
        {"seed", training.seed},
        {"keep_best", training.keep_best}}},
      {"data",
       {{"source", data.source},
        {"directory", data.directory.string()},
        {"delimiter", std::string(1, data.csv.delimiter)},
        {"timestamp_column", data.csv.timestamp_column},
        {"label_column", data.csv.label_column},
        {"ignore_columns", data.csv.ignore_columns},
        {"synth", synth_to_json(data.synth)},
        {"synth_seed", data.synth_seed},
        {"anomaly_fraction", data.anomaly_fraction},
        {"split_seed", data.split_seed},
        {"validation_sets", data.validation_sets},
        {"train_stride", data.train_stride}}},
      {"detection",
       {{"delta_min", detection.delta_min},
        {"delta_max", detection.delta_max},
        {"delta_step", detection.delta_step},
        {"delta", detection.delta},
        {"confidence_limit", detection.confidence_limit}}},
      {"sweep",
       {{"anomaly_fractions", sweep.anomaly_fractions},
        {"models", sweep.models},
        {"seeds", sweep.seeds}}},
      {"output", {{"directory", output_dir.string()}}},
  };
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  Section root(j, "config");
  if (const json* m = root.child("model")) c.model = tcn_config_from_json(*m);

  if (const json* t = root.child("training")) {
    Section s(*t, "training");
    s.opt("lambda1", c.training.weights.lambda1);
    s.opt("lambda2", c.training.weights.lambda2);
    s.opt("learning_rate", c.training.adam.lr);
    s.opt("adam_beta1", c.training.adam.beta1);
    s.opt("adam_beta2", c.training.adam.beta2);
    s.opt("adam_eps", c.training.adam.eps);
    s.opt("batch_size", c.training.batch_size);
    s.opt("epochs", c.training.epochs);
    s.opt("seed", c.training.seed);
    s.opt("keep_best", c.training.keep_best);
    s.finish();
  }
  try {
    c.training.weights.validate();
  } catch (const ContractError& e) {
    throw ConfigError(std::string("training: ") + e.what());
  }
  require(c.training.adam.lr > 0.0 && std::isfinite(c.training.adam.lr),
          "training.learning_rate must be positive");
  require(c.training.adam.beta1 >= 0.0 && c.training.adam.beta1 < 1.0 &&
              c.training.adam.beta2 >= 0.0 && c.training.adam.beta2 < 1.0,
          "training: Adam betas must lie in [0, 1)");
  require(c.training.adam.eps > 0.0, "training.adam_eps must be positive");
  require(c.training.batch_size >= 1, "training.batch_size must be >= 1");
  require(c.training.epochs >= 1, "training.epochs must be >= 1");

  if (const json* d = root.child("data")) {
    Section s(*d, "data");
    std::string directory, delimiter = std::string(1, c.data.csv.delimiter);
    s.opt("source", c.data.source);
    s.opt("directory", directory);
    s.opt("delimiter", delimiter);
    s.opt("timestamp_column", c.data.csv.timestamp_column);
    s.opt("label_column", c.data.csv.label_column);
    s.opt("ignore_columns", c.data.csv.ignore_columns);
    if (const json* sy = s.child("synth")) c.data.synth = synth_from_json(*sy);
    s.opt("synth_seed", c.data.synth_seed);
    s.opt("anomaly_fraction", c.data.anomaly_fraction);
    s.opt("split_seed", c.data.split_seed);
    s.opt("validation_sets", c.data.validation_sets);
    s.opt("train_stride", c.data.train_stride);
    s.finish();
    c.data.directory = directory;
    require(delimiter.size() == 1, "data.delimiter must be a single character");
    c.data.csv.delimiter = delimiter[0];
  }
  require(c.data.source == "synth" || c.data.source == "csv",
          "data.source must be \"synth\" or \"csv\"");
  require(c.data.source != "csv" || !c.data.directory.empty(),
          "data.directory is required when data.source is \"csv\"");
  require(c.data.source != "synth" || c.data.synth.channels == c.model.input_channels,
          "data.synth.channels must equal model.input_channels");
  require(c.data.anomaly_fraction >= 0.0 && c.data.anomaly_fraction <= 0.25,
          "data.anomaly_fraction must lie in [0, 0.25]");
  require(c.data.validation_sets >= 1, "data.validation_sets must be >= 1");
  require(c.data.train_stride >= 1, "data.train_stride must be >= 1");

  if (const json* d = root.child("detection")) {
    Section s(*d, "detection");
    s.opt("delta_min", c.detection.delta_min);
    s.opt("delta_max", c.detection.delta_max);
    s.opt("delta_step", c.detection.delta_step);
    s.opt("delta", c.detection.delta);
    s.opt("confidence_limit", c.detection.confidence_limit);
    s.finish();
  }
  try {
    c.detection.grid();
  } catch (const ContractError& e) {
    throw ConfigError(std::string("detection: ") + e.what());
  }
  require(c.detection.delta > 0.0 && std::isfinite(c.detection.delta),
          "detection.delta must be positive");
  require(c.detection.confidence_limit > 0.0 && c.detection.confidence_limit <= 1.0,
          "detection.confidence_limit must lie in (0, 1]");

  if (const json* sw = root.child("sweep")) {
    Section s(*sw, "sweep");
    s.opt("anomaly_fractions", c.sweep.anomaly_fractions);
    s.opt("models", c.sweep.models);
    s.opt("seeds", c.sweep.seeds);
    s.finish();
  }
  for (double p : c.sweep.anomaly_fractions) {
    require(p >= 0.0 && p <= 0.25, "sweep.anomaly_fractions entries must lie in [0, 0.25]");
  }
  for (const auto& m : c.sweep.models) {
    require(m == "rdo" || m == "ae", "sweep.models entries must be \"rdo\" or \"ae\"");
  }
  require(!c.sweep.seeds.empty() && !c.sweep.models.empty() && !c.sweep.anomaly_fractions.empty(),
          "sweep lists must not be empty");

  if (const json* o = root.child("output")) {
    Section s(*o, "output");
    std::string dir = c.output_dir.string();
    s.opt("directory", dir);
    s.finish();
    c.output_dir = dir;
  }
  root.finish();
  return c;
}

std::string ExperimentConfig::hash() const {
  json j = to_json();
  j.erase("output");
  return hex64(fnv1a64(j.dump()));
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

PreparedData prepare_data(const DataConfig& config, std::size_t channels) {
  PreparedData d;
  if (config.source == "csv") {
    d.raw = load_directory(config.directory, config.csv);
  } else {
    for (SynthSet& s : synth_corpus(config.synth, config.synth_seed)) {
      d.raw.push_back(std::move(s.series));
    }
  }
  if (d.raw.front().channels() != channels) {
    throw DataError("data has " + std::to_string(d.raw.front().channels()) +
                    " channels, the model expects " + std::to_string(channels));
  }
  d.validation_sets = with_data(
      [&] { return choose_validation_sets(d.raw, config.validation_sets, config.split_seed); });
  for (std::size_t i = 0; i < d.raw.size(); ++i) {
    if (!std::binary_search(d.validation_sets.begin(), d.validation_sets.end(), i)) {
      d.train_sets.push_back(i);
    }
  }
  if (d.train_sets.empty()) throw DataError("no training sets remain after the validation split");
  std::vector<LabeledSeries> train;
  for (std::size_t i : d.train_sets) train.push_back(d.raw[i]);
  d.normalization = fit_normalization(train);
  for (const LabeledSeries& s : d.raw) d.normalized.push_back(normalize(s, d.normalization));
  return d;
}

json MetricsReport::to_json() const {
  const bool rdo = model_type == "RDO";
  json grid = json::array();
  for (const DeltaPoint& p : sweep.points) grid.push_back({{"delta", p.delta}, {"f1", p.f1}});
  json per_set = json::array();
  for (std::size_t i = 0; i < sweep.per_series_at_best.size(); ++i) {
    json c = counts_json(sweep.per_series_at_best[i]);
    c["set"] = validation_ids.at(i);
    per_set.push_back(c);
  }
  const DetectionCounts& best = sweep.best_point().counts;
  return {{"config_hash", config_hash},
          {"model_type", model_type},
          {"anomaly_pct", anomaly_pct},
          {"lambda1", rdo ? json(lambda1) : json(nullptr)},
          {"lambda2", rdo ? json(lambda2) : json(nullptr)},
          {"channel_width", channel_width},
          {"seed", seed},
          {"best_f1", best_f1()},
          {"best_delta", best_delta()},
          {"tp", best.tp},
          {"fp", best.fp},
          {"fn", best.fn},
          {"per_set", per_set},
          {"delta_sweep", grid},
          {"train_report", train_report}};
}

TrainOutcome run_train(const ExperimentConfig& config, std::ostream& log) {
  const std::string hash = config.hash();
  const std::filesystem::path out = config.output_dir;
  std::filesystem::create_directories(out);
  const PreparedData data = prepare_data(config.data, config.model.input_channels);
  for (std::size_t c : data.normalization.constant_channels) {
    log << "warning: channel '" << data.raw.front().feature_names[c]
        << "' is constant on the training sets; its std was floored\n";
  }

  CorpusOptions co;
  co.window_length = config.model.window_length;
  co.stride = config.data.train_stride;
  co.anomaly_fraction = config.data.anomaly_fraction;
  co.seed = config.data.split_seed;
  const CorpusSplit split = with_data([&] {
    return build_training_corpus(data.normalized, data.train_sets, data.validation_sets, co);
  });
  log << "corpus: " << split.corpus.windows.size() << " windows (" << split.anomalous_windows
      << " anomalous-origin), " << split.train_sets.size() << " training sets\n";

  json windows = json::array();
  for (std::size_t i = 0; i < split.corpus.windows.size(); ++i) {
    windows.push_back({{"set", split.corpus.set_ids[i]},
                       {"offset", split.corpus.offsets[i]},
                       {"anomalous_origin", split.anomalous_origin[i] != 0}});
  }
  auto ids = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::string> v;
    for (std::size_t i : idx) v.push_back(data.raw[i].id);
    return v;
  };
  write_json(out / "corpus.json",
             {{"config_hash", hash},
              {"split_seed", split.seed},
              {"anomaly_fraction", split.anomaly_fraction},
              {"achieved_fraction", split.achieved_fraction()},
              {"normal_windows", split.normal_windows},
              {"anomalous_windows", split.anomalous_windows},
              {"window_length", co.window_length},
              {"stride", co.stride},
              {"train_sets", ids(split.train_sets)},
              {"validation_sets", ids(split.validation_sets)},
              {"normalization",
               {{"features", data.raw.front().feature_names},
                {"mean", data.normalization.mean},
                {"std", data.normalization.stddev}}},
              {"windows", windows}});

  TcnAutoencoder model(config.model, config.training.seed);
  TrainOptions opts = config.training;
  TrainReport report;
  try {
    report = fit(model, split.corpus.windows, opts, [&](const EpochMetrics& m) {
      log << "epoch " << m.epoch << " rate " << m.rate << " distortion " << m.distortion
          << " reconstruction " << m.reconstruction << " total " << m.total << "\n";
    });
  } catch (const TrainingAborted& e) {
    e.report().write_csv(out / "train_report.csv", hash);
    throw;
  }
  report.write_csv(out / "train_report.csv", hash);

  CheckpointMeta meta;
  meta.feature_names = data.raw.front().feature_names;
  meta.feature_mean = data.normalization.mean;
  meta.feature_std = data.normalization.stddev;
  meta.config_hash = hash;
  meta.experiment = config.to_json();
  meta.experiment.erase("output");
  if (config.model.bottleneck_enabled) {
    const LatentSupport support = latent_support(model, split.corpus.windows);
    build_model_entropy_tables(model, support);
    meta.latent_lo = support.lo;
    meta.latent_hi = support.hi;
  }
  const std::filesystem::path ckpt = out / "checkpoint";
  save_checkpoint(model, meta, ckpt);
  log << "checkpoint written to " << ckpt.string() << "\n";
  return {ckpt, report};
}

MetricsReport run_eval(const ExperimentConfig& config,
                       const std::filesystem::path& checkpoint_dir, std::ostream& log) {
  const Checkpointed ck = open_checkpoint(checkpoint_dir);
  const std::vector<LabeledSeries> sets = target_series(config, ck, std::nullopt);
  for (const LabeledSeries& s : sets) {
    if (!s.labeled()) throw DataError("validation set '" + s.id + "' carries no labels");
  }
  const std::vector<SeriesScores> scores = score_all(sets, ck.model);

  MetricsReport r;
  r.config_hash = config.hash();
  r.model_type = ck.model.config().bottleneck_enabled ? "RDO" : "AE";
  r.anomaly_pct = config.data.anomaly_fraction * 100.0;
  r.lambda1 = config.training.weights.lambda1;
  r.lambda2 = config.training.weights.lambda2;
  r.channel_width = ck.model.config().channel_width;
  r.seed = config.training.seed;
  r.sweep = with_data([&] { return sweep_delta(scores, config.detection.grid()); });
  for (const LabeledSeries& s : sets) r.validation_ids.push_back(s.id);
  const std::filesystem::path out = config.output_dir;
  std::filesystem::create_directories(out);
  if (std::filesystem::exists(out / "train_report.csv")) {
    r.train_report = "train_report.csv";
  }

  std::ofstream csv = open_csv(out / "one_shot_scores.csv", r.config_hash);
  csv << "set,t,mae,score,label\n";
  for (const SeriesScores& s : scores) {
    for (std::size_t t = 0; t < s.score.size(); ++t) {
      csv << s.id << ',' << t << ',' << s.mae[t] << ',' << s.score[t] << ','
          << static_cast<int>(s.labels[t]) << '\n';
    }
  }
  write_json(out / "metrics.json", r.to_json());
  log << r.model_type << " best F1 " << r.best_f1() << " at delta " << r.best_delta() << "\n";
  return r;
}

StreamSummary run_stream(const ExperimentConfig& config,
                         const std::filesystem::path& checkpoint_dir,
                         const std::optional<std::filesystem::path>& series,
                         std::optional<double> delta, std::ostream& log) {
  const Checkpointed ck = open_checkpoint(checkpoint_dir);
  const std::vector<LabeledSeries> sets = target_series(config, ck, series);
  const std::vector<SeriesScores> scores = score_all(sets, ck.model);

  StreamSummary summary;
  if (delta) {
    summary.delta = *delta;
  } else if (series) {
    summary.delta = config.detection.delta;
  } else {
    summary.delta = with_data([&] { return sweep_delta(scores, config.detection.grid()); })
                        .best_point()
                        .delta;
  }
  if (!(summary.delta > 0.0)) throw ConfigError("delta must be positive");

  const std::string hash = config.hash();
  const std::filesystem::path out = config.output_dir;
  std::filesystem::create_directories(out);
  const Reconstructor rec = model_reconstructor(ck.model);
  StreamOptions opts;
  opts.window_length = ck.model.config().window_length;
  opts.delta = summary.delta;
  opts.confidence_limit = config.detection.confidence_limit;
  json per_set = json::array();
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const StreamResult r =
        with_data([&] { return stream_series(sets[i], rec, ck.model.normalizer().omega, opts); });
    std::ofstream csv = open_csv(out / ("stream_" + r.id + ".csv"), hash);
    csv << "t,mae,CS,zeta,label\n";
    for (std::size_t t = 0; t < r.cs.size(); ++t) {
      csv << t << ',' << r.mae[t] << ',' << r.cs[t] << ',' << static_cast<int>(r.zeta[t]) << ','
          << (r.labels.empty() ? std::string() : std::to_string(r.labels[t])) << '\n';
    }
    if (!r.labels.empty()) {
      const DetectionCounts multi = count_detections(r.zeta, r.labels);
      const DetectionCounts one = count_detections(threshold(scores[i].score, summary.delta),
                                                   r.labels);
      summary.multi_shot += multi;
      summary.one_shot += one;
      per_set.push_back({{"set", r.id}, {"multi_shot", counts_json(multi)},
                         {"one_shot", counts_json(one)}});
    }
    log << "streamed " << r.id << " (" << r.cs.size() << " samples)\n";
  }
  write_json(out / "stream_metrics.json",
             {{"config_hash", hash},
              {"delta", summary.delta},
              {"confidence_limit", opts.confidence_limit},
              {"multi_shot", counts_json(summary.multi_shot)},
              {"one_shot", counts_json(summary.one_shot)},
              {"per_set", per_set}});
  return summary;
}

CompressionReport run_compress(const ExperimentConfig& config,
                               const std::filesystem::path& checkpoint_dir,
                               const std::optional<std::filesystem::path>& series,
                               std::ostream& log) {
  const Checkpointed ck = open_checkpoint(checkpoint_dir);
  if (!ck.model.config().bottleneck_enabled) {
    throw DataError("checkpoint was trained without a bottleneck; nothing to compress");
  }
  const std::vector<LabeledSeries> sets = target_series(config, ck, series);
  const std::size_t len = ck.model.config().window_length;
  std::vector<Tensor> windows;
  std::vector<std::string> names;
  for (const LabeledSeries& s : sets) {
    const WindowBatch b = with_data([&] { return window(s, len, len); });
    for (std::size_t i = 0; i < b.windows.size(); ++i) {
      windows.push_back(b.windows[i]);
      names.push_back(s.id + "_" + std::to_string(b.offsets[i]));
    }
    if (s.length() % len != 0) {
      windows.push_back(window_at(s, s.length() - len, len));
      names.push_back(s.id + "_" + std::to_string(s.length() - len));
    }
  }
  CompressionReport r = compress_windows(ck.model, windows);

  const std::string hash = config.hash();
  const std::filesystem::path dir = config.output_dir / "bitstreams";
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < r.streams.size(); ++i) {
    std::ofstream f(dir / (names[i] + ".tcnb"), std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(r.streams[i].bytes.data()),
            static_cast<std::streamsize>(r.streams[i].bytes.size()));
  }
  write_json(config.output_dir / "compress.json",
             {{"config_hash", hash},
              {"windows", r.windows},
              {"symbols", r.symbols},
              {"escapes", r.escapes},
              {"bytes", r.bytes},
              {"actual_bits", 8 * r.bytes},
              {"estimated_bits", r.estimated_bits},
              {"table_bits", r.table_bits},
              {"bits_per_window", static_cast<double>(8 * r.bytes) / static_cast<double>(r.windows)},
              {"lossless", r.lossless},
              {"reconstruction_exact", r.reconstruction_exact}});
  log << "compressed " << r.windows << " windows into " << r.bytes << " bytes (estimated "
      << r.estimated_bits / 8.0 << " bytes), " << r.escapes << " escapes\n";
  return r;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, std::ostream& log) {
  std::vector<SweepRow> rows;
  for (const std::string& model : config.sweep.models) {
    for (double p : config.sweep.anomaly_fractions) {
      for (std::uint64_t seed : config.sweep.seeds) {
        SweepRow row{model, p, seed, std::nullopt, {}};
        ExperimentConfig cell = config;
        cell.model.bottleneck_enabled = model == "rdo";
        cell.data.anomaly_fraction = p;
        cell.training.seed = seed;
        cell.output_dir = config.output_dir / "cells" /
                          (model + "_p" + fraction_tag(p) + "_s" + std::to_string(seed));
        log << "cell " << cell.output_dir.filename().string() << "\n";
        try {
          const TrainOutcome t = run_train(cell, log);
          row.metrics = run_eval(cell, t.checkpoint_dir, log);
        } catch (const std::exception& e) {
          row.error = e.what();
          log << "cell failed: " << row.error << "\n";
        }
        rows.push_back(std::move(row));
      }
    }
  }

  std::filesystem::create_directories(config.output_dir);
  std::ofstream csv = open_csv(config.output_dir / "sweep.csv", config.hash());
  csv << "model_type,anomaly_pct,lambda1,lambda2,channel_width,seed,best_f1,best_delta,tp,fp,fn,"
         "config_hash,status\n";
  for (const SweepRow& r : rows) {
    const bool rdo = r.model == "rdo";
    csv << (rdo ? "RDO" : "AE") << ',' << r.anomaly_fraction * 100.0 << ',';
    if (rdo) {
      csv << config.training.weights.lambda1 << ',' << config.training.weights.lambda2;
    } else {
      csv << ',';
    }
    csv << ',' << config.model.channel_width << ',' << r.seed << ',';
    if (r.metrics) {
      const DetectionCounts& c = r.metrics->sweep.best_point().counts;
      csv << r.metrics->best_f1() << ',' << r.metrics->best_delta() << ',' << c.tp << ',' << c.fp
          << ',' << c.fn << ',' << r.metrics->config_hash << ",ok\n";
    } else {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      csv << ",,,,,,failed: " << msg << '\n';
    }
  }
  return rows;
}

void run_synth(const ExperimentConfig& config, std::ostream& log) {
  const std::filesystem::path out = config.output_dir;
  std::filesystem::create_directories(out);
  const std::vector<SynthSet> sets = synth_corpus(config.data.synth, config.data.synth_seed);
  json manifest = json::array();
  for (const SynthSet& s : sets) {
    const std::string file = s.series.id + ".csv";
    write_series(out / file, s.series, config.data.csv);
    const std::size_t onset = s.series.first_anomaly();
    std::size_t end = onset;
    while (end < s.series.length() && s.series.labels[end]) ++end;
    json entry = {{"id", s.series.id}, {"file", file}, {"anomalous", s.series.has_anomaly()}};
    if (s.series.has_anomaly()) {
      entry["kind"] = anomaly_kind_name(s.kind);
      entry["onset"] = onset;
      entry["end"] = end;
      entry["affected_channels"] = s.affected;
    }
    manifest.push_back(entry);
  }
  write_json(out / "synth.json", {{"config_hash", config.hash()},
                                  {"seed", config.data.synth_seed},
                                  {"synth", synth_to_json(config.data.synth)},
                                  {"sets", manifest}});
  log << "wrote " << sets.size() << " synthetic sets to " << out.string() << "\n";
}

}  // namespace tcnae

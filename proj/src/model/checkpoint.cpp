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

#include "tcnae/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "tcnae/errors.hpp"
#include "tcnae/hash.hpp"

namespace tcnae {
namespace {

using nlohmann::json;

constexpr char kBlobMagic[8] = {'T', 'C', 'N', 'A', 'E', 'C', 'K', 'P'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw ParseError("checkpoint blob truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ParseError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

json tables_to_json(const EntropyTables& t) {
  json tables = json::array();
  for (const PmfTable& p : t.tables) {
    tables.push_back({{"offset", p.offset}, {"freq", p.freq}});
  }
  return {{"precision_bits", t.precision_bits},
          {"fingerprint", t.fingerprint()},
          {"tables", tables}};
}

EntropyTables tables_from_json(const json& j) {
  EntropyTables t;
  t.precision_bits = j.at("precision_bits").get<unsigned>();
  for (const json& p : j.at("tables")) {
    t.tables.push_back({p.at("offset").get<std::int32_t>(),
                        p.at("freq").get<std::vector<std::uint32_t>>()});
  }
  if (t.fingerprint() != j.at("fingerprint").get<std::uint32_t>()) {
    throw ParseError("checkpoint entropy tables fail their fingerprint check");
  }
  return t;
}

}  // namespace

json tcn_config_to_json(const TcnConfig& c) {
  return {
      {"input_channels", c.input_channels},
      {"window_length", c.window_length},
      {"blocks", c.blocks},
      {"layers_per_block", c.layers_per_block},
      {"channel_width", c.channel_width},
      {"kernel_width", c.kernel_width},
      {"latent_dim", c.latent_dim},
      {"bottleneck", c.bottleneck_enabled},
      {"density_hidden", c.density.hidden},
      {"density_init_scale", c.density.init_scale},
      {"likelihood_floor", c.density.likelihood_floor},
  };
}

TcnConfig tcn_config_from_json(const json& j) {
  static const std::set<std::string> known = {
      "input_channels", "window_length",   "blocks",
      "layers_per_block", "channel_width", "kernel_width",
      "latent_dim",      "bottleneck",      "density_hidden",
      "density_init_scale", "likelihood_floor", "dilations"};
  if (!j.is_object()) throw ConfigError("model: expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("model: unknown key '" + key + "'");
  }
  TcnConfig c;
  try {
    auto opt = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    opt("input_channels", c.input_channels);
    opt("window_length", c.window_length);
    opt("blocks", c.blocks);
    opt("layers_per_block", c.layers_per_block);
    opt("channel_width", c.channel_width);
    opt("kernel_width", c.kernel_width);
    opt("latent_dim", c.latent_dim);
    opt("bottleneck", c.bottleneck_enabled);
    opt("density_hidden", c.density.hidden);
    opt("density_init_scale", c.density.init_scale);
    opt("likelihood_floor", c.density.likelihood_floor);
    opt("dilations", c.dilations);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  try {
    c.validate();
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

void save_checkpoint(const TcnAutoencoder& model, const CheckpointMeta& meta,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& params = model.parameters();

  std::string blob(kBlobMagic, sizeof(kBlobMagic));
  put<std::uint32_t>(blob, kCheckpointFormatVersion);
  put<std::uint32_t>(blob, static_cast<std::uint32_t>(params.size()));
  json entries = json::array();
  for (const Parameter& p : params) {
    const auto data = p.tensor.data();
    put<std::uint64_t>(blob, data.size());
    entries.push_back({{"name", p.name}, {"shape", p.tensor.shape()}, {"offset", blob.size()}});
    for (double v : data) put<double>(blob, v);
  }

  const ChannelNormalizer& norm = model.normalizer();
  json manifest = {
      {"format_version", kCheckpointFormatVersion},
      {"model", tcn_config_to_json(model.config())},
      {"parameters", entries},
      {"blob_fnv1a64", hex64(fnv1a64(blob))},
      {"normalizer",
       {{"omega", norm.omega},
        {"sigma", norm.sigma},
        {"decay", norm.decay},
        {"initialized", norm.initialized}}},
      {"entropy_tables", model.entropy_tables() ? tables_to_json(*model.entropy_tables())
                                                : json(nullptr)},
      {"latent_support", {{"lo", meta.latent_lo}, {"hi", meta.latent_hi}}},
      {"data_normalization",
       {{"features", meta.feature_names},
        {"mean", meta.feature_mean},
        {"std", meta.feature_std}}},
      {"config_hash", meta.config_hash},
      {"experiment", meta.experiment},
  };
  write_file(dir / "model.bin", blob);
  write_file(dir / "model.json", manifest.dump(2) + "\n");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "model.json"));
  } catch (const json::exception& e) {
    throw ParseError("checkpoint manifest: " + std::string(e.what()));
  }
  const std::string blob = read_file(dir / "model.bin");

  try {
    if (manifest.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw ParseError("checkpoint: unsupported format version");
    }
    if (blob.size() < 16 || std::memcmp(blob.data(), kBlobMagic, 8) != 0) {
      throw ParseError("checkpoint blob: bad magic");
    }
    if (manifest.at("blob_fnv1a64").get<std::string>() != hex64(fnv1a64(blob))) {
      throw ParseError("checkpoint blob does not match its manifest hash");
    }

    TcnAutoencoder model(tcn_config_from_json(manifest.at("model")), 0);
    std::size_t pos = 8;
    if (get<std::uint32_t>(blob, pos) != kCheckpointFormatVersion) {
      throw ParseError("checkpoint blob: unsupported version");
    }
    const auto count = get<std::uint32_t>(blob, pos);
    auto& params = model.parameters();
    const json& entries = manifest.at("parameters");
    if (count != params.size() || entries.size() != params.size()) {
      throw ParseError("checkpoint: parameter count does not match the architecture");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (entries[i].at("name").get<std::string>() != params[i].name ||
          entries[i].at("shape").get<Shape>() != params[i].tensor.shape()) {
        throw ParseError("checkpoint: parameter " + std::to_string(i) + " ('" +
                         params[i].name + "') does not match the manifest");
      }
      const auto n = get<std::uint64_t>(blob, pos);
      auto dst = params[i].tensor.mutable_data();
      if (n != dst.size()) throw ParseError("checkpoint: size mismatch for " + params[i].name);
      if (entries[i].at("offset").get<std::size_t>() != pos) {
        throw ParseError("checkpoint: offset mismatch for " + params[i].name);
      }
      for (double& v : dst) v = get<double>(blob, pos);
    }
    if (pos != blob.size()) throw ParseError("checkpoint blob has trailing bytes");

    const json& norm = manifest.at("normalizer");
    ChannelNormalizer& cn = model.normalizer();
    cn.omega = norm.at("omega").get<std::vector<double>>();
    cn.sigma = norm.at("sigma").get<std::vector<double>>();
    cn.decay = norm.at("decay").get<double>();
    cn.initialized = norm.at("initialized").get<bool>();
    if (!manifest.at("entropy_tables").is_null()) {
      model.set_entropy_tables(tables_from_json(manifest.at("entropy_tables")));
    }

    CheckpointMeta meta;
    const json& dn = manifest.at("data_normalization");
    meta.feature_names = dn.at("features").get<std::vector<std::string>>();
    meta.feature_mean = dn.at("mean").get<std::vector<double>>();
    meta.feature_std = dn.at("std").get<std::vector<double>>();
    meta.latent_lo = manifest.at("latent_support").at("lo").get<std::vector<std::int32_t>>();
    meta.latent_hi = manifest.at("latent_support").at("hi").get<std::vector<std::int32_t>>();
    meta.config_hash = manifest.at("config_hash").get<std::string>();
    meta.experiment = manifest.at("experiment");
    return {std::move(model), std::move(meta)};
  } catch (const json::exception& e) {
    throw ParseError("checkpoint manifest: " + std::string(e.what()));
  }
}

}  // namespace tcnae

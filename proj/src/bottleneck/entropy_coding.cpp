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

#include "tcnae/entropy_coding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tcnae/errors.hpp"
#include "tcnae/range_coder.hpp"

namespace tcnae {
namespace {

constexpr std::uint8_t kMagic[4] = {'T', 'C', 'N', 'B'};

void fnv_mix(std::uint32_t& h, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    h ^= (v >> (8 * i)) & 0xFFu;
    h *= 16777619u;
  }
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

std::uint32_t zigzag(std::int32_t v) {
  return (static_cast<std::uint32_t>(v) << 1) ^ static_cast<std::uint32_t>(v >> 31);
}

std::int32_t unzigzag(std::uint32_t v) {
  return static_cast<std::int32_t>((v >> 1) ^ (0u - (v & 1u)));
}

void validate(const EntropyTables& tables) {
  if (tables.tables.empty() || tables.tables.size() > 0xFFFF) {
    throw ContractError("entropy tables: need between 1 and 65535 tables");
  }
  if (tables.precision_bits < 1 || tables.precision_bits > 16) {
    throw ContractError("entropy tables: precision must be in [1, 16]");
  }
  const std::uint64_t total = 1ull << tables.precision_bits;
  for (const PmfTable& t : tables.tables) {
    if (t.freq.size() < 2) throw ContractError("entropy table without support");
    std::uint64_t s = 0;
    for (std::uint32_t f : t.freq) {
      if (f == 0) throw ContractError("entropy table has a zero frequency");
      s += f;
    }
    if (s != total) throw ContractError("entropy table does not sum to 2^precision");
  }
}

std::vector<std::vector<std::uint32_t>> cumulative_tables(const EntropyTables& tables) {
  std::vector<std::vector<std::uint32_t>> cum;
  cum.reserve(tables.tables.size());
  for (const PmfTable& t : tables.tables) {
    std::vector<std::uint32_t> c(t.freq.size() + 1, 0);
    std::partial_sum(t.freq.begin(), t.freq.end(), c.begin() + 1);
    cum.push_back(std::move(c));
  }
  return cum;
}

}  // namespace

std::uint32_t EntropyTables::fingerprint() const {
  std::uint32_t h = 2166136261u;
  fnv_mix(h, precision_bits);
  fnv_mix(h, static_cast<std::uint32_t>(tables.size()));
  for (const PmfTable& t : tables) {
    fnv_mix(h, static_cast<std::uint32_t>(t.offset));
    fnv_mix(h, static_cast<std::uint32_t>(t.freq.size()));
    for (std::uint32_t f : t.freq) fnv_mix(h, f);
  }
  return h;
}

std::vector<std::uint32_t> quantize_pmf(std::span<const double> probs,
                                        unsigned precision_bits) {
  const std::int64_t total = std::int64_t{1} << precision_bits;
  if (probs.empty() || static_cast<std::int64_t>(probs.size()) > total) {
    throw ContractError("quantize_pmf: support does not fit the precision");
  }
  double mass = 0.0;
  for (double p : probs) mass += std::max(p, 0.0);
  std::vector<std::int64_t> freq(probs.size());
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = mass > 0.0 ? std::max(probs[i], 0.0) / mass : 1.0 / probs.size();
    freq[i] = std::max<std::int64_t>(1, std::llround(p * static_cast<double>(total)));
    sum += freq[i];
  }
  // Settle the rounding residue on the largest entries, never below 1.
  std::vector<std::size_t> order(freq.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return freq[a] > freq[b]; });
  std::int64_t diff = total - sum;
  for (std::size_t i = 0; diff != 0; i = (i + 1) % order.size()) {
    std::int64_t& f = freq[order[i]];
    if (diff > 0) {
      f += diff;
      diff = 0;
    } else {
      const std::int64_t take = std::min(-diff, f - 1);
      f -= take;
      diff += take;
    }
  }
  return {freq.begin(), freq.end()};
}

EntropyTables build_entropy_tables(const FactorizedDensity& density,
                                   std::span<const std::int32_t> lo,
                                   std::span<const std::int32_t> hi,
                                   unsigned precision_bits) {
  if (lo.size() != density.dims() || hi.size() != density.dims()) {
    throw DimensionError("entropy tables: support bounds must match latent dims");
  }
  EntropyTables out;
  out.precision_bits = precision_bits;
  for (std::size_t d = 0; d < density.dims(); ++d) {
    if (hi[d] < lo[d]) throw ContractError("entropy tables: empty support");
    const auto support = static_cast<std::size_t>(hi[d] - lo[d]) + 1;
    if (support > kMaxSupport) {
      throw ContractError("entropy tables: support of " + std::to_string(support) +
                          " exceeds " + std::to_string(kMaxSupport));
    }
    std::vector<double> probs(support + 1);
    double mass = 0.0;
    for (std::size_t i = 0; i < support; ++i) {
      probs[i] = density.pmf(lo[d] + static_cast<std::int64_t>(i), d);
      mass += probs[i];
    }
    probs[support] = std::max(0.0, 1.0 - mass);
    out.tables.push_back({lo[d], quantize_pmf(probs, precision_bits)});
  }
  return out;
}

Bitstream compress(std::span<const std::int32_t> symbols,
                   const EntropyTables& tables, CodingStats* stats) {
  validate(tables);
  const auto cum = cumulative_tables(tables);
  const unsigned bits = tables.precision_bits;
  const std::size_t dims = tables.tables.size();
  RangeEncoder enc;
  CodingStats local;
  for (std::size_t j = 0; j < symbols.size(); ++j) {
    const PmfTable& t = tables.tables[j % dims];
    const auto& c = cum[j % dims];
    const std::int64_t idx = static_cast<std::int64_t>(symbols[j]) - t.offset;
    const std::size_t support = t.support();
    if (idx >= 0 && idx < static_cast<std::int64_t>(support)) {
      enc.encode(c[idx], t.freq[idx], bits);
    } else {
      enc.encode(c[support], t.freq[support], bits);
      const std::uint32_t raw = zigzag(symbols[j]);
      enc.encode(raw & 0xFFFFu, 1, 16);
      enc.encode(raw >> 16, 1, 16);
      ++local.escapes;
    }
  }
  local.symbols = symbols.size();
  if (symbols.size() > 0xFFFFFFFFull) throw ContractError("too many symbols");

  Bitstream out;
  out.bytes.assign(std::begin(kMagic), std::end(kMagic));
  out.bytes.push_back(kBitstreamVersion);
  out.bytes.push_back(static_cast<std::uint8_t>(bits));
  put_u16(out.bytes, static_cast<std::uint16_t>(dims));
  put_u32(out.bytes, static_cast<std::uint32_t>(symbols.size()));
  put_u32(out.bytes, tables.fingerprint());
  const auto payload = enc.finish();
  out.bytes.insert(out.bytes.end(), payload.begin(), payload.end());
  if (stats) *stats = local;
  return out;
}

std::vector<std::int32_t> decompress(const Bitstream& stream,
                                     const EntropyTables& tables) {
  validate(tables);
  const std::span<const std::uint8_t> in(stream.bytes);
  if (in.size() < kBitstreamHeaderBytes || !std::equal(kMagic, kMagic + 4, in.begin())) {
    throw ContractError("bitstream: bad magic");
  }
  if (in[4] != kBitstreamVersion) throw ContractError("bitstream: unsupported version");
  const unsigned bits = in[5];
  const std::size_t dims = static_cast<std::size_t>(in[6]) | (static_cast<std::size_t>(in[7]) << 8);
  const std::uint32_t count = get_u32(in, 8);
  const std::uint32_t fp = get_u32(in, 12);
  if (bits != tables.precision_bits || dims != tables.tables.size() ||
      fp != tables.fingerprint()) {
    throw ContractError("bitstream: table set does not match the stream header");
  }

  const auto cum = cumulative_tables(tables);
  RangeDecoder dec(in.subspan(kBitstreamHeaderBytes));
  std::vector<std::int32_t> out;
  out.reserve(count);
  for (std::uint32_t j = 0; j < count; ++j) {
    const PmfTable& t = tables.tables[j % dims];
    const auto& c = cum[j % dims];
    const std::uint32_t target = dec.peek(bits);
    const auto it = std::upper_bound(c.begin(), c.end(), target);
    const auto idx = static_cast<std::size_t>(it - c.begin()) - 1;
    dec.consume(c[idx], t.freq[idx]);
    if (idx < t.support()) {
      out.push_back(t.offset + static_cast<std::int32_t>(idx));
    } else {
      const std::uint32_t lo16 = dec.peek(16);
      dec.consume(lo16, 1);
      const std::uint32_t hi16 = dec.peek(16);
      dec.consume(hi16, 1);
      out.push_back(unzigzag(lo16 | (hi16 << 16)));
    }
  }
  return out;
}

double table_code_length_bits(std::span<const std::int32_t> symbols,
                              const EntropyTables& tables) {
  validate(tables);
  const double total = std::ldexp(1.0, static_cast<int>(tables.precision_bits));
  const std::size_t dims = tables.tables.size();
  double bits = 0.0;
  for (std::size_t j = 0; j < symbols.size(); ++j) {
    const PmfTable& t = tables.tables[j % dims];
    const std::int64_t idx = static_cast<std::int64_t>(symbols[j]) - t.offset;
    if (idx >= 0 && idx < static_cast<std::int64_t>(t.support())) {
      bits -= std::log2(t.freq[idx] / total);
    } else {
      bits -= std::log2(t.freq[t.support()] / total);
      bits += 32.0;
    }
  }
  return bits;
}

}  // namespace tcnae

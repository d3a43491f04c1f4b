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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tcnae/density.hpp"

namespace tcnae {

// Quantized probability table for one latent dimension. Symbols
// offset .. offset + support - 1 are coded directly; everything else goes
// through the trailing escape entry followed by a raw 32-bit value.
struct PmfTable {
  std::int32_t offset = 0;
  std::vector<std::uint32_t> freq;  // support entries + 1 escape entry

  std::size_t support() const { return freq.empty() ? 0 : freq.size() - 1; }
  bool operator==(const PmfTable&) const = default;
};

struct EntropyTables {
  unsigned precision_bits = 16;
  std::vector<PmfTable> tables;  // table id == latent dimension

  // FNV-1a over precision, offsets and frequencies.
  std::uint32_t fingerprint() const;
  bool operator==(const EntropyTables&) const = default;
};

// Largest accepted support per dimension.
inline constexpr std::size_t kMaxSupport = 4096;

// Tabulates the density over [lo[d], hi[d]] per dimension. The escape entry
// receives the remaining tail mass; every entry gets frequency >= 1.
EntropyTables build_entropy_tables(const FactorizedDensity& density,
                                   std::span<const std::int32_t> lo,
                                   std::span<const std::int32_t> hi,
                                   unsigned precision_bits = 16);

// Quantizes a probability vector (support + escape) to integer frequencies
// summing to exactly 2^precision_bits, each >= 1.
std::vector<std::uint32_t> quantize_pmf(std::span<const double> probs,
                                        unsigned precision_bits);

struct CodingStats {
  std::size_t symbols = 0;
  std::size_t escapes = 0;
};

// Byte-exact container; see docs/formats.md.
//
//   offset size  field
//   0      4     magic "TCNB"
//   4      1     format version (1)
//   5      1     precision bits
//   6      2     dims: symbol j is coded with table id (j mod dims)
//   8      4     symbol count
//   12     4     fingerprint of the table set
//   16     ...   range-coder payload
//
// All integers little-endian.
struct Bitstream {
  std::vector<std::uint8_t> bytes;
};

inline constexpr std::uint8_t kBitstreamVersion = 1;
inline constexpr std::size_t kBitstreamHeaderBytes = 16;

Bitstream compress(std::span<const std::int32_t> symbols,
                   const EntropyTables& tables, CodingStats* stats = nullptr);
std::vector<std::int32_t> decompress(const Bitstream& stream,
                                     const EntropyTables& tables);

// Ideal code length in bits of `symbols` under the quantized tables.
double table_code_length_bits(std::span<const std::int32_t> symbols,
                              const EntropyTables& tables);

}  // namespace tcnae

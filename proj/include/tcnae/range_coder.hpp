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

namespace tcnae {

// Carry-propagating byte-oriented range coder with a 32-bit range and a
// 33-bit low register. Symbols are coded against cumulative frequency
// tables whose total is exactly 2^precision_bits (precision_bits <= 16).
class RangeEncoder {
 public:
  void encode(std::uint32_t cum, std::uint32_t freq, unsigned precision_bits);
  // Flushes the coder state and returns the payload. The encoder must not be
  // used afterwards.
  std::vector<std::uint8_t> finish();

 private:
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> payload);

  // Scaled target in [0, 2^precision_bits); look it up in the cumulative
  // table, then call consume() with that symbol's (cum, freq).
  std::uint32_t peek(unsigned precision_bits);
  void consume(std::uint32_t cum, std::uint32_t freq);

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t step_ = 0;
};

}  // namespace tcnae

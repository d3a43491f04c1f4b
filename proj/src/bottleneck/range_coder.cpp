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

#include "tcnae/range_coder.hpp"

#include "tcnae/errors.hpp"

namespace tcnae {
namespace {

constexpr std::uint32_t kTop = 1u << 24;

}  // namespace

void RangeEncoder::encode(std::uint32_t cum, std::uint32_t freq,
                          unsigned precision_bits) {
  if (freq == 0 || precision_bits > 16 ||
      static_cast<std::uint64_t>(cum) + freq > (1ull << precision_bits)) {
    throw ContractError("range coder: invalid symbol interval");
  }
  const std::uint32_t r = range_ >> precision_bits;
  low_ += static_cast<std::uint64_t>(r) * cum;
  range_ = r * freq;
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::shift_low() {
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t temp = cache_;
    do {
      out_.push_back(static_cast<std::uint8_t>(temp + carry));
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> payload) : in_(payload) {
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  return pos_ < in_.size() ? in_[pos_++] : 0;
}

std::uint32_t RangeDecoder::peek(unsigned precision_bits) {
  step_ = range_ >> precision_bits;
  const std::uint32_t v = code_ / step_;
  const std::uint32_t limit = (1u << precision_bits) - 1;
  return v > limit ? limit : v;
}

void RangeDecoder::consume(std::uint32_t cum, std::uint32_t freq) {
  code_ -= step_ * cum;
  range_ = step_ * freq;
  while (range_ < kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

}  // namespace tcnae

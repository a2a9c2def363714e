// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/entropy/range_coder.hpp"

namespace jcif::entropy {

namespace {
constexpr std::uint32_t kTop = 1u << 24;
}

void RangeEncoder::encode(std::uint32_t start, std::uint32_t size, unsigned total_bits) {
  const std::uint32_t r = range_ >> total_bits;
  low_ += static_cast<std::uint64_t>(r) * start;
  range_ = r * size;
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::shift_low() {
  if (low_ < 0xFF000000ULL || low_ >= (1ULL << 32)) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t pending = cache_;
    do {
      if (first_) {
        first_ = false;  // always zero: the interval never leaves [0, 2^32)
      } else {
        out_.push_back(static_cast<std::uint8_t>(pending + carry));
      }
      pending = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFULL) << 8;
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> payload) : in_(payload) {
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  if (pos_ < in_.size()) return in_[pos_++];
  ++overrun_;
  return 0;
}

std::uint32_t RangeDecoder::peek(unsigned total_bits) {
  step_ = range_ >> total_bits;
  const std::uint32_t limit = (1u << total_bits) - 1;
  const std::uint32_t value = step_ == 0 ? limit : code_ / step_;
  return value > limit ? limit : value;
}

void RangeDecoder::consume(std::uint32_t start, std::uint32_t size) {
  code_ -= step_ * start;
  range_ = step_ * size;
  while (range_ < kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

}  // namespace jcif::entropy

// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace jcif::entropy {

// 32-bit range coder with carry propagation (LZMA-style cache/carry scheme).
// All state is integer, so output is identical on every platform. The
// leading byte that such coders always emit as zero is omitted.
class RangeEncoder {
 public:
  // Codes the interval [start, start + size) out of 2^total_bits.
  void encode(std::uint32_t start, std::uint32_t size, unsigned total_bits);
  // Terminates the stream and returns the payload.
  std::vector<std::uint8_t> finish();

 private:
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  bool first_ = true;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> payload);

  // Returns the target cumulative frequency; call consume() with the
  // interval of the symbol that contains it.
  std::uint32_t peek(unsigned total_bits);
  void consume(std::uint32_t start, std::uint32_t size);

  // True once the decoder has needed bytes beyond the end of the payload
  // (beyond the padding a well-formed stream can require).
  bool overran() const { return overrun_ > 4; }

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t step_ = 0;
  std::size_t overrun_ = 0;
};

}  // namespace jcif::entropy

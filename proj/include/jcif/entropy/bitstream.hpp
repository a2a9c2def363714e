// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "jcif/common/byte_io.hpp"
#include "jcif/entropy/symbol_model.hpp"

namespace jcif::entropy {

enum class StreamKind : std::uint8_t { kLatent = 0, kHyper = 1 };

inline constexpr std::uint8_t kBitstreamVersion = 1;

// Serialized layout (little-endian):
//   "JCIF" | u8 version | u8 kind | u32 shape[4] | i16 lo | i16 hi
//   | u64 payload bit count | payload bytes
struct Bitstream {
  StreamKind kind = StreamKind::kLatent;
  std::array<std::uint32_t, 4> shape{};
  std::int16_t lo = -127;
  std::int16_t hi = 127;
  std::uint64_t payload_bits = 0;
  std::vector<std::uint8_t> payload;

  std::size_t symbol_count() const;
  bool operator==(const Bitstream&) const = default;
};

void append_bitstream(ByteWriter& out, const Bitstream& stream);
Bitstream read_bitstream(ByteReader& in);

using ModelLookup = std::function<const SymbolModel&(std::size_t index)>;

// Codes symbols[i] under models(i). Out-of-window symbols take the escape
// entry followed by their raw 32-bit two's-complement value. The header
// fields other than payload are taken from `header`.
Bitstream arith_encode(std::span<const std::int32_t> symbols, const ModelLookup& models,
                       const Bitstream& header);
Bitstream arith_encode(std::span<const std::int32_t> symbols, std::span<const SymbolModel> models,
                       const Bitstream& header);

// Decodes stream.symbol_count() symbols. The models must be bit-identical to
// those used for encoding; a mismatch cannot be detected and yields garbage.
std::vector<std::int32_t> arith_decode(const Bitstream& stream, const ModelLookup& models);
std::vector<std::int32_t> arith_decode(const Bitstream& stream, std::span<const SymbolModel> models);

}  // namespace jcif::entropy

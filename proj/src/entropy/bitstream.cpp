// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/entropy/bitstream.hpp"

#include "jcif/common/error.hpp"
#include "jcif/entropy/range_coder.hpp"

namespace jcif::entropy {

std::size_t Bitstream::symbol_count() const {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

void append_bitstream(ByteWriter& out, const Bitstream& stream) {
  if (stream.payload_bits != 8ULL * stream.payload.size()) {
    throw FormatError("bitstream payload bit count does not match payload bytes");
  }
  out.text("JCIF");
  out.u8(kBitstreamVersion);
  out.u8(static_cast<std::uint8_t>(stream.kind));
  for (auto e : stream.shape) out.u32(e);
  out.i16(stream.lo);
  out.i16(stream.hi);
  out.u64(stream.payload_bits);
  out.raw(stream.payload);
}

Bitstream read_bitstream(ByteReader& in) {
  in.expect_magic("JCIF", "bitstream");
  const auto version = in.u8();
  if (version != kBitstreamVersion) {
    throw FormatError("bitstream: unsupported version " + std::to_string(version));
  }
  Bitstream s;
  const auto kind = in.u8();
  if (kind > 1) throw FormatError("bitstream: unknown stream kind " + std::to_string(kind));
  s.kind = static_cast<StreamKind>(kind);
  for (auto& e : s.shape) e = in.u32();
  s.lo = in.i16();
  s.hi = in.i16();
  if (s.hi < s.lo) throw FormatError("bitstream: empty support window");
  s.payload_bits = in.u64();
  if (s.payload_bits % 8 != 0 || s.payload_bits / 8 > in.remaining()) {
    throw FormatError("bitstream: payload truncated or malformed bit count");
  }
  const auto bytes = in.raw(static_cast<std::size_t>(s.payload_bits / 8));
  s.payload.assign(bytes.begin(), bytes.end());
  return s;
}

Bitstream arith_encode(std::span<const std::int32_t> symbols, const ModelLookup& models,
                       const Bitstream& header) {
  Bitstream out = header;
  if (symbols.size() != header.symbol_count()) {
    throw ConfigError("arith_encode: symbol count " + std::to_string(symbols.size()) +
                      " does not match header shape");
  }
  out.payload.clear();
  out.payload_bits = 0;
  if (symbols.empty()) return out;

  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const SymbolModel& m = models(i);
    const int s = symbols[i];
    if (m.in_window(s)) {
      const auto e = static_cast<std::size_t>(s - m.lo());
      enc.encode(m.cumulative(e), m.frequency(e), kFrequencyBits);
    } else {
      if (!m.has_escape()) {
        throw ConfigError("arith_encode: symbol " + std::to_string(s) +
                          " outside window of a model without escape");
      }
      const auto e = m.escape_entry();
      enc.encode(m.cumulative(e), m.frequency(e), kFrequencyBits);
      const auto raw = static_cast<std::uint32_t>(s);
      enc.encode(raw >> 16, 1, 16);
      enc.encode(raw & 0xFFFFu, 1, 16);
    }
  }
  out.payload = enc.finish();
  out.payload_bits = 8ULL * out.payload.size();
  return out;
}

Bitstream arith_encode(std::span<const std::int32_t> symbols, std::span<const SymbolModel> models,
                       const Bitstream& header) {
  if (models.size() != symbols.size()) throw ConfigError("arith_encode: one model per symbol required");
  return arith_encode(symbols, [&](std::size_t i) -> const SymbolModel& { return models[i]; }, header);
}

std::vector<std::int32_t> arith_decode(const Bitstream& stream, const ModelLookup& models) {
  const std::size_t n = stream.symbol_count();
  std::vector<std::int32_t> out;
  if (n == 0 || stream.payload.empty()) {
    if (n != 0) throw FormatError("arith_decode: empty payload for non-empty shape");
    return out;
  }
  out.reserve(n);
  RangeDecoder dec(stream.payload);
  for (std::size_t i = 0; i < n; ++i) {
    const SymbolModel& m = models(i);
    const std::size_t e = m.find(dec.peek(kFrequencyBits));
    dec.consume(m.cumulative(e), m.frequency(e));
    if (m.has_escape() && e == m.escape_entry()) {
      const std::uint32_t hi = dec.peek(16);
      dec.consume(hi, 1);
      const std::uint32_t lo = dec.peek(16);
      dec.consume(lo, 1);
      out.push_back(static_cast<std::int32_t>((hi << 16) | lo));
    } else {
      out.push_back(m.lo() + static_cast<int>(e));
    }
    if (dec.overran()) throw FormatError("arith_decode: payload exhausted before all symbols");
  }
  return out;
}

std::vector<std::int32_t> arith_decode(const Bitstream& stream, std::span<const SymbolModel> models) {
  if (models.size() != stream.symbol_count()) {
    throw ConfigError("arith_decode: one model per symbol required");
  }
  return arith_decode(stream, [&](std::size_t i) -> const SymbolModel& { return models[i]; });
}

}  // namespace jcif::entropy

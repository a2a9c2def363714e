// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/retrieval/hash_table.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstring>

#include "jcif/common/error.hpp"

namespace jcif::retrieval {

namespace {

void check_code_bits(std::size_t q) {
  if (q == 0 || q % 8 != 0 || q > 65535) {
    throw ConfigError("hash code length must be a positive multiple of 8 (got " + std::to_string(q) + ")");
  }
}

struct Candidate {
  unsigned distance;
  ImageId id;
  bool operator<(const Candidate& o) const { return distance != o.distance ? distance < o.distance : id < o.id; }
};

void flip(PackedCode& key, std::size_t bit) { key[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8)); }

}  // namespace

PackedCode pack_code(const HashCode& code) {
  check_code_bits(code.size());
  PackedCode out(code.size() / 8, 0);
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (code[i] == 1) {
      out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    } else if (code[i] != -1) {
      throw ConfigError("hash code components must be -1 or +1");
    }
  }
  return out;
}

HashCode unpack_code(std::span<const std::uint8_t> packed, std::size_t code_bits) {
  check_code_bits(code_bits);
  if (packed.size() * 8 != code_bits) throw FormatError("packed code length does not match code length");
  HashCode out(code_bits);
  for (std::size_t i = 0; i < code_bits; ++i) out[i] = (packed[i / 8] >> (i % 8)) & 1u ? 1 : -1;
  return out;
}

unsigned hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw ShapeError("hamming: codes differ in length");
  unsigned d = 0;
  std::size_t i = 0;
  for (; i + 8 <= a.size(); i += 8) {
    std::uint64_t x, y;
    std::memcpy(&x, a.data() + i, 8);
    std::memcpy(&y, b.data() + i, 8);
    d += static_cast<unsigned>(std::popcount(x ^ y));
  }
  for (; i < a.size(); ++i) d += static_cast<unsigned>(std::popcount(static_cast<unsigned>(a[i] ^ b[i])));
  return d;
}

HashTable::HashTable(std::size_t code_bits) : code_bits_(code_bits) { check_code_bits(code_bits); }

void HashTable::insert(ImageId id, PackedCode key) {
  if (key.size() * 8 != code_bits_) throw ShapeError("hash table: key length does not match code length");
  buckets_[std::move(key)].push_back(id);
  ++size_;
}

HashTable HashTable::build(std::size_t code_bits, std::span<const std::pair<ImageId, HashCode>> codes) {
  std::vector<std::pair<ImageId, PackedCode>> packed;
  packed.reserve(codes.size());
  for (const auto& [id, code] : codes) {
    if (code.size() != code_bits) throw ShapeError("hash table: code length does not match table");
    packed.emplace_back(id, pack_code(code));
  }
  return build_packed(code_bits, packed);
}

HashTable HashTable::build_packed(std::size_t code_bits, std::span<const std::pair<ImageId, PackedCode>> codes) {
  HashTable t(code_bits);
  std::vector<ImageId> ids;
  ids.reserve(codes.size());
  for (const auto& [id, key] : codes) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw ConfigError("hash table: duplicate image id " + std::to_string(*std::adjacent_find(ids.begin(), ids.end())));
  }
  for (const auto& [id, key] : codes) t.insert(id, key);
  for (auto& [key, bucket] : t.buckets_) std::sort(bucket.begin(), bucket.end());
  return t;
}

RetrievalResult HashTable::query(const HashCode& code, std::size_t top_k) const {
  if (code.size() != code_bits_) throw ShapeError("query: code length does not match table");
  return query_packed(pack_code(code), top_k);
}

RetrievalResult HashTable::query_packed(const PackedCode& key, std::size_t top_k) const {
  const auto start = std::chrono::steady_clock::now();
  if (top_k == 0) throw ConfigError("query: top_k must be at least 1");
  if (key.size() * 8 != code_bits_) throw ShapeError("query: code length does not match table");

  std::vector<Candidate> found;
  auto take = [&](const PackedCode& probe, unsigned r) {
    auto it = buckets_.find(probe);
    if (it == buckets_.end()) return;
    for (ImageId id : it->second) found.push_back({r, id});
  };

  PackedCode probe = key;
  unsigned radius = 0;
  take(probe, 0);
  if (found.size() < top_k && kProbeRadius >= 1) {
    radius = 1;
    for (std::size_t i = 0; i < code_bits_; ++i) {
      flip(probe, i);
      take(probe, 1);
      flip(probe, i);
    }
  }
  if (found.size() < top_k && kProbeRadius >= 2) {
    radius = 2;
    for (std::size_t i = 0; i < code_bits_; ++i) {
      flip(probe, i);
      for (std::size_t j = i + 1; j < code_bits_; ++j) {
        flip(probe, j);
        take(probe, 2);
        flip(probe, j);
      }
      flip(probe, i);
    }
  }
  if (found.size() < top_k) {
    for (const auto& [bucket_key, ids] : buckets_) {
      const unsigned d = hamming(bucket_key, key);
      if (d <= radius) continue;
      for (ImageId id : ids) found.push_back({d, id});
    }
  }

  const std::size_t n = std::min(top_k, found.size());
  std::partial_sort(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(n), found.end());
  RetrievalResult r;
  r.ids.reserve(n);
  r.distances.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.ids.push_back(found[i].id);
    r.distances.push_back(found[i].distance);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void append_index(ByteWriter& out, const HashTable& table) {
  out.text("JCIX");
  out.u8(kIndexVersion);
  out.u16(static_cast<std::uint16_t>(table.code_bits()));
  out.u64(table.bucket_count());
  for (const auto& [key, ids] : table.buckets()) {
    out.raw(key);
    out.u32(static_cast<std::uint32_t>(ids.size()));
    for (ImageId id : ids) out.u64(id);
  }
}

HashTable read_index(ByteReader& in) {
  in.expect_magic("JCIX", "index");
  const auto version = in.u8();
  if (version != kIndexVersion) throw FormatError("index: unsupported version " + std::to_string(version));
  const std::size_t q = in.u16();
  if (q == 0 || q % 8 != 0) throw FormatError("index: invalid code length " + std::to_string(q));
  const std::uint64_t buckets = in.u64();
  std::vector<std::pair<ImageId, PackedCode>> entries;
  for (std::uint64_t b = 0; b < buckets; ++b) {
    const auto raw = in.raw(q / 8);
    const PackedCode key(raw.begin(), raw.end());
    const std::uint32_t count = in.u32();
    if (count == 0 || count > in.remaining() / 8) throw FormatError("index: bad bucket size");
    for (std::uint32_t i = 0; i < count; ++i) entries.emplace_back(in.u64(), key);
  }
  try {
    return HashTable::build_packed(q, entries);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("index: ") + e.what());
  }
}

void save_index(const std::filesystem::path& path, const HashTable& table) {
  ByteWriter w;
  append_index(w, table);
  write_file(path, w.bytes());
}

HashTable load_index(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ByteReader r(bytes);
  try {
    HashTable t = read_index(r);
    if (!r.done()) throw FormatError("index: trailing bytes");
    return t;
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace jcif::retrieval

// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "jcif/common/byte_io.hpp"
#include "jcif/common/labels.hpp"

namespace jcif::retrieval {

// q/8 bytes; bit b of byte k holds component 8k + b, with -1 -> 0, +1 -> 1.
using PackedCode = std::vector<std::uint8_t>;
using ImageId = std::uint64_t;

PackedCode pack_code(const HashCode& code);
HashCode unpack_code(std::span<const std::uint8_t> packed, std::size_t code_bits);
unsigned hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

struct RetrievalResult {
  std::vector<ImageId> ids;
  std::vector<unsigned> distances;
  double seconds = 0.0;
};

// Buckets of image ids keyed by packed code. Immutable once built.
class HashTable {
 public:
  // Radius probed bucket-by-bucket before falling back to a full scan.
  static constexpr unsigned kProbeRadius = 2;

  explicit HashTable(std::size_t code_bits);

  static HashTable build(std::size_t code_bits, std::span<const std::pair<ImageId, HashCode>> codes);
  static HashTable build_packed(std::size_t code_bits, std::span<const std::pair<ImageId, PackedCode>> codes);

  std::size_t code_bits() const { return code_bits_; }
  std::size_t bucket_count() const { return buckets_.size(); }
  std::size_t size() const { return size_; }
  const std::map<PackedCode, std::vector<ImageId>>& buckets() const { return buckets_; }

  // Top `top_k` ids by (Hamming distance, id). Exact.
  RetrievalResult query(const HashCode& code, std::size_t top_k) const;
  RetrievalResult query_packed(const PackedCode& key, std::size_t top_k) const;

  bool operator==(const HashTable& other) const = default;

 private:
  void insert(ImageId id, PackedCode key);

  std::size_t code_bits_;
  std::size_t size_ = 0;
  std::map<PackedCode, std::vector<ImageId>> buckets_;
};

// "JCIX" | u8 version | u16 q | u64 bucket count | per bucket: key bytes,
// u32 id count, u64 ids.
inline constexpr std::uint8_t kIndexVersion = 1;
void append_index(ByteWriter& out, const HashTable& table);
HashTable read_index(ByteReader& in);
void save_index(const std::filesystem::path& path, const HashTable& table);
HashTable load_index(const std::filesystem::path& path);

}  // namespace jcif::retrieval

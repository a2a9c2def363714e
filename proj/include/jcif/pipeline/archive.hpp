// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "jcif/codec/coding.hpp"
#include "jcif/common/byte_io.hpp"
#include "jcif/retrieval/hash_table.hpp"

namespace jcif::pipeline {

inline constexpr std::uint8_t kArchiveVersion = 1;

struct ArchiveEntry {
  retrieval::ImageId id = 0;
  retrieval::PackedCode code;
  codec::CompressedImage image;

  bool operator==(const ArchiveEntry&) const = default;
};

// Compressed images stored together with their packed hash codes.
struct Archive {
  std::size_t code_bits = 0;
  std::vector<ArchiveEntry> entries;

  // Throws NotFoundError for unknown ids.
  const ArchiveEntry& find(retrieval::ImageId id) const;
  std::uint64_t payload_bits() const;
  bool operator==(const Archive&) const = default;
};

void append_archive(ByteWriter& out, const Archive& archive);
Archive read_archive(ByteReader& in);
void save_archive(const std::filesystem::path& path, const Archive& archive);
Archive load_archive(const std::filesystem::path& path);

}  // namespace jcif::pipeline

// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/pipeline/archive.hpp"

#include <set>
#include <string>

namespace jcif::pipeline {

const ArchiveEntry& Archive::find(retrieval::ImageId id) const {
  for (const auto& e : entries) {
    if (e.id == id) return e;
  }
  throw NotFoundError("archive has no image with id " + std::to_string(id));
}

std::uint64_t Archive::payload_bits() const {
  std::uint64_t bits = 0;
  for (const auto& e : entries) bits += e.image.payload_bits();
  return bits;
}

void append_archive(ByteWriter& out, const Archive& archive) {
  if (archive.code_bits == 0 || archive.code_bits % 8 != 0 || archive.code_bits > 0xffff) {
    throw ConfigError("archive: code length must be a positive multiple of 8");
  }
  out.text("JCAR");
  out.u8(kArchiveVersion);
  out.u16(static_cast<std::uint16_t>(archive.code_bits));
  out.u64(archive.entries.size());
  for (const auto& e : archive.entries) {
    if (e.code.size() * 8 != archive.code_bits) throw ConfigError("archive: packed code has the wrong length");
    out.u64(e.id);
    out.u32(static_cast<std::uint32_t>(e.code.size()));
    out.raw(e.code);
    entropy::append_bitstream(out, e.image.hyper);
    entropy::append_bitstream(out, e.image.latent);
  }
}

Archive read_archive(ByteReader& in) {
  in.expect_magic("JCAR", "archive");
  const auto version = in.u8();
  if (version != kArchiveVersion) throw FormatError("archive: unsupported version " + std::to_string(version));
  Archive a;
  a.code_bits = in.u16();
  if (a.code_bits == 0 || a.code_bits % 8 != 0) throw FormatError("archive: invalid code length");
  const std::uint64_t count = in.u64();
  if (count > in.remaining()) throw FormatError("archive: image count exceeds file size");
  std::set<retrieval::ImageId> seen;
  a.entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    ArchiveEntry e;
    e.id = in.u64();
    if (!seen.insert(e.id).second) throw FormatError("archive: duplicate id " + std::to_string(e.id));
    const std::uint32_t length = in.u32();
    if (length * 8ULL != a.code_bits) throw FormatError("archive: code length disagrees with header");
    const auto raw = in.raw(length);
    e.code.assign(raw.begin(), raw.end());
    e.image.hyper = entropy::read_bitstream(in);
    e.image.latent = entropy::read_bitstream(in);
    if (e.image.hyper.kind != entropy::StreamKind::kHyper || e.image.latent.kind != entropy::StreamKind::kLatent) {
      throw FormatError("archive: stream kinds out of order for id " + std::to_string(e.id));
    }
    a.entries.push_back(std::move(e));
  }
  return a;
}

void save_archive(const std::filesystem::path& path, const Archive& archive) {
  ByteWriter w;
  append_archive(w, archive);
  write_file(path, w.bytes());
}

Archive load_archive(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ByteReader r(bytes);
  try {
    Archive a = read_archive(r);
    if (!r.done()) throw FormatError("archive: trailing bytes");
    return a;
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace jcif::pipeline

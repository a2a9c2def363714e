// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/pipeline/model.hpp"

#include <set>

#include "jcif/codec/checkpoint.hpp"
#include "jcif/codec/coding.hpp"

namespace jcif::pipeline {

const hash::HashHeadConfig& Model::require_head() const {
  if (!head) throw ConfigError("checkpoint has no hash head; run stage-2 training first");
  return *head;
}

Model load_model(const std::filesystem::path& checkpoint) {
  auto ck = codec::load_checkpoint(checkpoint);
  Model m;
  m.codec = codec::CodecConfig::from_tensor(ck.require_meta("meta.codec"));
  if (auto it = ck.meta.find("meta.hash"); it != ck.meta.end()) {
    m.head = hash::HashHeadConfig::from_tensor(it->second);
  }
  m.params = std::move(ck.params);
  return m;
}

HashCode image_code(const Model& model, const codec::RasterImage& image) {
  const auto analysis = codec::analyze(model.params, model.codec, image);
  return hash::hash_code(model.params, model.require_head(), analysis.latent);
}

Archive compress_images(const Model& model, std::span<const SourceImage> images) {
  const auto& head = model.require_head();
  Archive archive;
  archive.code_bits = head.code_bits;
  archive.entries.reserve(images.size());
  std::set<retrieval::ImageId> seen;
  for (const auto& src : images) {
    if (!seen.insert(src.id).second) throw ConfigError("duplicate image id " + std::to_string(src.id));
    const auto analysis = codec::analyze(model.params, model.codec, src.image);
    ArchiveEntry e;
    e.id = src.id;
    e.code = retrieval::pack_code(hash::hash_code(model.params, head, analysis.latent));
    e.image = codec::entropy_code(model.params, model.codec, analysis);
    archive.entries.push_back(std::move(e));
  }
  return archive;
}

}  // namespace jcif::pipeline

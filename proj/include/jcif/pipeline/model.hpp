// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <span>

#include "jcif/codec/model.hpp"
#include "jcif/common/labels.hpp"
#include "jcif/hash/head.hpp"
#include "jcif/pipeline/archive.hpp"

namespace jcif::pipeline {

// Trained weights plus the configurations recorded in their checkpoint.
struct Model {
  numerics::ParameterSet params;
  codec::CodecConfig codec;
  std::optional<hash::HashHeadConfig> head;

  const hash::HashHeadConfig& require_head() const;
};

// Throws FormatError when the checkpoint lacks its configuration records.
Model load_model(const std::filesystem::path& checkpoint);

// Hash code of an image, computed from its continuous encoder output.
HashCode image_code(const Model& model, const codec::RasterImage& image);

struct SourceImage {
  retrieval::ImageId id = 0;
  codec::RasterImage image;
};

Archive compress_images(const Model& model, std::span<const SourceImage> images);

}  // namespace jcif::pipeline

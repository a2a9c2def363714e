// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "jcif/codec/raster.hpp"
#include "jcif/common/labels.hpp"
#include "jcif/common/random.hpp"

namespace jcif::dataset {

// Synthetic multi-label scenes: the image is split into a grid of cells and
// every present class paints one cell with its own colour and texture.
struct SyntheticSceneConfig {
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t channels = 3;
  std::size_t classes = 8;
  std::size_t min_labels = 1;
  std::size_t max_labels = 2;
  // Texture modulation amplitude around the class colour.
  double texture_amplitude = 0.12;
  // Standard deviation of additive Gaussian pixel noise.
  double noise = 0.01;
  std::uint64_t seed = 7;

  void validate() const;
};

enum class TextureKind : std::uint8_t { kStripes, kChecker, kBlobs, kGradient };

// Fixed per-class appearance: colour, texture family, frequency, orientation.
struct ClassAppearance {
  std::array<double, 3> color;
  TextureKind texture;
  double frequency;
  double orientation;
};

ClassAppearance class_appearance(std::size_t cls);

struct Scene {
  codec::RasterImage image;
  LabelVector labels;
};

Scene generate_scene(const SyntheticSceneConfig& config, Rng& rng);

// Scene for image `id` drawn from a generator derived from (config.seed, id).
Scene generate_scene(const SyntheticSceneConfig& config, std::uint64_t id);

}  // namespace jcif::dataset

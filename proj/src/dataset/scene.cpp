// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/dataset/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "jcif/common/error.hpp"

namespace jcif::dataset {

void SyntheticSceneConfig::validate() const {
  if (height == 0 || width == 0 || channels == 0) throw ConfigError("scene size must be positive");
  if (classes == 0) throw ConfigError("class count must be positive");
  if (min_labels < 1 || min_labels > max_labels || max_labels > classes) {
    throw ConfigError("labels per image must satisfy 1 <= min <= max <= classes");
  }
  if (noise < 0.0 || texture_amplitude < 0.0) throw ConfigError("noise and amplitude must be >= 0");
}

ClassAppearance class_appearance(std::size_t cls) {
  static constexpr std::array<std::array<double, 3>, 8> kPalette = {{
      {0.85, 0.15, 0.15},
      {0.15, 0.75, 0.20},
      {0.15, 0.25, 0.85},
      {0.90, 0.85, 0.20},
      {0.80, 0.20, 0.80},
      {0.15, 0.80, 0.80},
      {0.95, 0.60, 0.15},
      {0.30, 0.15, 0.45},
  }};
  const auto texture = static_cast<TextureKind>(cls % 4);
  if (cls < kPalette.size()) {
    const double pi = std::numbers::pi;
    return ClassAppearance{kPalette[cls], texture, 0.125 + 0.03 * static_cast<double>(cls),
                           pi * static_cast<double>(cls) / 8.0};
  }
  Rng rng(Rng::mix(cls));
  return ClassAppearance{{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)},
                         texture, rng.uniform(0.1, 0.3), rng.uniform(0.0, std::numbers::pi)};
}

namespace {

struct Cell {
  std::size_t y0, y1, x0, x1;
};

std::vector<Cell> grid_cells(const SyntheticSceneConfig& config) {
  const auto g = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(config.max_labels)))));
  std::vector<Cell> cells;
  for (std::size_t r = 0; r < g; ++r) {
    for (std::size_t c = 0; c < g; ++c) {
      cells.push_back(Cell{r * config.height / g, (r + 1) * config.height / g,
                           c * config.width / g, (c + 1) * config.width / g});
    }
  }
  return cells;
}

// Texture value in [-1, 1] at cell-local coordinates.
class Texture {
 public:
  Texture(const ClassAppearance& look, const Cell& cell, Rng& rng) : look_(look) {
    phase_a_ = rng.uniform(0.0, 2.0 * std::numbers::pi);
    phase_b_ = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double h = static_cast<double>(cell.y1 - cell.y0);
    const double w = static_cast<double>(cell.x1 - cell.x0);
    extent_ = std::max(h, w);
    for (int i = 0; i < 3; ++i) {
      blobs_.push_back({rng.uniform(0.0, h), rng.uniform(0.0, w), rng.uniform(1.5, 3.5)});
    }
  }

  double operator()(double y, double x) const {
    const double two_pi = 2.0 * std::numbers::pi;
    const double c = std::cos(look_.orientation), s = std::sin(look_.orientation);
    switch (look_.texture) {
      case TextureKind::kStripes:
        return std::sin(two_pi * look_.frequency * (x * c + y * s) + phase_a_);
      case TextureKind::kChecker: {
        const double v = std::sin(two_pi * look_.frequency * x + phase_a_) *
                         std::sin(two_pi * look_.frequency * y + phase_b_);
        return v >= 0 ? 1.0 : -1.0;
      }
      case TextureKind::kBlobs: {
        double peak = 0.0;
        for (const auto& b : blobs_) {
          const double d2 = (y - b[0]) * (y - b[0]) + (x - b[1]) * (x - b[1]);
          peak = std::max(peak, std::exp(-d2 / (2.0 * b[2] * b[2])));
        }
        return 2.0 * peak - 1.0;
      }
      case TextureKind::kGradient:
        return std::clamp((x * c + y * s) / extent_ * 2.0 - 1.0, -1.0, 1.0);
    }
    return 0.0;
  }

 private:
  ClassAppearance look_;
  double phase_a_ = 0.0, phase_b_ = 0.0, extent_ = 1.0;
  std::vector<std::array<double, 3>> blobs_;
};

}  // namespace

Scene generate_scene(const SyntheticSceneConfig& config, Rng& rng) {
  config.validate();
  const std::size_t h = config.height, w = config.width, nc = config.channels;

  std::vector<double> pixels(h * w * nc);
  const double base = rng.uniform(0.4, 0.6);
  const double gy = rng.uniform(-0.05, 0.05), gx = rng.uniform(-0.05, 0.05);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double v = base + gy * (static_cast<double>(y) / static_cast<double>(h) - 0.5) +
                       gx * (static_cast<double>(x) / static_cast<double>(w) - 0.5);
      for (std::size_t c = 0; c < nc; ++c) pixels[(y * w + x) * nc + c] = v;
    }
  }

  const std::size_t span = config.max_labels - config.min_labels + 1;
  const std::size_t count = config.min_labels + static_cast<std::size_t>(rng.below(span));
  std::vector<std::size_t> classes(config.classes);
  std::iota(classes.begin(), classes.end(), std::size_t{0});
  rng.shuffle(classes.begin(), classes.end());
  auto cells = grid_cells(config);
  rng.shuffle(cells.begin(), cells.end());

  LabelVector labels(config.classes, 0);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t cls = classes[k];
    const Cell& cell = cells[k];
    const ClassAppearance look = class_appearance(cls);
    const Texture texture(look, cell, rng);
    labels[cls] = 1;
    for (std::size_t y = cell.y0; y < cell.y1; ++y) {
      for (std::size_t x = cell.x0; x < cell.x1; ++x) {
        const double t = config.texture_amplitude *
                         texture(static_cast<double>(y - cell.y0), static_cast<double>(x - cell.x0));
        for (std::size_t c = 0; c < nc; ++c) pixels[(y * w + x) * nc + c] = look.color[c % 3] + t;
      }
    }
  }
  if (config.noise > 0.0) {
    for (auto& v : pixels) v += rng.normal(0.0, config.noise);
  }
  for (auto& v : pixels) v = std::clamp(v, 0.0, 1.0);
  return Scene{codec::RasterImage(numerics::Tensor({h, w, nc}, std::move(pixels))), std::move(labels)};
}

Scene generate_scene(const SyntheticSceneConfig& config, std::uint64_t id) {
  Rng rng = Rng::derive(config.seed, id);
  return generate_scene(config, rng);
}

}  // namespace jcif::dataset

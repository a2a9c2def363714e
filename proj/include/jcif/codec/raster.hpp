// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

#include "jcif/numerics/tensor.hpp"

namespace jcif::codec {

// H x W x C image of normalized intensities, every value within [0, 1].
class RasterImage {
 public:
  RasterImage(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0);
  explicit RasterImage(numerics::Tensor pixels);

  std::size_t height() const { return pixels_.extent(0); }
  std::size_t width() const { return pixels_.extent(1); }
  std::size_t channels() const { return pixels_.extent(2); }
  std::size_t size() const { return pixels_.size(); }

  const numerics::Tensor& pixels() const { return pixels_; }
  std::span<const double> data() const { return pixels_.data(); }

  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels_[(y * width() + x) * channels() + c];
  }

 private:
  numerics::Tensor pixels_;
};

// Clamps every value into [0, 1] and wraps the result.
RasterImage clamp_to_raster(const numerics::Tensor& values);

}  // namespace jcif::codec

// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/codec/raster.hpp"

#include <algorithm>
#include <cmath>

#include "jcif/common/error.hpp"

namespace jcif::codec {

RasterImage::RasterImage(std::size_t height, std::size_t width, std::size_t channels, double fill)
    : RasterImage(numerics::Tensor(numerics::Shape{height, width, channels}, fill)) {}

RasterImage::RasterImage(numerics::Tensor pixels) : pixels_(std::move(pixels)) {
  if (pixels_.rank() != 3) {
    throw ShapeError("raster image must be H x W x C, got " + numerics::to_string(pixels_.shape()));
  }
  for (double v : pixels_.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("raster pixel outside [0, 1]");
  }
}

RasterImage clamp_to_raster(const numerics::Tensor& values) {
  numerics::Tensor t = values;
  for (auto& v : t.values()) v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
  return RasterImage(std::move(t));
}

}  // namespace jcif::codec

// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "jcif/codec/model.hpp"

namespace jcif::pipeline {

struct RdPoint {
  double lambda = 0.0;
  double bpp = 0.0;   // coded payload bits per pixel
  double psnr = 0.0;  // from the MSE pooled over all images
};

// Compresses and reconstructs every image with the trained codec.
RdPoint measure_codec(const numerics::ParameterSet& params, const codec::CodecConfig& config,
                      std::span<const codec::RasterImage> images);

struct UniformPoint {
  std::size_t levels = 0;
  double bpp = 0.0;
  double psnr = 0.0;
};

// Quantizes pixel values onto `levels` equal bins over [0, 1] and reconstructs
// each bin at its centre; the rate is the empirical entropy of the bin
// indices over the whole set.
UniformPoint measure_uniform(std::span<const codec::RasterImage> images, std::size_t levels);

// Uniform quantization for 1..max_levels bins, sorted by bpp.
std::vector<UniformPoint> uniform_curve(std::span<const codec::RasterImage> images, std::size_t max_levels = 256);

// PSNR of the uniform curve at `bpp`, linearly interpolated. Throws
// ConfigError when `bpp` lies outside the curve.
double uniform_psnr_at(std::span<const UniformPoint> curve, double bpp);

// Rows (lambda, bpp, psnr, uniform_psnr) sorted by bpp.
std::string rd_csv(std::span<const RdPoint> points, std::span<const UniformPoint> baseline);

}  // namespace jcif::pipeline

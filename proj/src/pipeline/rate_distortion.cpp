// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/pipeline/rate_distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "jcif/codec/coding.hpp"
#include "jcif/common/error.hpp"

namespace jcif::pipeline {

namespace {

double pooled_psnr(double squared_error, double samples) {
  if (squared_error == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(samples / squared_error);
}

std::size_t pixel_count(std::span<const codec::RasterImage> images) {
  std::size_t n = 0;
  for (const auto& im : images) n += im.height() * im.width();
  if (n == 0) throw ConfigError("rate-distortion measurement needs at least one pixel");
  return n;
}

}  // namespace

RdPoint measure_codec(const numerics::ParameterSet& params, const codec::CodecConfig& config,
                      std::span<const codec::RasterImage> images) {
  const std::size_t pixels = pixel_count(images);
  double bits = 0.0, squared = 0.0, samples = 0.0;
  for (const auto& im : images) {
    const auto compressed = codec::compress(params, config, im);
    const auto rec = codec::decompress(params, config, compressed, std::pair{im.height(), im.width()});
    bits += static_cast<double>(compressed.payload_bits());
    for (std::size_t i = 0; i < im.size(); ++i) {
      const double d = im.pixels()[i] - rec.pixels()[i];
      squared += d * d;
    }
    samples += static_cast<double>(im.size());
  }
  return {config.lambda, bits / static_cast<double>(pixels), pooled_psnr(squared, samples)};
}

UniformPoint measure_uniform(std::span<const codec::RasterImage> images, std::size_t levels) {
  if (levels == 0) throw ConfigError("uniform quantizer needs at least one level");
  const std::size_t pixels = pixel_count(images);
  const double n = static_cast<double>(levels);
  std::vector<std::size_t> histogram(levels, 0);
  double squared = 0.0, samples = 0.0;
  for (const auto& im : images) {
    for (double v : im.data()) {
      const auto bin = static_cast<std::size_t>(std::clamp(std::floor(v * n), 0.0, n - 1.0));
      ++histogram[bin];
      const double rec = (static_cast<double>(bin) + 0.5) / n;
      squared += (v - rec) * (v - rec);
    }
    samples += static_cast<double>(im.size());
  }
  double bits = 0.0;
  for (std::size_t count : histogram) {
    if (count == 0) continue;
    const double c = static_cast<double>(count);
    bits -= c * std::log2(c / samples);
  }
  return {levels, bits / static_cast<double>(pixels), pooled_psnr(squared, samples)};
}

std::vector<UniformPoint> uniform_curve(std::span<const codec::RasterImage> images, std::size_t max_levels) {
  if (max_levels < 2) throw ConfigError("uniform curve needs at least two levels");
  std::vector<UniformPoint> curve;
  for (std::size_t levels = 1; levels <= max_levels; ++levels) curve.push_back(measure_uniform(images, levels));
  std::stable_sort(curve.begin(), curve.end(), [](const auto& a, const auto& b) { return a.bpp < b.bpp; });
  return curve;
}

double uniform_psnr_at(std::span<const UniformPoint> curve, double bpp) {
  if (curve.empty() || bpp < curve.front().bpp || bpp > curve.back().bpp) {
    throw ConfigError("bpp outside the uniform-quantization curve");
  }
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (bpp <= curve[i].bpp) {
      const auto& a = curve[i - 1];
      const auto& b = curve[i];
      if (b.bpp == a.bpp) return std::max(a.psnr, b.psnr);
      const double t = (bpp - a.bpp) / (b.bpp - a.bpp);
      return a.psnr + t * (b.psnr - a.psnr);
    }
  }
  return curve.front().psnr;
}

std::string rd_csv(std::span<const RdPoint> points, std::span<const UniformPoint> baseline) {
  std::vector<RdPoint> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.bpp < b.bpp; });
  std::ostringstream os;
  os.precision(10);
  os << "lambda,bpp,psnr,uniform_psnr\n";
  for (const auto& p : sorted) {
    os << p.lambda << ',' << p.bpp << ',' << p.psnr << ',';
    if (!baseline.empty() && p.bpp >= baseline.front().bpp && p.bpp <= baseline.back().bpp) {
      os << uniform_psnr_at(baseline, p.bpp);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace jcif::pipeline

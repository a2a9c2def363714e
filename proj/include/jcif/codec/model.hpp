// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>

#include "jcif/codec/likelihood.hpp"
#include "jcif/codec/raster.hpp"
#include "jcif/common/random.hpp"
#include "jcif/numerics/parameters.hpp"

namespace jcif::codec {

// Network shape and rate-distortion weight. The analysis transform is
// conv3x3/2 -> conv3x3/2 -> conv3x3, so latents are 4x smaller per side.
struct CodecConfig {
  static constexpr std::size_t kDownsampling = 4;

  std::size_t image_channels = 3;
  std::size_t hidden1 = 32;
  std::size_t hidden2 = 64;
  std::size_t latent_channels = 16;
  std::size_t hyper_hidden = 32;
  std::size_t hyper_channels = 8;
  std::size_t mixtures = 3;
  // Rate-distortion weight in units of (pixel count * 255^2), so that the
  // distortion term is lambda * sum of squared 8-bit errors.
  double lambda = 0.01;

  void validate() const;
  bool operator==(const CodecConfig&) const = default;

  numerics::Tensor to_tensor() const;
  static CodecConfig from_tensor(const numerics::Tensor& t);
};

inline constexpr std::string_view kCodecPrefix = "codec.";

// Adds freshly initialized codec parameters ("codec.*") to `params`.
void init_codec_params(numerics::ParameterSet& params, const CodecConfig& config, std::uint64_t seed);

enum class QuantizeMode { kTraining, kInference };

// Graph builders. Images are (H, W, C) with H and W divisible by 4.
numerics::Var encode(numerics::Bindings& b, const CodecConfig& config, numerics::Var image);
// Training adds U(-1/2, 1/2) noise; inference rounds half away from zero
// (straight-through on the tape).
numerics::Var quantize(numerics::Var latent, QuantizeMode mode, Rng& rng);
// Unclamped reconstruction; callers clamp for output.
numerics::Var decode(numerics::Bindings& b, const CodecConfig& config, numerics::Var quantized);
numerics::Var hyper_encode(numerics::Bindings& b, const CodecConfig& config, numerics::Var latent);
// Raw mixture parameters in the MixtureLayout channel order.
numerics::Var hyper_decode(numerics::Bindings& b, const CodecConfig& config, numerics::Var hyper);

numerics::Var latent_rate(numerics::Var quantized, numerics::Var mixture_raw, std::size_t components);
numerics::Var hyper_rate(numerics::Var hyper, numerics::Var density_params);
numerics::Var distortion(numerics::Var image, numerics::Var reconstruction);

// Multiplier on the mean squared error: lambda * H * W * 255^2.
double distortion_weight(const CodecConfig& config, std::size_t height, std::size_t width);

struct CompressionTerms {
  numerics::Var loss;                  // rate_bits + weighted_distortion
  numerics::Var rate_bits;             // latent + hyper bits
  numerics::Var weighted_distortion;   // distortion_weight * mse
  numerics::Var mse;
  numerics::Var latent;                // continuous encoder output
  numerics::Var reconstruction;        // unclamped
};

CompressionTerms compression_terms(numerics::Bindings& b, const CodecConfig& config, numerics::Var image,
                                   QuantizeMode mode, Rng& rng);

double mse(const numerics::Tensor& a, const numerics::Tensor& b);
// 10 log10(peak^2 / MSE); +infinity for identical inputs.
double psnr(const numerics::Tensor& a, const numerics::Tensor& b, double peak = 1.0);
inline bool is_lossless_psnr(double db) { return db == std::numeric_limits<double>::infinity(); }

// Reflect-pads H and W up to the next multiple of `multiple`.
numerics::Tensor reflect_pad(const numerics::Tensor& image, std::size_t multiple);
numerics::Tensor crop(const numerics::Tensor& image, std::size_t height, std::size_t width);

}  // namespace jcif::codec

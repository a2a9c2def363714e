// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>

#include "jcif/codec/model.hpp"
#include "jcif/entropy/bitstream.hpp"
#include "jcif/entropy/symbol_model.hpp"

namespace jcif::codec {

inline constexpr int kSymbolWindowLo = -127;
inline constexpr int kSymbolWindowHi = 127;

// Integer tables for the entropy coder, built from the learned densities.
entropy::SymbolModel latent_symbol_model(const MixtureElement& mixture);
entropy::SymbolModel hyper_symbol_model(std::span<const double> channel_params);

struct CompressedImage {
  entropy::Bitstream hyper;
  entropy::Bitstream latent;

  std::uint64_t payload_bits() const { return hyper.payload_bits + latent.payload_bits; }
  bool operator==(const CompressedImage&) const = default;
};

// Output of the analysis side for one image.
struct Analysis {
  numerics::Tensor latent;          // continuous encoder output
  numerics::Tensor latent_symbols;  // rounded latent
  numerics::Tensor hyper_symbols;   // rounded hyper-latent
  numerics::Tensor mixture_raw;     // hyper-decoder output for hyper_symbols
  double estimated_bits = 0.0;      // model rate of the rounded symbols
};

// Runs encoder and hyper path in inference mode. Images whose sides are not
// a multiple of 4 are reflect-padded.
Analysis analyze(const numerics::ParameterSet& params, const CodecConfig& config, const RasterImage& image);

CompressedImage entropy_code(const numerics::ParameterSet& params, const CodecConfig& config,
                             const Analysis& analysis);
CompressedImage compress(const numerics::ParameterSet& params, const CodecConfig& config, const RasterImage& image);

// Entropy-decodes both streams (hyper first, then latents under the mixtures
// derived from it). Counts as one decode operation.
numerics::Tensor decode_symbols(const numerics::ParameterSet& params, const CodecConfig& config,
                                const CompressedImage& streams);
// Synthesis transform of rounded latents, clamped to [0, 1].
RasterImage synthesize(const numerics::ParameterSet& params, const CodecConfig& config,
                       const numerics::Tensor& latent_symbols);
// decode_symbols + synthesize; crops to `size` (height, width) when given.
RasterImage decompress(const numerics::ParameterSet& params, const CodecConfig& config,
                       const CompressedImage& streams,
                       std::optional<std::pair<std::size_t, std::size_t>> size = std::nullopt);

// Process-wide number of decode_symbols calls; lets callers assert that a
// code path never touched a bitstream.
std::uint64_t decode_operation_count();

}  // namespace jcif::codec

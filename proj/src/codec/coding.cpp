// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/codec/coding.hpp"

#include <atomic>
#include <cmath>
#include <vector>

#include "jcif/common/error.hpp"
#include "jcif/numerics/ops.hpp"

namespace jcif::codec {

using numerics::Bindings;
using numerics::ParameterSet;
using numerics::Shape;
using numerics::Tape;
using numerics::Tensor;

namespace {

std::atomic<std::uint64_t> g_decode_operations{0};

constexpr std::size_t kWindow = kSymbolWindowHi - kSymbolWindowLo + 1;

// Standard normal CDF that short-circuits far tails to exact 0/1.
double clipped_cdf(double z) {
  if (z < -40.0) return 0.0;
  if (z > 40.0) return 1.0;
  return normal_cdf(z);
}

std::array<std::uint32_t, 4> grid_shape(const Tensor& t) {
  return {1, static_cast<std::uint32_t>(t.extent(0)), static_cast<std::uint32_t>(t.extent(1)),
          static_cast<std::uint32_t>(t.extent(2))};
}

std::vector<std::int32_t> to_symbols(const Tensor& t) {
  std::vector<std::int32_t> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = t[i];
    if (!std::isfinite(v) || std::abs(v) > 2147483647.0) {
      throw NumericError("entropy coding: latent value out of the 32-bit range");
    }
    out[i] = static_cast<std::int32_t>(v);
  }
  return out;
}

std::vector<entropy::SymbolModel> hyper_models(const ParameterSet& params, std::size_t channels) {
  const Tensor& density = params.at("codec.density");
  std::vector<entropy::SymbolModel> models;
  models.reserve(channels);
  for (std::size_t c = 0; c < channels; ++c) models.push_back(hyper_symbol_model(
      density.data().subspan(c * kDensityParamsPerChannel, kDensityParamsPerChannel)));
  return models;
}

Tensor mixture_raw_for(const ParameterSet& params, const CodecConfig& config, const Tensor& hyper_symbols) {
  Tape tape;
  Bindings b(tape, params);
  return hyper_decode(b, config, tape.constant(hyper_symbols)).value();
}

void check_stream(const entropy::Bitstream& s, entropy::StreamKind kind, const char* what) {
  if (s.kind != kind) throw FormatError(std::string(what) + ": wrong stream kind");
  if (s.shape[0] != 1 || s.lo != kSymbolWindowLo || s.hi != kSymbolWindowHi) {
    throw FormatError(std::string(what) + ": unsupported shape or symbol window");
  }
}

}  // namespace

entropy::SymbolModel latent_symbol_model(const MixtureElement& m) {
  std::vector<double> probs(kWindow, 0.0);
  double escape = 0.0;
  std::vector<double> cdf(kWindow + 1);
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    const double w = m.weights[k];
    const double mu = m.means[k];
    const double s = m.scales[k];
    for (std::size_t e = 0; e <= kWindow; ++e) {
      cdf[e] = clipped_cdf((static_cast<double>(kSymbolWindowLo) - 0.5 + static_cast<double>(e) - mu) / s);
    }
    for (std::size_t e = 0; e < kWindow; ++e) probs[e] += w * (cdf[e + 1] - cdf[e]);
    escape += w * (cdf[0] + (1.0 - cdf[kWindow]));
  }
  return entropy::SymbolModel::from_probabilities(kSymbolWindowLo, probs, true, escape);
}

entropy::SymbolModel hyper_symbol_model(std::span<const double> channel_params) {
  std::vector<double> probs(kWindow);
  for (std::size_t e = 0; e < kWindow; ++e) {
    const double s = static_cast<double>(kSymbolWindowLo) + static_cast<double>(e);
    probs[e] = density_interval(channel_params, s, s);
  }
  const double below = density_cdf(channel_params, kSymbolWindowLo - 0.5);
  const double above = 1.0 - density_cdf(channel_params, kSymbolWindowHi + 0.5);
  return entropy::SymbolModel::from_probabilities(kSymbolWindowLo, probs, true, below + above);
}

Analysis analyze(const ParameterSet& params, const CodecConfig& config, const RasterImage& image) {
  Tape tape;
  Bindings b(tape, params);
  Rng unused(0);
  const auto x = tape.constant(reflect_pad(image.pixels(), CodecConfig::kDownsampling));
  const auto y = encode(b, config, x);
  const auto q = quantize(y, QuantizeMode::kInference, unused);
  const auto z = quantize(hyper_encode(b, config, y), QuantizeMode::kInference, unused);
  const auto raw = hyper_decode(b, config, z);
  const auto bits = numerics::add(latent_rate(q, raw, config.mixtures), hyper_rate(z, b["codec.density"]));
  return Analysis{y.value(), q.value(), z.value(), raw.value(), bits.value().item()};
}

CompressedImage entropy_code(const ParameterSet& params, const CodecConfig& config, const Analysis& a) {
  CompressedImage out;
  const auto hm = hyper_models(params, config.hyper_channels);
  entropy::Bitstream hh;
  hh.kind = entropy::StreamKind::kHyper;
  hh.shape = grid_shape(a.hyper_symbols);
  hh.lo = kSymbolWindowLo;
  hh.hi = kSymbolWindowHi;
  const std::size_t hc = config.hyper_channels;
  out.hyper = entropy::arith_encode(
      to_symbols(a.hyper_symbols), [&](std::size_t i) -> const entropy::SymbolModel& { return hm[i % hc]; }, hh);

  const MixtureTable table = mixture_table(a.mixture_raw, MixtureLayout{config.latent_channels, config.mixtures});
  std::vector<entropy::SymbolModel> lm;
  lm.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) lm.push_back(latent_symbol_model(table.element(i)));
  entropy::Bitstream lh = hh;
  lh.kind = entropy::StreamKind::kLatent;
  lh.shape = grid_shape(a.latent_symbols);
  out.latent = entropy::arith_encode(to_symbols(a.latent_symbols), lm, lh);
  return out;
}

CompressedImage compress(const ParameterSet& params, const CodecConfig& config, const RasterImage& image) {
  return entropy_code(params, config, analyze(params, config, image));
}

Tensor decode_symbols(const ParameterSet& params, const CodecConfig& config, const CompressedImage& streams) {
  ++g_decode_operations;
  check_stream(streams.hyper, entropy::StreamKind::kHyper, "hyper stream");
  check_stream(streams.latent, entropy::StreamKind::kLatent, "latent stream");
  const auto& hs = streams.hyper.shape;
  const auto& ls = streams.latent.shape;
  if (hs[3] != config.hyper_channels || ls[3] != config.latent_channels || ls[1] != 2 * hs[1] ||
      ls[2] != 2 * hs[2] || hs[1] == 0 || hs[2] == 0) {
    throw FormatError("compressed image: stream shapes do not match the codec configuration");
  }

  const auto hm = hyper_models(params, config.hyper_channels);
  const std::size_t hc = config.hyper_channels;
  const auto zs = entropy::arith_decode(
      streams.hyper, [&](std::size_t i) -> const entropy::SymbolModel& { return hm[i % hc]; });
  Tensor z(Shape{hs[1], hs[2], hs[3]});
  for (std::size_t i = 0; i < zs.size(); ++i) z[i] = zs[i];

  const MixtureTable table =
      mixture_table(mixture_raw_for(params, config, z), MixtureLayout{config.latent_channels, config.mixtures});
  std::vector<entropy::SymbolModel> lm;
  lm.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) lm.push_back(latent_symbol_model(table.element(i)));
  const auto ys = entropy::arith_decode(streams.latent, lm);
  Tensor y(Shape{ls[1], ls[2], ls[3]});
  for (std::size_t i = 0; i < ys.size(); ++i) y[i] = ys[i];
  return y;
}

RasterImage synthesize(const ParameterSet& params, const CodecConfig& config, const Tensor& latent_symbols) {
  Tape tape;
  Bindings b(tape, params);
  return clamp_to_raster(decode(b, config, tape.constant(latent_symbols)).value());
}

RasterImage decompress(const ParameterSet& params, const CodecConfig& config, const CompressedImage& streams,
                       std::optional<std::pair<std::size_t, std::size_t>> size) {
  RasterImage full = synthesize(params, config, decode_symbols(params, config, streams));
  if (!size || (size->first == full.height() && size->second == full.width())) return full;
  return RasterImage(crop(full.pixels(), size->first, size->second));
}

std::uint64_t decode_operation_count() { return g_decode_operations.load(); }

}  // namespace jcif::codec

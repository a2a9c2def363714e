// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/codec/model.hpp"

#include <cmath>

#include "jcif/common/error.hpp"
#include "jcif/numerics/ops.hpp"

namespace jcif::codec {

using numerics::Bindings;
using numerics::Conv2dOptions;
using numerics::ParameterSet;
using numerics::Shape;
using numerics::Tensor;
using numerics::Var;
namespace ops = numerics;

namespace {

void add_conv(ParameterSet& params, const std::string& name, std::size_t k, std::size_t cin, std::size_t cout,
              double gain, Rng& rng) {
  Tensor w(Shape{k, k, cin, cout});
  const double std_dev = std::sqrt(gain / static_cast<double>(k * k * cin));
  for (auto& v : w.values()) v = rng.normal(0.0, std_dev);
  params.add(name + ".weight", std::move(w));
  params.add(name + ".bias", Tensor(Shape{cout}));
}

Var conv(Bindings& b, const std::string& name, Var x, std::size_t stride = 1) {
  const std::size_t k = b.params().at(name + ".weight").extent(0);
  return ops::bias_add(ops::conv2d(x, b[name + ".weight"], Conv2dOptions{stride, k / 2}), b[name + ".bias"]);
}

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < static_cast<std::ptrdiff_t>(n) ? i : period - i);
}

}  // namespace

void CodecConfig::validate() const {
  if (image_channels == 0 || hidden1 == 0 || hidden2 == 0 || latent_channels == 0 || hyper_hidden == 0 ||
      hyper_channels == 0) {
    throw ConfigError("codec: layer widths must be positive");
  }
  if (mixtures == 0) throw ConfigError("codec: mixture count must be at least 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("codec: lambda must be positive");
}

Tensor CodecConfig::to_tensor() const {
  return Tensor(Shape{8}, {static_cast<double>(image_channels), static_cast<double>(hidden1),
                           static_cast<double>(hidden2), static_cast<double>(latent_channels),
                           static_cast<double>(hyper_hidden), static_cast<double>(hyper_channels),
                           static_cast<double>(mixtures), lambda});
}

CodecConfig CodecConfig::from_tensor(const Tensor& t) {
  if (t.shape() != Shape{8}) throw FormatError("codec config record: expected 8 values");
  CodecConfig c;
  auto count = [&](std::size_t i) {
    const double v = t[i];
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e6) throw FormatError("codec config record: bad width");
    return static_cast<std::size_t>(v);
  };
  c.image_channels = count(0);
  c.hidden1 = count(1);
  c.hidden2 = count(2);
  c.latent_channels = count(3);
  c.hyper_hidden = count(4);
  c.hyper_channels = count(5);
  c.mixtures = count(6);
  c.lambda = t[7];
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("codec config record: ") + e.what());
  }
  return c;
}

void init_codec_params(ParameterSet& params, const CodecConfig& c, std::uint64_t seed) {
  c.validate();
  Rng rng = Rng::derive(seed, 0xC0DEC);
  add_conv(params, "codec.analysis.0", 3, c.image_channels, c.hidden1, 2.0, rng);
  add_conv(params, "codec.analysis.1", 3, c.hidden1, c.hidden2, 2.0, rng);
  add_conv(params, "codec.analysis.2", 3, c.hidden2, c.latent_channels, 1.0, rng);
  add_conv(params, "codec.synthesis.0", 3, c.latent_channels, c.hidden2, 2.0, rng);
  add_conv(params, "codec.synthesis.1", 3, c.hidden2, c.hidden1, 2.0, rng);
  add_conv(params, "codec.synthesis.2", 3, c.hidden1, c.image_channels, 1.0, rng);
  add_conv(params, "codec.hyper_analysis.0", 3, c.latent_channels, c.hyper_hidden, 2.0, rng);
  add_conv(params, "codec.hyper_analysis.1", 3, c.hyper_hidden, c.hyper_channels, 1.0, rng);
  add_conv(params, "codec.hyper_synthesis.0", 3, c.hyper_channels, c.hyper_hidden, 2.0, rng);
  add_conv(params, "codec.hyper_synthesis.1", 1, c.hyper_hidden,
           MixtureLayout{c.latent_channels, c.mixtures}.raw_channels(), 0.01, rng);
  params.add("codec.density", initial_density_params(c.hyper_channels, 10.0, rng.next_u64()));
}

Var encode(Bindings& b, const CodecConfig& c, Var image) {
  const Shape& s = image.shape();
  if (s.size() != 3 || s[2] != c.image_channels) {
    throw ShapeError("encode: expected (H, W, " + std::to_string(c.image_channels) + ") image, got " +
                     numerics::to_string(s));
  }
  if (s[0] % CodecConfig::kDownsampling != 0 || s[1] % CodecConfig::kDownsampling != 0) {
    throw ShapeError("encode: image " + numerics::to_string(s) + " is not a multiple of " +
                     std::to_string(CodecConfig::kDownsampling) + " per side; reflect-pad it first");
  }
  Var h = ops::relu(conv(b, "codec.analysis.0", image, 2));
  h = ops::relu(conv(b, "codec.analysis.1", h, 2));
  return conv(b, "codec.analysis.2", h);
}

Var quantize(Var latent, QuantizeMode mode, Rng& rng) {
  if (mode == QuantizeMode::kInference) return ops::round_ste(latent);
  Tensor noise(latent.shape());
  for (auto& v : noise.values()) v = rng.uniform(-0.5, 0.5);
  return ops::add(latent, latent.tape().constant(std::move(noise)));
}

Var decode(Bindings& b, const CodecConfig& c, Var q) {
  const Shape& s = q.shape();
  if (s.size() != 3 || s[2] != c.latent_channels) {
    throw ShapeError("decode: expected (h, w, " + std::to_string(c.latent_channels) + ") latent, got " +
                     numerics::to_string(s));
  }
  Var h = ops::relu(conv(b, "codec.synthesis.0", q));
  h = ops::relu(conv(b, "codec.synthesis.1", ops::upsample2x(h)));
  return conv(b, "codec.synthesis.2", ops::upsample2x(h));
}

Var hyper_encode(Bindings& b, const CodecConfig&, Var latent) {
  if (latent.shape().size() != 3 || latent.shape()[0] % 2 != 0 || latent.shape()[1] % 2 != 0) {
    throw ShapeError("hyper_encode: latent grid must be even per side, got " + numerics::to_string(latent.shape()));
  }
  Var h = ops::relu(conv(b, "codec.hyper_analysis.0", latent));
  return conv(b, "codec.hyper_analysis.1", h, 2);
}

Var hyper_decode(Bindings& b, const CodecConfig& c, Var hyper) {
  if (hyper.shape().size() != 3 || hyper.shape()[2] != c.hyper_channels) {
    throw ShapeError("hyper_decode: expected (h, w, " + std::to_string(c.hyper_channels) + "), got " +
                     numerics::to_string(hyper.shape()));
  }
  Var h = ops::relu(conv(b, "codec.hyper_synthesis.0", ops::upsample2x(hyper)));
  return conv(b, "codec.hyper_synthesis.1", h);
}

Var latent_rate(Var quantized, Var mixture_raw, std::size_t components) {
  return information_bits(mixture_likelihood(quantized, mixture_raw, components));
}

Var hyper_rate(Var hyper, Var density_params) {
  return information_bits(factorized_likelihood(hyper, density_params));
}

Var distortion(Var image, Var reconstruction) {
  if (image.shape() != reconstruction.shape()) {
    throw ShapeError("distortion: shape mismatch " + numerics::to_string(image.shape()) + " vs " +
                     numerics::to_string(reconstruction.shape()));
  }
  return ops::mean(ops::square(ops::sub(reconstruction, image)));
}

double distortion_weight(const CodecConfig& c, std::size_t height, std::size_t width) {
  return c.lambda * static_cast<double>(height * width) * 255.0 * 255.0;
}

CompressionTerms compression_terms(Bindings& b, const CodecConfig& c, Var image, QuantizeMode mode, Rng& rng) {
  CompressionTerms t;
  t.latent = encode(b, c, image);
  const Var q = quantize(t.latent, mode, rng);
  const Var z = quantize(hyper_encode(b, c, t.latent), mode, rng);
  const Var raw = hyper_decode(b, c, z);
  t.rate_bits = ops::add(latent_rate(q, raw, c.mixtures), hyper_rate(z, b["codec.density"]));
  t.reconstruction = decode(b, c, q);
  t.mse = distortion(image, t.reconstruction);
  t.weighted_distortion = ops::scale(t.mse, distortion_weight(c, image.shape()[0], image.shape()[1]));
  t.loss = ops::add(t.rate_bits, t.weighted_distortion);
  return t;
}

double mse(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("mse: shape mismatch " + numerics::to_string(a.shape()) + " vs " +
                     numerics::to_string(b.shape()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total / static_cast<double>(a.size());
}

double psnr(const Tensor& a, const Tensor& b, double peak) {
  if (!(peak > 0.0)) throw ConfigError("psnr: peak must be positive");
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / m);
}

Tensor reflect_pad(const Tensor& image, std::size_t multiple) {
  if (image.rank() != 3) throw ShapeError("reflect_pad: expected (H, W, C), got " + numerics::to_string(image.shape()));
  if (multiple == 0) throw ConfigError("reflect_pad: multiple must be positive");
  const std::size_t H = image.extent(0), W = image.extent(1), C = image.extent(2);
  const std::size_t Hp = (H + multiple - 1) / multiple * multiple;
  const std::size_t Wp = (W + multiple - 1) / multiple * multiple;
  if (Hp == H && Wp == W) return image;
  Tensor out(Shape{Hp, Wp, C});
  for (std::size_t y = 0; y < Hp; ++y) {
    const std::size_t sy = reflect_index(static_cast<std::ptrdiff_t>(y), H);
    for (std::size_t x = 0; x < Wp; ++x) {
      const std::size_t sx = reflect_index(static_cast<std::ptrdiff_t>(x), W);
      for (std::size_t ch = 0; ch < C; ++ch) out[(y * Wp + x) * C + ch] = image[(sy * W + sx) * C + ch];
    }
  }
  return out;
}

Tensor crop(const Tensor& image, std::size_t height, std::size_t width) {
  if (image.rank() != 3 || height == 0 || width == 0 || height > image.extent(0) || width > image.extent(1)) {
    throw ShapeError("crop: cannot take " + std::to_string(height) + "x" + std::to_string(width) + " from " +
                     numerics::to_string(image.shape()));
  }
  const std::size_t W = image.extent(1), C = image.extent(2);
  Tensor out(Shape{height, width, C});
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width * C; ++x) out[y * width * C + x] = image[y * W * C + x];
  }
  return out;
}

}  // namespace jcif::codec

// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "jcif/codec/checkpoint.hpp"
#include "jcif/codec/coding.hpp"
#include "jcif/codec/likelihood.hpp"
#include "jcif/codec/model.hpp"
#include "jcif/common/error.hpp"
#include "jcif/numerics/gradcheck.hpp"
#include "jcif/numerics/ops.hpp"

namespace jcif::codec {
namespace {

using numerics::Bindings;
using numerics::ParameterSet;
using numerics::Shape;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

Tensor random_tensor(Shape shape, Rng& rng, double lo, double hi) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

CodecConfig tiny_config() {
  CodecConfig c;
  c.hidden1 = 4;
  c.hidden2 = 6;
  c.latent_channels = 3;
  c.hyper_hidden = 4;
  c.hyper_channels = 2;
  c.mixtures = 2;
  c.lambda = 0.01;
  return c;
}

// -log2 of the mass N(0,1) puts on [-1/2, 1/2], written with erf directly.
double unit_gaussian_zero_bits() { return -std::log2(std::erf(0.5 / std::numbers::sqrt2)); }

TEST(CodecModelTest, LatentShapeIsQuarterResolution) {
  ParameterSet params;
  const CodecConfig c;
  init_codec_params(params, c, 1);
  Tape tape;
  Bindings b(tape, params);
  Var y = encode(b, c, tape.constant(Tensor(Shape{32, 32, 3}, 0.5)));
  EXPECT_EQ(y.shape(), (Shape{8, 8, c.latent_channels}));
  Var z = hyper_encode(b, c, y);
  EXPECT_EQ(z.shape(), (Shape{4, 4, c.hyper_channels}));
  Var xr = decode(b, c, y);
  EXPECT_EQ(xr.shape(), (Shape{32, 32, 3}));
}

TEST(CodecModelTest, ZeroImageWithZeroFinalLayerGivesZeroLatent) {
  ParameterSet params;
  const CodecConfig c;
  init_codec_params(params, c, 2);
  for (auto& v : params.at("codec.analysis.2.weight").values()) v = 0.0;
  Tape tape;
  Bindings b(tape, params);
  Var y = encode(b, c, tape.constant(Tensor(Shape{32, 32, 3}, 0.0)));
  for (double v : y.value().values()) EXPECT_EQ(v, 0.0);
}

TEST(CodecModelTest, EncodeIsBitwiseRepeatable) {
  ParameterSet a, b2;
  const CodecConfig c;
  init_codec_params(a, c, 9);
  init_codec_params(b2, c, 9);
  EXPECT_TRUE(a == b2);
  Rng rng(4);
  const Tensor img = random_tensor(Shape{32, 32, 3}, rng, 0.0, 1.0);
  Tape t1, t2;
  Bindings b1(t1, a), bb(t2, b2);
  EXPECT_EQ(encode(b1, c, t1.constant(img)).value(), encode(bb, c, t2.constant(img)).value());
}

TEST(CodecModelTest, IndivisibleImageIsRejected) {
  ParameterSet params;
  const CodecConfig c;
  init_codec_params(params, c, 1);
  Tape tape;
  Bindings b(tape, params);
  EXPECT_THROW(encode(b, c, tape.constant(Tensor(Shape{30, 32, 3}))), ShapeError);
  EXPECT_THROW(decode(b, c, tape.constant(Tensor(Shape{8, 8, 5}))), ShapeError);
}

TEST(QuantizeTest, InferenceRoundsHalfAwayFromZero) {
  Tape tape;
  Rng rng(0);
  Var q = quantize(tape.constant(Tensor(Shape{3}, {0.4, -1.6, 2.5})), QuantizeMode::kInference, rng);
  EXPECT_EQ(q.value().values(), (std::vector<double>{0.0, -2.0, 3.0}));
}

TEST(QuantizeTest, TrainingNoiseIsBoundedCenteredAndSeeded) {
  Tape tape;
  Rng rng_a(123), rng_b(123);
  const Tensor x(Shape{100000}, 0.25);
  Var qa = quantize(tape.constant(x), QuantizeMode::kTraining, rng_a);
  Var qb = quantize(tape.constant(x), QuantizeMode::kTraining, rng_b);
  EXPECT_EQ(qa.value(), qb.value());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = qa.value()[i] - x[i];
    ASSERT_GE(d, -0.5);
    ASSERT_LE(d, 0.5);
    sum += d;
  }
  EXPECT_NEAR(sum / static_cast<double>(x.size()), 0.0, 0.01);
}

TEST(HyperPriorTest, MixtureParametersAreNormalized) {
  ParameterSet params;
  const CodecConfig c;
  init_codec_params(params, c, 5);
  // Push the output layer into extreme territory.
  Rng rng(8);
  for (auto& v : params.at("codec.hyper_synthesis.1.weight").values()) v = rng.normal(0.0, 5.0);
  for (auto& v : params.at("codec.hyper_synthesis.1.bias").values()) v = rng.normal(0.0, 30.0);
  for (int trial = 0; trial < 5; ++trial) {
    Tape tape;
    Bindings b(tape, params);
    Tensor z(Shape{4, 4, c.hyper_channels});
    for (auto& v : z.values()) v = std::round(rng.uniform(-20.0, 20.0));
    const Tensor raw = hyper_decode(b, c, tape.constant(z)).value();
    const MixtureTable t = mixture_table(raw, MixtureLayout{c.latent_channels, c.mixtures});
    ASSERT_EQ(t.size(), 8u * 8u * c.latent_channels);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto m = t.element(i);
      double s = 0.0;
      for (std::size_t k = 0; k < c.mixtures; ++k) {
        s += m.weights[k];
        ASSERT_GE(m.scales[k], kScaleFloor);
      }
      ASSERT_NEAR(s, 1.0, 1e-9);
    }
    Tape again;
    Bindings b2(again, params);
    EXPECT_EQ(hyper_decode(b2, c, again.constant(z)).value(), raw);
  }
}

// Raw parameters for a single element with one component.
Tensor single_gaussian(double mean, double scale) {
  // softplus(r) + floor = scale
  const double r = std::log(std::expm1(scale - kScaleFloor));
  return Tensor(Shape{1, 1, 3}, {0.0, mean, r});
}

TEST(LatentRateTest, UnitGaussianAtZero) {
  Tape tape;
  Var bits = latent_rate(tape.constant(Tensor(Shape{1, 1, 1}, 0.0)), tape.constant(single_gaussian(0.0, 1.0)), 1);
  EXPECT_NEAR(bits.value().item(), unit_gaussian_zero_bits(), 1e-9);
  EXPECT_NEAR(bits.value().item(), 1.385, 5e-4);
}

TEST(LatentRateTest, FarSymbolHitsProbabilityFloor) {
  Tape tape;
  Var bits = latent_rate(tape.constant(Tensor(Shape{1, 1, 1}, 60.0)), tape.constant(single_gaussian(0.0, 1.0)), 1);
  EXPECT_DOUBLE_EQ(bits.value().item(), 32.0);
}

TEST(LatentRateTest, GradientStaysFiniteFarBelowFloor) {
  Tensor p(Shape{3}, {0.0, 1e-310, 0.25});
  Tape tape;
  tape.backward(information_bits(tape.parameter(p)));
  const double at_floor = -1.0 / (kProbabilityFloor * std::numbers::ln2);
  EXPECT_DOUBLE_EQ(p.grad()[0], at_floor);
  EXPECT_DOUBLE_EQ(p.grad()[1], at_floor);
  EXPECT_DOUBLE_EQ(p.grad()[2], -1.0 / (0.25 * std::numbers::ln2));

  Tensor y(Shape{1, 1, 1}, 500.0);
  Tensor raw = single_gaussian(0.0, 1e-3);
  Tape t2;
  t2.backward(latent_rate(t2.parameter(y), t2.parameter(raw), 1));
  for (double g : y.grad()) EXPECT_TRUE(std::isfinite(g));
  for (double g : raw.grad()) EXPECT_TRUE(std::isfinite(g));
}

TEST(LatentRateTest, IndependentElementsAdd) {
  Rng rng(6);
  const std::size_t K = 3;
  Tensor raw = random_tensor(Shape{1, 2, 3 * K}, rng, -1.0, 1.0);
  Tensor y(Shape{1, 2, 1}, {1.0, -2.0});
  Tape tape;
  const double joint = latent_rate(tape.constant(y), tape.constant(raw), K).value().item();
  double split = 0.0;
  for (std::size_t e = 0; e < 2; ++e) {
    Tensor r1(Shape{1, 1, 3 * K});
    for (std::size_t j = 0; j < 3 * K; ++j) r1[j] = raw[e * 3 * K + j];
    split += latent_rate(tape.constant(Tensor(Shape{1, 1, 1}, y[e])), tape.constant(r1), K).value().item();
  }
  EXPECT_NEAR(joint, split, 1e-12);
}

TEST(LatentRateTest, PmfOverIntegersSumsToAtMostOne) {
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t K = 1 + rng.below(4);
    Tensor raw = random_tensor(Shape{1, 1, 3 * K}, rng, -2.0, 2.0);
    double total = 0.0;
    for (int s = -50; s <= 50; ++s) {
      Tape tape;
      const double bits = latent_rate(tape.constant(Tensor(Shape{1, 1, 1}, s)), tape.constant(raw), K).value().item();
      ASSERT_GE(bits, 0.0);
      total += std::exp2(-bits);
    }
    EXPECT_LE(total, 1.0 + 1e-6);
    EXPECT_GT(total, 0.99);
  }
}

TEST(HyperRateTest, MatchesCdfDifferenceAndIsAdditive) {
  const Tensor density = initial_density_params(2, 10.0, 3);
  const auto ch0 = density.data().subspan(0, kDensityParamsPerChannel);
  Tape tape;
  Var bits = hyper_rate(tape.constant(Tensor(Shape{1, 1, 2}, 0.0)), tape.constant(density));
  const double p0 = density_cdf(ch0, 0.5) - density_cdf(ch0, -0.5);
  const auto ch1 = density.data().subspan(kDensityParamsPerChannel, kDensityParamsPerChannel);
  const double p1 = density_cdf(ch1, 0.5) - density_cdf(ch1, -0.5);
  EXPECT_NEAR(bits.value().item(), -std::log2(p0) - std::log2(p1), 1e-9);

  Tensor za(Shape{1, 2, 2}, {0.0, 1.0, -3.0, 2.0});
  const double whole = hyper_rate(tape.constant(za), tape.constant(density)).value().item();
  const double left = hyper_rate(tape.constant(Tensor(Shape{1, 1, 2}, {0.0, 1.0})), tape.constant(density)).value().item();
  const double right = hyper_rate(tape.constant(Tensor(Shape{1, 1, 2}, {-3.0, 2.0})), tape.constant(density)).value().item();
  EXPECT_NEAR(whole, left + right, 1e-9);
}

TEST(HyperRateTest, DensityCdfIsMonotoneWithUnitLimits) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor d = initial_density_params(1, 10.0, rng.next_u64());
    for (auto& v : d.values()) v += rng.normal(0.0, 0.5);
    const auto p = d.data();
    double prev = density_cdf(p, -1e4);
    EXPECT_LT(prev, 1e-6);
    for (double x = -60.0; x <= 60.0; x += 0.25) {
      const double c = density_cdf(p, x);
      ASSERT_GE(c, prev);
      ASSERT_GE(density_interval(p, x, x), 0.0);
      prev = c;
    }
    EXPECT_GT(density_cdf(p, 1e4), 1.0 - 1e-6);
  }
}

TEST(DistortionTest, AnalyticCasesAndLoopOracle) {
  Tape tape;
  const Tensor zeros(Shape{4, 4, 3}, 0.0);
  EXPECT_EQ(distortion(tape.constant(zeros), tape.constant(zeros)).value().item(), 0.0);
  EXPECT_NEAR(distortion(tape.constant(zeros), tape.constant(Tensor(Shape{4, 4, 3}, 0.1))).value().item(), 0.01,
              1e-15);
  Rng rng(2);
  const Tensor a = random_tensor(Shape{5, 7, 3}, rng, 0.0, 1.0);
  const Tensor b = random_tensor(Shape{5, 7, 3}, rng, 0.0, 1.0);
  double oracle = 0.0;
  for (std::size_t y = 0; y < 5; ++y) {
    for (std::size_t x = 0; x < 7 * 3; ++x) {
      const double d = a[y * 21 + x] - b[y * 21 + x];
      oracle += d * d;
    }
  }
  oracle /= 105.0;
  EXPECT_NEAR(distortion(tape.constant(a), tape.constant(b)).value().item(), oracle, 1e-12);
  EXPECT_NEAR(mse(a, b), oracle, 1e-12);
  EXPECT_THROW(distortion(tape.constant(a), tape.constant(zeros)), ShapeError);
}

TEST(PsnrTest, AnalyticValuesAndSentinel) {
  const Tensor zeros(Shape{10}, 0.0);
  EXPECT_NEAR(psnr(zeros, Tensor(Shape{10}, 0.1)), 20.0, 1e-9);
  EXPECT_NEAR(psnr(zeros, Tensor(Shape{10}, 0.01)), 40.0, 1e-9);
  EXPECT_TRUE(is_lossless_psnr(psnr(zeros, zeros)));
}

TEST(CompressionLossTest, GradientMatchesFiniteDifferences) {
  const CodecConfig c = tiny_config();
  Rng img_rng(31);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    ParameterSet params;
    init_codec_params(params, c, seed);
    // Zero biases behind dead units put ReLUs exactly on their kink.
    Rng jitter(seed);
    for (const auto& name : params.names("codec.")) {
      if (name.ends_with(".bias")) {
        for (auto& v : params.at(name).values()) v = jitter.normal(0.0, 0.1);
      }
    }
    const Tensor img = random_tensor(Shape{8, 8, 3}, img_rng, 0.0, 1.0);
    std::vector<Tensor*> leaves;
    for (auto& [name, t] : params.tensors()) leaves.push_back(&t);
    auto loss = [&](Tape& tape) {
      Bindings b(tape, params, true);
      Rng noise(seed + 100);
      return compression_terms(b, c, tape.constant(img), QuantizeMode::kTraining, noise).loss;
    };
    numerics::GradCheckOptions opt;
    opt.max_coords_per_tensor = 12;
    opt.seed = seed;
    EXPECT_LT(numerics::max_relative_gradient_error(loss, leaves, opt), 1e-4) << "seed " << seed;
  }
}

TEST(CompressionLossTest, ZeroLambdaLeavesOnlyRate) {
  CodecConfig c = tiny_config();
  c.lambda = 0.0;
  ParameterSet params;
  init_codec_params(params, c.lambda > 0 ? c : tiny_config(), 1);
  Tape tape;
  Bindings b(tape, params);
  Rng rng(1);
  const auto t = compression_terms(b, c, tape.constant(Tensor(Shape{8, 8, 3}, 0.3)), QuantizeMode::kTraining, rng);
  EXPECT_EQ(t.loss.value().item(), t.rate_bits.value().item());
}

TEST(LikelihoodGradientTest, MixtureMatchesFiniteDifferences) {
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t K = 1 + rng.below(3);
    // Kept away from the probability floor, where the value saturates.
    Tensor y = random_tensor(Shape{2, 2, 2}, rng, -1.5, 1.5);
    Tensor raw = random_tensor(Shape{2, 2, 3 * K * 2}, rng, -1.0, 1.5);
    Tensor* leaves[] = {&y, &raw};
    auto f = [&](Tape& tape) {
      return information_bits(mixture_likelihood(tape.parameter(y), tape.parameter(raw), K));
    };
    EXPECT_LT(numerics::max_relative_gradient_error(f, leaves), 1e-4);
  }
}

TEST(LikelihoodGradientTest, FactorizedMatchesFiniteDifferences) {
  Rng rng(78);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor z = random_tensor(Shape{2, 2, 3}, rng, -4.0, 4.0);
    Tensor d = initial_density_params(3, 10.0, rng.next_u64());
    for (auto& v : d.values()) v += rng.normal(0.0, 0.3);
    Tensor* leaves[] = {&z, &d};
    auto f = [&](Tape& tape) { return information_bits(factorized_likelihood(tape.parameter(z), tape.parameter(d))); };
    EXPECT_LT(numerics::max_relative_gradient_error(f, leaves), 1e-4);
  }
}

TEST(CodingTest, RoundTripRecoversRoundedLatentsAndMatchesRate) {
  ParameterSet params;
  const CodecConfig c;
  init_codec_params(params, c, 21);
  Rng rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    const RasterImage img(random_tensor(Shape{32, 32, 3}, rng, 0.0, 1.0));
    const Analysis a = analyze(params, c, img);
    const CompressedImage streams = entropy_code(params, c, a);
    const auto before = decode_operation_count();
    EXPECT_EQ(decode_symbols(params, c, streams), a.latent_symbols);
    EXPECT_EQ(decode_operation_count(), before + 1);
    const MixtureTable table = mixture_table(a.mixture_raw, MixtureLayout{c.latent_channels, c.mixtures});
    double ideal = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
      ideal += latent_symbol_model(table.element(i)).ideal_bits(static_cast<int>(a.latent_symbols[i]));
    }
    EXPECT_LE(static_cast<double>(streams.latent.payload_bits), ideal + 64.0);
    const double bits = static_cast<double>(streams.payload_bits());
    EXPECT_LE(std::abs(bits - a.estimated_bits), 0.02 * a.estimated_bits + 64.0)
        << bits << " vs " << a.estimated_bits;
    const RasterImage out = decompress(params, c, streams);
    EXPECT_EQ(out.height(), 32u);
    for (double v : out.data()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(CodingTest, PaddedImagesAreCroppedBack) {
  ParameterSet params;
  const CodecConfig c;
  init_codec_params(params, c, 22);
  Rng rng(6);
  const RasterImage img(random_tensor(Shape{30, 29, 3}, rng, 0.0, 1.0));
  const CompressedImage s = compress(params, c, img);
  EXPECT_EQ(s.latent.shape[1], 8u);
  const RasterImage out = decompress(params, c, s, std::pair<std::size_t, std::size_t>{30, 29});
  EXPECT_EQ(out.height(), 30u);
  EXPECT_EQ(out.width(), 29u);
}

TEST(CodingTest, MismatchedStreamIsRejected) {
  ParameterSet params;
  const CodecConfig c;
  init_codec_params(params, c, 23);
  CompressedImage s = compress(params, c, RasterImage(32, 32, 3, 0.5));
  std::swap(s.hyper, s.latent);
  EXPECT_THROW(decode_symbols(params, c, s), FormatError);
}

TEST(PaddingTest, ReflectPadMirrorsEdges) {
  Tensor img(Shape{3, 2, 1}, {1, 2, 3, 4, 5, 6});
  const Tensor p = reflect_pad(img, 4);
  ASSERT_EQ(p.shape(), (Shape{4, 4, 1}));
  // Row 3 mirrors row 1; column 2 mirrors column 0.
  EXPECT_EQ(p[3 * 4 + 0], 3.0);
  EXPECT_EQ(p[0 * 4 + 2], 1.0);
  EXPECT_EQ(p[0 * 4 + 3], 2.0);
  EXPECT_EQ(crop(p, 3, 2), img);
}

TEST(CheckpointTest, RoundTripsParametersAndConfig) {
  ParameterSet params;
  const CodecConfig c = tiny_config();
  init_codec_params(params, c, 4);
  const auto path = std::filesystem::temp_directory_path() / "jcif_codec_ckpt_test.jctf";
  save_checkpoint(path, params, {{"meta.codec_config", c.to_tensor()}});
  const Checkpoint ck = load_checkpoint(path);
  EXPECT_TRUE(ck.params == params);
  EXPECT_EQ(CodecConfig::from_tensor(ck.require_meta("meta.codec_config")), c);
  EXPECT_THROW(ck.require_meta("meta.hash_config"), FormatError);
  std::filesystem::remove(path);
}

TEST(CheckpointTest, CorruptConfigRecordIsFormatError) {
  EXPECT_THROW(CodecConfig::from_tensor(Tensor(Shape{8}, {3, 0, 1, 1, 1, 1, 1, 0.1})), FormatError);
  EXPECT_THROW(CodecConfig::from_tensor(Tensor(Shape{3})), FormatError);
}

}  // namespace
}  // namespace jcif::codec

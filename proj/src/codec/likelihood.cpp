// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/codec/likelihood.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "jcif/common/error.hpp"
#include "jcif/common/random.hpp"

namespace jcif::codec {

using numerics::BackwardArgs;
using numerics::Primitive;
using numerics::Shape;
using numerics::Tensor;
using numerics::Var;

namespace {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double softplus(double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }
double sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

// P(a <= Y < b) for Y ~ N(mean, scale), taken on the side of the mean
// where both CDF values are small.
double gaussian_interval(double mean, double scale, double a, double b) {
  if (0.5 * (a + b) > mean) {
    return normal_cdf((mean - a) / scale) - normal_cdf((mean - b) / scale);
  }
  return normal_cdf((b - mean) / scale) - normal_cdf((a - mean) / scale);
}

void require_rank3(const char* op, const Var& v) {
  if (v.value().rank() != 3) {
    throw ShapeError(std::string(op) + ": expected (H, W, C), got " + numerics::to_string(v.shape()));
  }
}

struct ComponentView {
  std::size_t k;
  double weight;
  double mean;
  double scale;
  double raw_scale;
};

// Offsets of the 43 per-channel density parameters.
struct DensityLayer {
  std::size_t in, out, matrix, bias, factor;  // factor == npos for the last layer
};
constexpr std::size_t kNone = static_cast<std::size_t>(-1);
constexpr std::array<DensityLayer, 4> kLayers{{
    {1, 3, 0, 3, 6},
    {3, 3, 9, 18, 21},
    {3, 3, 24, 33, 36},
    {3, 1, 39, 42, kNone},
}};

struct DensityTrace {
  std::array<std::array<double, 3>, 4> input{};
  std::array<std::array<double, 3>, 4> pre{};
  double logit = 0.0;
};

DensityTrace density_forward(std::span<const double> p, double x) {
  DensityTrace t;
  std::array<double, 3> h{x, 0.0, 0.0};
  for (std::size_t l = 0; l < kLayers.size(); ++l) {
    const auto& L = kLayers[l];
    t.input[l] = h;
    std::array<double, 3> u{};
    for (std::size_t r = 0; r < L.out; ++r) {
      double acc = p[L.bias + r];
      for (std::size_t c = 0; c < L.in; ++c) acc += softplus(p[L.matrix + r * L.in + c]) * h[c];
      u[r] = acc;
    }
    t.pre[l] = u;
    if (L.factor == kNone) {
      t.logit = u[0];
    } else {
      for (std::size_t r = 0; r < L.out; ++r) h[r] = u[r] + std::tanh(p[L.factor + r]) * std::tanh(u[r]);
    }
  }
  return t;
}

// Accumulates g * d(logit)/d(params) into gp (if non-empty); returns g * d(logit)/dx.
double density_backward(std::span<const double> p, const DensityTrace& t, double g, std::span<double> gp) {
  std::array<double, 3> gh{g, 0.0, 0.0};
  for (std::size_t l = kLayers.size(); l-- > 0;) {
    const auto& L = kLayers[l];
    std::array<double, 3> gu{};
    if (L.factor == kNone) {
      gu[0] = gh[0];
    } else {
      for (std::size_t r = 0; r < L.out; ++r) {
        const double ta = std::tanh(p[L.factor + r]);
        const double tu = std::tanh(t.pre[l][r]);
        gu[r] = gh[r] * (1.0 + ta * (1.0 - tu * tu));
        if (!gp.empty()) gp[L.factor + r] += gh[r] * (1.0 - ta * ta) * tu;
      }
    }
    std::array<double, 3> gin{};
    for (std::size_t r = 0; r < L.out; ++r) {
      if (!gp.empty()) gp[L.bias + r] += gu[r];
      for (std::size_t c = 0; c < L.in; ++c) {
        const double w = p[L.matrix + r * L.in + c];
        if (!gp.empty()) gp[L.matrix + r * L.in + c] += gu[r] * sigmoid(w) * t.input[l][c];
        gin[c] += gu[r] * softplus(w);
      }
    }
    gh = gin;
  }
  return gh[0];
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

MixtureElement MixtureTable::element(std::size_t i) const {
  const std::size_t o = i * components;
  return {std::span(weights).subspan(o, components), std::span(means).subspan(o, components),
          std::span(scales).subspan(o, components)};
}

double mixture_interval(const MixtureElement& m, double lo, double hi) {
  double p = 0.0;
  for (std::size_t k = 0; k < m.weights.size(); ++k) {
    p += m.weights[k] * gaussian_interval(m.means[k], m.scales[k], lo - 0.5, hi + 0.5);
  }
  return p;
}

double mixture_probability(const MixtureElement& m, double symbol) { return mixture_interval(m, symbol, symbol); }

MixtureTable mixture_table(const Tensor& raw, MixtureLayout layout) {
  const std::size_t rc = layout.raw_channels();
  if (raw.rank() != 3 || raw.extent(2) != rc) {
    throw ShapeError("mixture parameters: expected (H, W, " + std::to_string(rc) + "), got " +
                     numerics::to_string(raw.shape()));
  }
  const std::size_t C = layout.channels;
  const std::size_t K = layout.components;
  const std::size_t positions = raw.extent(0) * raw.extent(1);
  MixtureTable t;
  t.components = K;
  t.weights.resize(positions * C * K);
  t.means.resize(positions * C * K);
  t.scales.resize(positions * C * K);
  for (std::size_t pos = 0; pos < positions; ++pos) {
    const double* r = raw.data().data() + pos * rc;
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t o = (pos * C + c) * K;
      double mx = -INFINITY;
      for (std::size_t k = 0; k < K; ++k) mx = std::max(mx, r[k * C + c]);
      double z = 0.0;
      for (std::size_t k = 0; k < K; ++k) z += t.weights[o + k] = std::exp(r[k * C + c] - mx);
      for (std::size_t k = 0; k < K; ++k) {
        t.weights[o + k] /= z;
        t.means[o + k] = r[K * C + k * C + c];
        t.scales[o + k] = softplus(r[2 * K * C + k * C + c]) + kScaleFloor;
      }
    }
  }
  return t;
}

Var mixture_likelihood(Var symbols, Var raw, std::size_t components) {
  require_rank3("mixture_likelihood", symbols);
  require_rank3("mixture_likelihood", raw);
  if (components == 0) throw ConfigError("mixture_likelihood: need at least one component");
  const Shape& s = symbols.shape();
  const std::size_t C = s[2];
  const MixtureLayout layout{C, components};
  if (raw.shape() != Shape{s[0], s[1], layout.raw_channels()}) {
    throw ShapeError("mixture_likelihood: parameters " + numerics::to_string(raw.shape()) +
                     " do not match symbols " + numerics::to_string(s) + " with " +
                     std::to_string(components) + " components");
  }
  const Tensor* yv = &symbols.value();
  const Tensor* rv = &raw.value();
  const MixtureTable table = mixture_table(*rv, layout);
  Tensor out(s);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mixture_probability(table.element(i), (*yv)[i]);

  return symbols.tape().record(
      Primitive::kMixtureLikelihood, std::move(out), {symbols, raw},
      [yv, rv, layout](BackwardArgs& args) {
        auto gy = args.in_grads[0];
        auto gr = args.in_grads[1];
        const std::size_t C = layout.channels;
        const std::size_t K = layout.components;
        const std::size_t rc = layout.raw_channels();
        const MixtureTable table = mixture_table(*rv, layout);
        std::vector<double> pk(K), dpdu(K), dpds(K);
        for (std::size_t i = 0; i < yv->size(); ++i) {
          const double g = args.out_grad[i];
          if (g == 0.0) continue;
          const auto m = table.element(i);
          double p = 0.0;
          for (std::size_t k = 0; k < K; ++k) {
            const double sc = m.scales[k];
            const double u = (*yv)[i] - m.means[k];
            const double a = (u + 0.5) / sc;
            const double b = (u - 0.5) / sc;
            pk[k] = gaussian_interval(m.means[k], sc, (*yv)[i] - 0.5, (*yv)[i] + 0.5);
            dpdu[k] = (normal_pdf(a) - normal_pdf(b)) / sc;
            dpds[k] = (b * normal_pdf(b) - a * normal_pdf(a)) / sc;
            p += m.weights[k] * pk[k];
          }
          if (!gy.empty()) {
            double d = 0.0;
            for (std::size_t k = 0; k < K; ++k) d += m.weights[k] * dpdu[k];
            gy[i] += g * d;
          }
          if (!gr.empty()) {
            const std::size_t pos = i / C;
            const std::size_t c = i % C;
            const double* r = rv->data().data() + pos * rc;
            double* gri = gr.data() + pos * rc;
            for (std::size_t k = 0; k < K; ++k) {
              gri[k * C + c] += g * m.weights[k] * (pk[k] - p);
              gri[K * C + k * C + c] -= g * m.weights[k] * dpdu[k];
              gri[2 * K * C + k * C + c] += g * m.weights[k] * dpds[k] * sigmoid(r[2 * K * C + k * C + c]);
            }
          }
        }
      });
}

Tensor initial_density_params(std::size_t channels, double init_scale, std::uint64_t seed) {
  if (channels == 0 || !(init_scale > 0.0)) throw ConfigError("density: need channels > 0 and init_scale > 0");
  Tensor t(Shape{channels, kDensityParamsPerChannel});
  Rng rng(seed);
  const double scale = std::pow(init_scale, 1.0 / static_cast<double>(kLayers.size()));
  for (std::size_t c = 0; c < channels; ++c) {
    double* p = t.data().data() + c * kDensityParamsPerChannel;
    for (const auto& L : kLayers) {
      const double w = std::log(std::expm1(1.0 / scale / static_cast<double>(L.out)));
      for (std::size_t j = 0; j < L.out * L.in; ++j) p[L.matrix + j] = w;
      for (std::size_t j = 0; j < L.out; ++j) p[L.bias + j] = rng.uniform(-0.5, 0.5);
      if (L.factor != kNone) {
        for (std::size_t j = 0; j < L.out; ++j) p[L.factor + j] = 0.0;
      }
    }
  }
  return t;
}

double density_logit(std::span<const double> channel_params, double x) {
  if (channel_params.size() != kDensityParamsPerChannel) {
    throw ShapeError("density: expected 43 parameters per channel");
  }
  return density_forward(channel_params, x).logit;
}

double density_cdf(std::span<const double> channel_params, double x) {
  return sigmoid(density_logit(channel_params, x));
}

double density_interval(std::span<const double> channel_params, double lo, double hi) {
  const double a = density_logit(channel_params, lo - 0.5);
  const double b = density_logit(channel_params, hi + 0.5);
  if (a + b > 0.0) return sigmoid(-a) - sigmoid(-b);
  return sigmoid(b) - sigmoid(a);
}

Var factorized_likelihood(Var symbols, Var params) {
  require_rank3("factorized_likelihood", symbols);
  const std::size_t C = symbols.shape()[2];
  if (params.shape() != Shape{C, kDensityParamsPerChannel}) {
    throw ShapeError("factorized_likelihood: parameters " + numerics::to_string(params.shape()) +
                     " do not match " + std::to_string(C) + " channels");
  }
  const Tensor* zv = &symbols.value();
  const Tensor* pv = &params.value();
  Tensor out(symbols.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = density_interval(pv->data().subspan((i % C) * kDensityParamsPerChannel, kDensityParamsPerChannel),
                              (*zv)[i], (*zv)[i]);
  }
  return symbols.tape().record(
      Primitive::kFactorizedLikelihood, std::move(out), {symbols, params}, [zv, pv, C](BackwardArgs& args) {
        auto gz = args.in_grads[0];
        auto gp_all = args.in_grads[1];
        for (std::size_t i = 0; i < zv->size(); ++i) {
          const double g = args.out_grad[i];
          if (g == 0.0) continue;
          const std::size_t c = i % C;
          const auto p = pv->data().subspan(c * kDensityParamsPerChannel, kDensityParamsPerChannel);
          const auto gp = gp_all.empty() ? std::span<double>{}
                                         : gp_all.subspan(c * kDensityParamsPerChannel, kDensityParamsPerChannel);
          const auto lo = density_forward(p, (*zv)[i] - 0.5);
          const auto hi = density_forward(p, (*zv)[i] + 0.5);
          // d sigmoid(v)/dv is symmetric, so both sides of the sign trick share it.
          const double dlo = -sigmoid(lo.logit) * sigmoid(-lo.logit);
          const double dhi = sigmoid(hi.logit) * sigmoid(-hi.logit);
          const double dx = density_backward(p, lo, g * dlo, gp) + density_backward(p, hi, g * dhi, gp);
          if (!gz.empty()) gz[i] += dx;
        }
      });
}

Var information_bits(Var probabilities) {
  const Tensor* pv = &probabilities.value();
  double bits = 0.0;
  for (double p : pv->values()) bits -= std::log2(std::max(p, kProbabilityFloor));
  return probabilities.tape().record(
      Primitive::kInformationBits, Tensor::scalar(bits), {probabilities}, [pv](BackwardArgs& args) {
        auto g = args.in_grads[0];
        if (g.empty()) return;
        for (std::size_t i = 0; i < g.size(); ++i) {
          // Below the floor the gradient keeps pushing p up, at the floor's magnitude.
          const double p = std::max((*pv)[i], kProbabilityFloor);
          g[i] -= args.out_grad[0] / (p * std::numbers::ln2);
        }
      });
}

}  // namespace jcif::codec

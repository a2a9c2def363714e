// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/numerics/ops.hpp"

#include <Eigen/Core>
#include <cmath>
#include <memory>

#include "jcif/common/error.hpp"

namespace jcif::numerics {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

void require_same_shape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

void require_rank(const char* op, Var x, std::size_t rank) {
  if (x.value().rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     to_string(x.shape()));
  }
}

}  // namespace

double round_half_away(double v) { return std::round(v); }

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.tape().record(Primitive::kAdd, std::move(out), {a, b}, [](BackwardArgs& args) {
    for (auto g : args.in_grads) {
      if (g.empty()) continue;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += args.out_grad[i];
    }
  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return a.tape().record(Primitive::kSub, std::move(out), {a, b}, [](BackwardArgs& args) {
    if (auto g = args.in_grads[0]; !g.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += args.out_grad[i];
    }
    if (auto g = args.in_grads[1]; !g.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= args.out_grad[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  const Tensor* av = &a.value();
  const Tensor* bv = &b.value();
  Tensor out(av->shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*av)[i] * (*bv)[i];
  return a.tape().record(Primitive::kMul, std::move(out), {a, b}, [av, bv](BackwardArgs& args) {
    if (auto g = args.in_grads[0]; !g.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += args.out_grad[i] * (*bv)[i];
    }
    if (auto g = args.in_grads[1]; !g.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += args.out_grad[i] * (*av)[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (auto& v : out.values()) v *= factor;
  return a.tape().record(Primitive::kScale, std::move(out), {a}, [factor](BackwardArgs& args) {
    auto g = args.in_grads[0];
    if (g.empty()) return;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * args.out_grad[i];
  });
}

Var add_scalar(Var a, double offset) {
  Tensor out = a.value();
  for (auto& v : out.values()) v += offset;
  return a.tape().record(Primitive::kAddScalar, std::move(out), {a}, [](BackwardArgs& args) {
    auto g = args.in_grads[0];
    if (g.empty()) return;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += args.out_grad[i];
  });
}

Var matmul(Var a, Var b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw ShapeError("matmul: inner dimensions differ " + to_string(a.shape()) + " x " +
                     to_string(b.shape()));
  }
  const Tensor* av = &a.value();
  const Tensor* bv = &b.value();
  Tensor out(Shape{m, n});
  MutMap(out.data().data(), m, n).noalias() =
      ConstMap(av->data().data(), m, k) * ConstMap(bv->data().data(), k, n);
  return a.tape().record(Primitive::kMatMul, std::move(out), {a, b},
                         [av, bv, m, k, n](BackwardArgs& args) {
                           ConstMap dy(args.out_grad.data(), m, n);
                           if (auto g = args.in_grads[0]; !g.empty()) {
                             MutMap(g.data(), m, k).noalias() +=
                                 dy * ConstMap(bv->data().data(), k, n).transpose();
                           }
                           if (auto g = args.in_grads[1]; !g.empty()) {
                             MutMap(g.data(), k, n).noalias() +=
                                 ConstMap(av->data().data(), m, k).transpose() * dy;
                           }
                         });
}

Var transpose(Var a) {
  require_rank("transpose", a, 2);
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  Tensor out(Shape{n, m});
  MutMap(out.data().data(), n, m) = ConstMap(a.value().data().data(), m, n).transpose();
  return a.tape().record(Primitive::kTranspose, std::move(out), {a}, [m, n](BackwardArgs& args) {
    auto g = args.in_grads[0];
    if (g.empty()) return;
    MutMap(g.data(), m, n) += ConstMap(args.out_grad.data(), n, m).transpose();
  });
}

namespace {

struct ConvGeometry {
  std::size_t h, w, cin, kh, kw, cout, stride, pad, ho, wo;
  std::size_t patch() const { return kh * kw * cin; }
};

void im2col(const ConvGeometry& g, const double* x, double* cols) {
  for (std::size_t oy = 0; oy < g.ho; ++oy) {
    for (std::size_t ox = 0; ox < g.wo; ++ox) {
      double* row = cols + (oy * g.wo + ox) * g.patch();
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                        static_cast<std::ptrdiff_t>(g.pad);
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                          static_cast<std::ptrdiff_t>(g.pad);
          double* dst = row + (ky * g.kw + kx) * g.cin;
          if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(g.h) ||
              ix >= static_cast<std::ptrdiff_t>(g.w)) {
            std::fill(dst, dst + g.cin, 0.0);
          } else {
            const double* src = x + (static_cast<std::size_t>(iy) * g.w +
                                      static_cast<std::size_t>(ix)) * g.cin;
            std::copy(src, src + g.cin, dst);
          }
        }
      }
    }
  }
}

void col2im_add(const ConvGeometry& g, const double* cols, double* dx) {
  for (std::size_t oy = 0; oy < g.ho; ++oy) {
    for (std::size_t ox = 0; ox < g.wo; ++ox) {
      const double* row = cols + (oy * g.wo + ox) * g.patch();
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                        static_cast<std::ptrdiff_t>(g.pad);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                          static_cast<std::ptrdiff_t>(g.pad);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
          const double* src = row + (ky * g.kw + kx) * g.cin;
          double* dst = dx + (static_cast<std::size_t>(iy) * g.w +
                              static_cast<std::size_t>(ix)) * g.cin;
          for (std::size_t c = 0; c < g.cin; ++c) dst[c] += src[c];
        }
      }
    }
  }
}

}  // namespace

Var conv2d(Var input, Var kernel, Conv2dOptions options) {
  require_rank("conv2d input", input, 3);
  require_rank("conv2d kernel", kernel, 4);
  if (options.stride == 0) throw ShapeError("conv2d: stride must be positive");
  const Shape& xs = input.shape();
  const Shape& ks = kernel.shape();
  if (ks[2] != xs[2]) {
    throw ShapeError("conv2d: input channels " + std::to_string(xs[2]) +
                     " do not match kernel " + to_string(ks));
  }
  ConvGeometry g{xs[0], xs[1], xs[2], ks[0], ks[1], ks[3], options.stride, options.padding, 0, 0};
  if (g.h + 2 * g.pad < g.kh || g.w + 2 * g.pad < g.kw) {
    throw ShapeError("conv2d: kernel " + to_string(ks) + " larger than padded input " +
                     to_string(xs));
  }
  g.ho = (g.h + 2 * g.pad - g.kh) / g.stride + 1;
  g.wo = (g.w + 2 * g.pad - g.kw) / g.stride + 1;

  const std::size_t rows = g.ho * g.wo;
  auto cols = std::make_shared<std::vector<double>>(rows * g.patch());
  im2col(g, input.value().data().data(), cols->data());

  const Tensor* kv = &kernel.value();
  Tensor out(Shape{g.ho, g.wo, g.cout});
  MutMap(out.data().data(), rows, g.cout).noalias() =
      ConstMap(cols->data(), rows, g.patch()) * ConstMap(kv->data().data(), g.patch(), g.cout);

  return input.tape().record(
      Primitive::kConv2d, std::move(out), {input, kernel}, [g, cols, kv, rows](BackwardArgs& args) {
        ConstMap dy(args.out_grad.data(), rows, g.cout);
        if (auto gk = args.in_grads[1]; !gk.empty()) {
          MutMap(gk.data(), g.patch(), g.cout).noalias() +=
              ConstMap(cols->data(), rows, g.patch()).transpose() * dy;
        }
        if (auto gx = args.in_grads[0]; !gx.empty()) {
          std::vector<double> dcols(rows * g.patch());
          MutMap(dcols.data(), rows, g.patch()).noalias() =
              dy * ConstMap(kv->data().data(), g.patch(), g.cout).transpose();
          col2im_add(g, dcols.data(), gx.data());
        }
      });
}

Var bias_add(Var x, Var bias) {
  require_rank("bias_add bias", bias, 1);
  const Shape& xs = x.shape();
  const std::size_t c = bias.shape()[0];
  if (xs.empty() || xs.back() != c) {
    throw ShapeError("bias_add: bias " + to_string(bias.shape()) + " does not match last axis of " +
                     to_string(xs));
  }
  Tensor out = x.value();
  const Tensor& bv = bias.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i % c];
  return x.tape().record(Primitive::kBiasAdd, std::move(out), {x, bias}, [c](BackwardArgs& args) {
    if (auto g = args.in_grads[0]; !g.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += args.out_grad[i];
    }
    if (auto g = args.in_grads[1]; !g.empty()) {
      for (std::size_t i = 0; i < args.out_grad.size(); ++i) g[i % c] += args.out_grad[i];
    }
  });
}

namespace {

double stable_sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

double stable_softplus(double v) { return v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

// Elementwise op where the backward rule reads the input value only.
template <typename Fwd, typename Deriv>
Var elementwise(Primitive kind, Var x, Fwd fwd, Deriv deriv) {
  const Tensor* xv = &x.value();
  Tensor out(xv->shape());
  for (std::size_t i = 0; i < xv->size(); ++i) out[i] = fwd((*xv)[i]);
  return x.tape().record(kind, std::move(out), {x}, [xv, deriv](BackwardArgs& args) {
    auto g = args.in_grads[0];
    if (g.empty()) return;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += args.out_grad[i] * deriv((*xv)[i]);
  });
}

}  // namespace

Var relu(Var x) {
  return elementwise(
      Primitive::kRelu, x, [](double v) { return v > 0 ? v : 0.0; },
      [](double v) { return v > 0 ? 1.0 : 0.0; });
}

Var sigmoid(Var x) {
  return elementwise(Primitive::kSigmoid, x, stable_sigmoid, [](double v) {
    const double s = stable_sigmoid(v);
    return s * (1.0 - s);
  });
}

Var log(Var x) {
  const Tensor& xv = x.value();
  for (double v : xv.values()) {
    if (!(v > 0.0)) throw NumericError("log: non-positive input");
  }
  return elementwise(
      Primitive::kLog, x, [](double v) { return std::log(v); }, [](double v) { return 1.0 / v; });
}

Var exp(Var x) {
  return elementwise(
      Primitive::kExp, x, [](double v) { return std::exp(v); }, [](double v) { return std::exp(v); });
}

Var softplus(Var x) { return elementwise(Primitive::kSoftplus, x, stable_softplus, stable_sigmoid); }

Var square(Var x) {
  return elementwise(
      Primitive::kSquare, x, [](double v) { return v * v; }, [](double v) { return 2.0 * v; });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return x.tape().record(Primitive::kSum, Tensor::scalar(total), {x}, [](BackwardArgs& args) {
    auto g = args.in_grads[0];
    if (g.empty()) return;
    for (auto& v : g) v += args.out_grad[0];
  });
}

Var mean(Var x) {
  const double n = static_cast<double>(x.value().size());
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return x.tape().record(Primitive::kMean, Tensor::scalar(total / n), {x}, [n](BackwardArgs& args) {
    auto g = args.in_grads[0];
    if (g.empty()) return;
    for (auto& v : g) v += args.out_grad[0] / n;
  });
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) throw ShapeError("concat: axis out of range for " + to_string(first));
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const Var& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size()) throw ShapeError("concat: rank mismatch");
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != first[d]) {
        throw ShapeError("concat: extents differ " + to_string(first) + " vs " + to_string(s));
      }
    }
    out_shape[axis] += s[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];

  std::vector<std::size_t> widths;  // elements per outer slice, per part
  for (const Var& p : parts) widths.push_back(p.shape()[axis] * inner);
  const std::size_t out_width = out_shape[axis] * inner;

  Tensor out(out_shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(pv.data().begin() + static_cast<std::ptrdiff_t>(o * widths[k]), widths[k],
                  out.data().begin() + static_cast<std::ptrdiff_t>(o * out_width + offset));
    }
    offset += widths[k];
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape().record(
      Primitive::kConcat, std::move(out), std::move(inputs),
      [widths, outer, out_width](BackwardArgs& args) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < widths.size(); ++k) {
          if (auto g = args.in_grads[k]; !g.empty()) {
            for (std::size_t o = 0; o < outer; ++o) {
              for (std::size_t i = 0; i < widths[k]; ++i) {
                g[o * widths[k] + i] += args.out_grad[o * out_width + off + i];
              }
            }
          }
          off += widths[k];
        }
      });
}

Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return x.tape().record(Primitive::kReshape, std::move(out), {x}, [](BackwardArgs& args) {
    auto g = args.in_grads[0];
    if (g.empty()) return;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += args.out_grad[i];
  });
}

Var upsample2x(Var x) {
  require_rank("upsample2x", x, 3);
  const std::size_t h = x.shape()[0], w = x.shape()[1], c = x.shape()[2];
  const Tensor& xv = x.value();
  Tensor out(Shape{2 * h, 2 * w, c});
  for (std::size_t y = 0; y < 2 * h; ++y) {
    for (std::size_t xx = 0; xx < 2 * w; ++xx) {
      const double* src = xv.data().data() + ((y / 2) * w + xx / 2) * c;
      std::copy_n(src, c, out.data().data() + (y * 2 * w + xx) * c);
    }
  }
  return x.tape().record(Primitive::kUpsample2x, std::move(out), {x}, [h, w, c](BackwardArgs& args) {
    auto g = args.in_grads[0];
    if (g.empty()) return;
    for (std::size_t y = 0; y < 2 * h; ++y) {
      for (std::size_t xx = 0; xx < 2 * w; ++xx) {
        const double* src = args.out_grad.data() + (y * 2 * w + xx) * c;
        double* dst = g.data() + ((y / 2) * w + xx / 2) * c;
        for (std::size_t k = 0; k < c; ++k) dst[k] += src[k];
      }
    }
  });
}

Var global_avg_pool(Var x) {
  require_rank("global_avg_pool", x, 3);
  const std::size_t hw = x.shape()[0] * x.shape()[1], c = x.shape()[2];
  const Tensor& xv = x.value();
  Tensor out(Shape{c});
  for (std::size_t p = 0; p < hw; ++p) {
    for (std::size_t k = 0; k < c; ++k) out[k] += xv[p * c + k];
  }
  for (auto& v : out.values()) v /= static_cast<double>(hw);
  return x.tape().record(Primitive::kGlobalAvgPool, std::move(out), {x}, [hw, c](BackwardArgs& args) {
    auto g = args.in_grads[0];
    if (g.empty()) return;
    const double inv = 1.0 / static_cast<double>(hw);
    for (std::size_t p = 0; p < hw; ++p) {
      for (std::size_t k = 0; k < c; ++k) g[p * c + k] += args.out_grad[k] * inv;
    }
  });
}

Var channel_scale(Var x, Var gate) {
  require_rank("channel_scale", x, 3);
  require_rank("channel_scale gate", gate, 1);
  const std::size_t c = x.shape()[2];
  if (gate.shape()[0] != c) {
    throw ShapeError("channel_scale: gate " + to_string(gate.shape()) + " vs input " +
                     to_string(x.shape()));
  }
  const Tensor* xv = &x.value();
  const Tensor* gv = &gate.value();
  Tensor out(xv->shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*xv)[i] * (*gv)[i % c];
  return x.tape().record(Primitive::kChannelScale, std::move(out), {x, gate},
                         [xv, gv, c](BackwardArgs& args) {
                           if (auto g = args.in_grads[0]; !g.empty()) {
                             for (std::size_t i = 0; i < g.size(); ++i) {
                               g[i] += args.out_grad[i] * (*gv)[i % c];
                             }
                           }
                           if (auto g = args.in_grads[1]; !g.empty()) {
                             for (std::size_t i = 0; i < args.out_grad.size(); ++i) {
                               g[i % c] += args.out_grad[i] * (*xv)[i];
                             }
                           }
                         });
}

namespace {
template <typename Fwd>
Var straight_through(Primitive kind, Var x, Fwd fwd) {
  Tensor out = x.value();
  for (auto& v : out.values()) v = fwd(v);
  return x.tape().record(kind, std::move(out), {x}, [](BackwardArgs& args) {
    auto g = args.in_grads[0];
    if (g.empty()) return;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += args.out_grad[i];
  });
}
}  // namespace

Var round_ste(Var x) { return straight_through(Primitive::kRoundSte, x, round_half_away); }

Var sign_ste(Var x) { return straight_through(Primitive::kSignSte, x, sign_plus); }

}  // namespace jcif::numerics

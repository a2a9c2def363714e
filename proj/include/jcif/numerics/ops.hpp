// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "jcif/numerics/tape.hpp"

namespace jcif::numerics {

// Elementwise; shapes must match exactly.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);

// (m,k) x (k,n) -> (m,n)
Var matmul(Var a, Var b);
Var transpose(Var a);

struct Conv2dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

// input (H, W, Cin), kernel (kh, kw, Cin, Cout) -> (Ho, Wo, Cout), zero padding.
Var conv2d(Var input, Var kernel, Conv2dOptions options = {});

// Adds a bias vector over the last axis. The only broadcasting primitive.
Var bias_add(Var x, Var bias);

Var relu(Var x);
Var sigmoid(Var x);
Var log(Var x);
Var exp(Var x);
// log(1 + e^x), evaluated stably.
Var softplus(Var x);
Var square(Var x);

Var sum(Var x);
Var mean(Var x);

// Concatenates along `axis`; all other extents must agree.
Var concat(std::span<const Var> parts, std::size_t axis);
Var reshape(Var x, Shape shape);

// Nearest-neighbour 2x upsampling of an (H, W, C) tensor.
Var upsample2x(Var x);
// (H, W, C) -> (C)
Var global_avg_pool(Var x);
// Multiplies each channel of an (H, W, C) tensor by gate[c].
Var channel_scale(Var x, Var gate);

// Straight-through estimators: hard forward, identity backward.
// Rounding is half away from zero; sign(0) is +1.
Var round_ste(Var x);
Var sign_ste(Var x);

double round_half_away(double v);
inline double sign_plus(double v) { return v >= 0.0 ? 1.0 : -1.0; }

}  // namespace jcif::numerics

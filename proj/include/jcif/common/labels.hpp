// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace jcif {

// C-dimensional binary multi-label vector; entry c is 1 iff class c is present.
using LabelVector = std::vector<std::uint8_t>;

// q-dimensional code with components in {-1, +1}.
using HashCode = std::vector<std::int8_t>;

}  // namespace jcif

// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#include "jcif/entropy/symbol_model.hpp"

#include <algorithm>
#include <cmath>

#include "jcif/common/error.hpp"

namespace jcif::entropy {

SymbolModel SymbolModel::from_probabilities(int lo, std::span<const double> probs,
                                            bool with_escape, double escape_mass) {
  const std::size_t entries = probs.size() + (with_escape ? 1 : 0);
  if (probs.empty()) throw ConfigError("symbol model needs a non-empty support window");
  if (entries > kTotalFrequency) throw ConfigError("symbol model support exceeds frequency scale");

  std::vector<double> mass(probs.begin(), probs.end());
  if (with_escape) mass.push_back(escape_mass);
  double total = 0.0;
  for (auto& m : mass) {
    if (!std::isfinite(m) || m < 0.0) m = 0.0;
    total += m;
  }
  if (!(total > 0.0)) {
    std::fill(mass.begin(), mass.end(), 1.0);
    total = static_cast<double>(mass.size());
  }

  SymbolModel model;
  model.lo_ = lo;
  model.window_ = probs.size();
  model.escape_ = with_escape;
  model.freq_.resize(entries);
  const double budget = static_cast<double>(kTotalFrequency - entries);
  std::uint64_t assigned = 0;
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < entries; ++i) {
    const auto extra = static_cast<std::uint32_t>(std::floor(mass[i] / total * budget));
    model.freq_[i] = 1 + std::min(extra, kTotalFrequency - static_cast<std::uint32_t>(entries));
    assigned += model.freq_[i];
    if (mass[i] > mass[argmax]) argmax = i;
  }
  // Floors leave a small remainder; it goes to the most probable entry.
  if (assigned > kTotalFrequency) throw Error("symbol model over-assigned frequencies");
  model.freq_[argmax] += static_cast<std::uint32_t>(kTotalFrequency - assigned);

  model.cum_.resize(entries + 1);
  model.cum_[0] = 0;
  for (std::size_t i = 0; i < entries; ++i) model.cum_[i + 1] = model.cum_[i] + model.freq_[i];
  return model;
}

SymbolModel SymbolModel::uniform(int lo, int hi, bool with_escape) {
  if (hi < lo) throw ConfigError("symbol model window is empty");
  std::vector<double> probs(static_cast<std::size_t>(hi - lo + 1), 1.0);
  return from_probabilities(lo, probs, with_escape, with_escape ? 1.0 : 0.0);
}

std::size_t SymbolModel::find(std::uint32_t target) const {
  auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
  const auto idx = static_cast<std::size_t>(it - cum_.begin());
  return std::min(idx == 0 ? 0 : idx - 1, freq_.size() - 1);
}

double SymbolModel::ideal_bits(int symbol) const {
  const auto bits = [](std::uint32_t f) {
    return static_cast<double>(kFrequencyBits) - std::log2(static_cast<double>(f));
  };
  if (in_window(symbol)) return bits(freq_[static_cast<std::size_t>(symbol - lo_)]);
  if (!escape_) throw ConfigError("symbol outside model window without escape");
  return bits(freq_[window_]) + kEscapeRawBits;
}

}  // namespace jcif::entropy

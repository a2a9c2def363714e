// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace jcif::entropy {

inline constexpr unsigned kFrequencyBits = 16;
inline constexpr std::uint32_t kTotalFrequency = 1u << kFrequencyBits;
// Raw width of a value coded after the escape symbol.
inline constexpr unsigned kEscapeRawBits = 32;

// Static integer frequency table over the support window [lo, hi], plus an
// optional escape symbol (stored last) for values outside the window. Every
// entry has frequency >= 1 and frequencies sum to kTotalFrequency exactly.
class SymbolModel {
 public:
  // `probs[i]` is the probability of symbol lo + i. `escape_mass` is the
  // probability of falling outside the window and is ignored without escape.
  static SymbolModel from_probabilities(int lo, std::span<const double> probs, bool with_escape,
                                        double escape_mass = 0.0);
  static SymbolModel uniform(int lo, int hi, bool with_escape);

  int lo() const { return lo_; }
  int hi() const { return lo_ + static_cast<int>(window_) - 1; }
  bool has_escape() const { return escape_; }
  std::size_t entry_count() const { return freq_.size(); }
  bool in_window(int symbol) const { return symbol >= lo_ && symbol <= hi(); }

  std::uint32_t frequency(std::size_t entry) const { return freq_[entry]; }
  std::uint32_t cumulative(std::size_t entry) const { return cum_[entry]; }
  std::size_t escape_entry() const { return window_; }

  // Entry whose cumulative interval contains `target` (< kTotalFrequency).
  std::size_t find(std::uint32_t target) const;

  // Bits the coder spends on `symbol` under this quantized table, including
  // the raw escape payload for out-of-window symbols.
  double ideal_bits(int symbol) const;

 private:
  int lo_ = 0;
  std::size_t window_ = 0;
  bool escape_ = false;
  std::vector<std::uint32_t> freq_;
  std::vector<std::uint32_t> cum_;
};

}  // namespace jcif::entropy

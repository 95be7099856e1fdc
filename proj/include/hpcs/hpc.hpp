// Copyright 2026 The hpc-sentinel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Custom HPC counters: 5 instruction-class unigrams and 25 ordered bigrams
// tallied over fixed windows of the instruction stream.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hpcs/asm.hpp"

namespace hpcs {

inline constexpr std::size_t kNumFeatures = kNumClasses + kNumClasses * kNumClasses;
inline constexpr std::size_t kDefaultWindow = 50;

// Feature order: a b l n s, then XY for X, Y in (a b l n s).
const std::array<std::string, kNumFeatures>& feature_names();
std::optional<std::size_t> feature_index(std::string_view name);

std::size_t unigram_index(std::size_t class_idx);
std::size_t bigram_index(std::size_t first_class_idx, std::size_t second_class_idx);

struct HpcVector {
  std::array<std::uint32_t, kNumFeatures> counts{};

  std::uint32_t operator[](std::size_t i) const { return counts[i]; }
  std::uint32_t& operator[](std::size_t i) { return counts[i]; }
  // Lookup by feature name; throws usage_error for unknown names.
  std::uint32_t get(std::string_view name) const;

  std::uint32_t unigram_total() const;
  std::uint32_t bigram_total() const;

  bool operator==(const HpcVector&) const = default;
};

struct HpcWindow {
  HpcVector features;
  std::size_t length = 0;  // instructions in this window, including Other
  bool partial = false;    // final window shorter than the window size
};

// Counter name for an adjacent (prev, next) pair, nullopt if either is Other.
std::optional<std::string_view> compute_bigram(Category prev, Category next);

// Splits the stream into consecutive windows of `window` instructions and
// tallies each one independently; pairs never straddle two windows. A short
// tail is emitted with partial=true. Throws usage_error if window == 0.
std::vector<HpcWindow> extract_windows(std::span<const Category> stream, std::size_t window);
std::vector<HpcWindow> extract_windows(std::span<const Instruction> instrs, std::size_t window);

}  // namespace hpcs

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

#include "hpcs/hpc.hpp"

#include <numeric>

#include "hpcs/error.hpp"

namespace hpcs {

const std::array<std::string, kNumFeatures>& feature_names() {
  static const std::array<std::string, kNumFeatures> names = [] {
    std::array<std::string, kNumFeatures> out;
    for (std::size_t x = 0; x < kNumClasses; ++x) {
      out[unigram_index(x)] = std::string(1, category_symbol(kCountedClasses[x]));
      for (std::size_t y = 0; y < kNumClasses; ++y) {
        out[bigram_index(x, y)] = {category_symbol(kCountedClasses[x]),
                                   category_symbol(kCountedClasses[y])};
      }
    }
    return out;
  }();
  return names;
}

std::optional<std::size_t> feature_index(std::string_view name) {
  const auto& names = feature_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t unigram_index(std::size_t class_idx) { return class_idx; }

std::size_t bigram_index(std::size_t first_class_idx, std::size_t second_class_idx) {
  return kNumClasses + kNumClasses * first_class_idx + second_class_idx;
}

std::uint32_t HpcVector::get(std::string_view name) const {
  const auto idx = feature_index(name);
  if (!idx) throw usage_error("UnknownFeature", "unknown HPC feature " + std::string(name));
  return counts[*idx];
}

std::uint32_t HpcVector::unigram_total() const {
  return std::accumulate(counts.begin(), counts.begin() + kNumClasses, 0u);
}

std::uint32_t HpcVector::bigram_total() const {
  return std::accumulate(counts.begin() + kNumClasses, counts.end(), 0u);
}

std::optional<std::string_view> compute_bigram(Category prev, Category next) {
  const auto x = class_index(prev);
  const auto y = class_index(next);
  if (!x || !y) return std::nullopt;
  return feature_names()[bigram_index(*x, *y)];
}

std::vector<HpcWindow> extract_windows(std::span<const Category> stream, std::size_t window) {
  if (window == 0) throw usage_error("BadWindow", "window length must be at least 1");
  std::vector<HpcWindow> out;
  out.reserve((stream.size() + window - 1) / window);
  for (std::size_t begin = 0; begin < stream.size(); begin += window) {
    const std::size_t end = std::min(stream.size(), begin + window);
    HpcWindow w;
    w.length = end - begin;
    w.partial = w.length < window;
    std::optional<std::size_t> prev;
    for (std::size_t i = begin; i < end; ++i) {
      const auto cur = class_index(stream[i]);
      if (cur) {
        ++w.features[unigram_index(*cur)];
        if (prev) ++w.features[bigram_index(*prev, *cur)];
      }
      prev = cur;
    }
    out.push_back(w);
  }
  return out;
}

std::vector<HpcWindow> extract_windows(std::span<const Instruction> instrs, std::size_t window) {
  const auto cats = categories_of(instrs);
  return extract_windows(std::span<const Category>(cats), window);
}

}  // namespace hpcs

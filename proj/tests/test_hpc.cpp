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

#include <doctest.h>

#include <set>

#include "hpcs/error.hpp"
#include "hpcs/hpc.hpp"
#include "hpcs/rng.hpp"
#include "oracles.hpp"

using namespace hpcs;

namespace {

constexpr Category kAll[] = {Category::kArithmetic, Category::kBoolean, Category::kStore,
                             Category::kLoad,       Category::kBranch,  Category::kOther};

std::vector<Category> random_stream(Rng& rng, std::size_t n) {
  std::vector<Category> s(n);
  for (auto& c : s) c = kAll[rng.index(6)];
  return s;
}

}  // namespace

TEST_SUITE("hpc") {

TEST_CASE("feature names and indices") {
  const auto& names = feature_names();
  CHECK(names.size() == 30);
  CHECK(names[0] == "a");
  CHECK(names[4] == "s");
  CHECK(names[5] == "aa");
  CHECK(names[29] == "ss");
  std::set<std::string> unique(names.begin(), names.end());
  CHECK(unique.size() == 30);
  for (std::size_t i = 0; i < names.size(); ++i) CHECK(feature_index(names[i]) == i);
  CHECK_FALSE(feature_index("zz").has_value());
  CHECK(names[bigram_index(2, 0)] == "la");
  CHECK(names[unigram_index(3)] == "n");
}

TEST_CASE("compute_bigram") {
  CHECK(compute_bigram(Category::kLoad, Category::kArithmetic) == "la");
  CHECK(compute_bigram(Category::kBranch, Category::kBranch) == "bb");
  CHECK(compute_bigram(Category::kArithmetic, Category::kLoad) == "al");
  CHECK_FALSE(compute_bigram(Category::kOther, Category::kLoad).has_value());
  CHECK_FALSE(compute_bigram(Category::kStore, Category::kOther).has_value());
}

TEST_CASE("snippet window counts") {
  using C = Category;
  const std::vector<Category> s = {C::kLoad, C::kArithmetic, C::kBoolean, C::kArithmetic, C::kBranch,
                                   C::kLoad, C::kArithmetic, C::kBoolean, C::kArithmetic, C::kBranch};
  for (std::size_t w : {10u, 50u}) {
    const auto windows = extract_windows(s, w);
    REQUIRE(windows.size() == 1);
    const auto& v = windows[0].features;
    const std::map<std::string, std::uint32_t> expected = {
        {"la", 2}, {"an", 2}, {"na", 2}, {"ab", 2}, {"bl", 1},
        {"l", 2},  {"a", 4},  {"n", 2},  {"b", 2}};
    for (const auto& name : feature_names()) {
      const auto it = expected.find(name);
      CHECK_MESSAGE(v.get(name) == (it == expected.end() ? 0u : it->second), name);
    }
    CHECK(windows[0].partial == (w > 10));
  }
}

TEST_CASE("edge cases") {
  CHECK(extract_windows(std::vector<Category>{}, 50).empty());
  const auto one = extract_windows(std::vector<Category>{Category::kArithmetic}, 50);
  REQUIRE(one.size() == 1);
  CHECK(one[0].partial);
  CHECK(one[0].features.get("a") == 1);
  CHECK(one[0].features.bigram_total() == 0);
  CHECK_THROWS_AS(extract_windows(std::vector<Category>{Category::kLoad}, 0), Error);
  CHECK_THROWS_AS(HpcVector{}.get("q"), Error);
}

TEST_CASE("windows equal the chunk-and-scan oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = random_stream(rng, rng.index(501));
    for (std::size_t w : {1u, 7u, 50u}) {
      const auto got = extract_windows(s, w);
      const auto want = oracle::window_counts(s, w);
      REQUIRE(got.size() == want.size());
      for (std::size_t k = 0; k < got.size(); ++k) {
        for (const auto& name : feature_names()) {
          const auto it = want[k].find(name);
          REQUIRE(got[k].features.get(name) == (it == want[k].end() ? 0 : it->second));
        }
      }
    }
  }
}

TEST_CASE("window invariants") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_stream(rng, rng.index(300));
    const std::size_t w = 1 + rng.index(60);
    const auto windows = extract_windows(s, w);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < windows.size(); ++k) {
      const auto& win = windows[k];
      std::size_t other = 0;
      for (std::size_t i = offset; i < offset + win.length; ++i) other += s[i] == Category::kOther;
      CHECK(win.features.unigram_total() + other == win.length);
      CHECK(win.features.bigram_total() + 1 <= std::max<std::size_t>(win.length, 1));
      CHECK(win.partial == (win.length < w));
      CHECK(win.partial == (k + 1 == windows.size() && s.size() % w != 0));
      offset += win.length;
    }
    CHECK(offset == s.size());
  }
}

TEST_CASE("concatenation at window boundaries") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t w = 1 + rng.index(20);
    const auto s1 = random_stream(rng, w * rng.index(6));
    const auto s2 = random_stream(rng, rng.index(120));
    auto both = s1;
    both.insert(both.end(), s2.begin(), s2.end());
    auto expected = extract_windows(s1, w);
    const auto tail = extract_windows(s2, w);
    expected.insert(expected.end(), tail.begin(), tail.end());
    const auto got = extract_windows(both, w);
    REQUIRE(got.size() == expected.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      CHECK(got[k].features == expected[k].features);
      CHECK(got[k].length == expected[k].length);
    }
  }
}

}  // TEST_SUITE

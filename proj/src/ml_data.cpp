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

// Splitting, balancing and metrics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hpcs/error.hpp"
#include "hpcs/ml.hpp"
#include "hpcs/rng.hpp"

namespace hpcs::ml {
namespace {

Dataset subset(const Dataset& d, std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end());
  Dataset out;
  out.feature_names = d.feature_names;
  out.samples.reserve(idx.size());
  for (std::size_t i : idx) out.samples.push_back(d.samples[i]);
  return out;
}

}  // namespace

TrainTest split(const Dataset& d, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw usage_error("BadSplit", "train fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = d.size();
  if (n < 2) throw data_error("TooFewSamples", "need at least 2 samples to split");
  const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw data_error("TooFewSamples", "split leaves an empty train or test set");
  }

  Rng rng(spec.seed);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  if (!spec.stratified) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    train_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return {subset(d, train_idx), subset(d, test_idx)};
  }

  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<int>(d.samples[i].label)].push_back(i);
  if (by_class[0].empty() || by_class[1].empty()) {
    throw data_error("TooFewSamples", "stratified split needs both classes present");
  }
  // Largest-remainder quotas; ties favour the benign class.
  std::array<std::size_t, 2> quota{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double exact = spec.train_fraction * static_cast<double>(by_class[c].size());
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  while (assigned < n_train) {
    const int c = remainder[1] > remainder[0] ? 1 : 0;
    const int pick = quota[c] < by_class[c].size() ? c : 1 - c;
    ++quota[pick];
    remainder[pick] = -1.0;
    ++assigned;
  }
  for (int c = 0; c < 2; ++c) {
    auto& members = by_class[c];
    rng.shuffle(std::span<std::size_t>(members));
    train_idx.insert(train_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(quota[c]));
    test_idx.insert(test_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(quota[c]), members.end());
  }
  if (train_idx.empty() || test_idx.empty()) {
    throw data_error("TooFewSamples", "split leaves an empty train or test set");
  }
  return {subset(d, train_idx), subset(d, test_idx)};
}

Dataset balance(const Dataset& d, std::uint64_t seed, BalanceMode mode) {
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < d.size(); ++i) by_class[static_cast<int>(d.samples[i].label)].push_back(i);
  if (by_class[0].empty() || by_class[1].empty()) {
    throw data_error("SingleClass", "balancing needs both classes present");
  }
  const int minority = by_class[0].size() <= by_class[1].size() ? 0 : 1;
  const int majority = 1 - minority;
  Rng rng(seed);
  if (mode == BalanceMode::kOversample) {
    Dataset out = d;
    const std::size_t extra = by_class[majority].size() - by_class[minority].size();
    for (std::size_t k = 0; k < extra; ++k) {
      out.samples.push_back(d.samples[by_class[minority][rng.index(by_class[minority].size())]]);
    }
    return out;
  }
  auto& major = by_class[majority];
  rng.shuffle(std::span<std::size_t>(major));
  major.resize(by_class[minority].size());
  std::vector<std::size_t> keep = by_class[minority];
  keep.insert(keep.end(), major.begin(), major.end());
  return subset(d, keep);
}

double Ratio::value() const {
  return den == 0 ? std::numeric_limits<double>::quiet_NaN()
                  : static_cast<double>(num) / static_cast<double>(den);
}

void ConfusionCounts::add(Label truth, Label predicted) {
  if (truth == Label::kMalicious) {
    (predicted == Label::kMalicious ? tp : fn) += 1;
  } else {
    (predicted == Label::kMalicious ? fp : tn) += 1;
  }
}

Metrics Metrics::from(const ConfusionCounts& c) {
  Metrics m;
  m.accuracy = c.accuracy().value();
  m.precision = c.precision().value();
  m.recall = c.recall().value();
  m.fp_rate = c.fp_rate().value();
  m.fn_rate = c.fn_rate().value();
  m.precision_defined = c.precision().defined();
  m.recall_defined = c.recall().defined();
  return m;
}

}  // namespace hpcs::ml

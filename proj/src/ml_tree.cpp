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

// CART decision trees and random forests.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hpcs/error.hpp"
#include "hpcs/ml.hpp"
#include "hpcs/parallel.hpp"
#include "hpcs/rng.hpp"

namespace hpcs::ml {
namespace {

using Wide = __int128;

// Split quality sum_child (c0^2 + c1^2) / n_child as an exact fraction.
// Larger is purer (equivalently, lower weighted Gini impurity).
struct Purity {
  Wide num = 0;
  Wide den = 1;

  static Purity of(const std::array<std::uint64_t, 2>& left,
                   const std::array<std::uint64_t, 2>& right) {
    const Wide nl = static_cast<Wide>(left[0] + left[1]);
    const Wide nr = static_cast<Wide>(right[0] + right[1]);
    const Wide sl = static_cast<Wide>(left[0]) * left[0] + static_cast<Wide>(left[1]) * left[1];
    const Wide sr = static_cast<Wide>(right[0]) * right[0] + static_cast<Wide>(right[1]) * right[1];
    return {sl * nr + sr * nl, nl * nr};
  }

  bool better_than(const Purity& o) const { return num * o.den > o.num * den; }
};

struct Candidate {
  std::int32_t feature = -1;
  std::int64_t threshold = 0;
  Purity purity;
};

struct Frame {
  std::int32_t node;
  std::vector<std::size_t> rows;
  std::size_t depth;
};

std::array<std::uint64_t, 2> class_counts(const FeatureMatrix& x, std::span<const std::size_t> rows) {
  std::array<std::uint64_t, 2> c{};
  for (std::size_t r : rows) ++c[static_cast<int>(x.label(r))];
  return c;
}

// Best threshold on one feature; nullopt if the feature is constant here.
std::optional<Candidate> best_on_feature(const FeatureMatrix& x, std::span<const std::size_t> rows,
                                         std::size_t feature,
                                         const std::array<std::uint64_t, 2>& totals) {
  std::vector<std::pair<std::int64_t, int>> values;
  values.reserve(rows.size());
  for (std::size_t r : rows) values.emplace_back(x.at(r, feature), static_cast<int>(x.label(r)));
  std::sort(values.begin(), values.end());
  if (values.front().first == values.back().first) return std::nullopt;

  std::optional<Candidate> best;
  std::array<std::uint64_t, 2> left{};
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    ++left[values[i].second];
    if (values[i].first == values[i + 1].first) continue;
    const std::array<std::uint64_t, 2> right = {totals[0] - left[0], totals[1] - left[1]};
    const Purity p = Purity::of(left, right);
    if (!best || p.better_than(best->purity)) {
      best = Candidate{static_cast<std::int32_t>(feature),
                       std::midpoint(values[i].first, values[i + 1].first), p};
    }
  }
  return best;
}

}  // namespace

FeatureMatrix::FeatureMatrix(const Dataset& d)
    : rows_(d.size()), cols_(d.feature_names.size()), data_(rows_ * cols_) {
  labels_.reserve(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    const auto& s = d.samples[r];
    if (s.features.size() != cols_) {
      throw data_error("InconsistentFeatures", "sample width does not match feature names");
    }
    for (std::size_t c = 0; c < cols_; ++c) data_[c * rows_ + r] = s.features[c];
    labels_.push_back(s.label);
  }
}

DecisionTree::DecisionTree(std::size_t num_features, std::vector<TreeNode> nodes)
    : num_features_(num_features), nodes_(std::move(nodes)) {
  for (const auto& n : nodes_) {
    if (n.is_leaf()) continue;
    const auto size = static_cast<std::int32_t>(nodes_.size());
    if (static_cast<std::size_t>(n.feature) >= num_features_ || n.left < 0 || n.left >= size ||
        n.right < 0 || n.right >= size) {
      throw data_error("BadModel", "decision tree node references an invalid feature or child");
    }
  }
}

Label DecisionTree::predict(std::span<const std::int64_t> x) const {
  if (nodes_.empty()) return Label::kBenign;
  std::int32_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  const auto& c = nodes_[i].counts;
  return c[1] > c[0] ? Label::kMalicious : Label::kBenign;
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack = {{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes_[i].is_leaf()) {
      stack.emplace_back(nodes_[i].left, d + 1);
      stack.emplace_back(nodes_[i].right, d + 1);
    }
  }
  return deepest;
}

nlohmann::json DecisionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"counts", n.counts}});
  }
  return {{"num_features", num_features_}, {"nodes", nodes}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j.at("nodes")) {
    TreeNode t;
    t.feature = n.at("feature").get<std::int32_t>();
    t.threshold = n.at("threshold").get<std::int64_t>();
    t.left = n.at("left").get<std::int32_t>();
    t.right = n.at("right").get<std::int32_t>();
    t.counts = n.at("counts").get<std::array<std::uint64_t, 2>>();
    nodes.push_back(t);
  }
  return DecisionTree(j.at("num_features").get<std::size_t>(), std::move(nodes));
}

DecisionTree train_tree(const FeatureMatrix& x, std::span<const std::size_t> rows,
                        const TreeParams& params, std::uint64_t seed) {
  if (rows.empty()) throw data_error("EmptyDataset", "cannot train a tree on no samples");
  const std::size_t n_features = x.cols();
  const std::size_t per_split =
      std::clamp<std::size_t>(params.max_features.value_or(n_features), 1, std::max<std::size_t>(n_features, 1));
  Rng rng(seed);

  std::vector<TreeNode> nodes(1);
  std::vector<Frame> stack;
  stack.push_back({0, std::vector<std::size_t>(rows.begin(), rows.end()), 0});
  std::vector<std::size_t> order(n_features);

  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const auto totals = class_counts(x, frame.rows);
    nodes[frame.node].counts = totals;

    const bool pure = totals[0] == 0 || totals[1] == 0;
    const bool too_small = frame.rows.size() < params.min_samples_split;
    const bool too_deep = params.max_depth && frame.depth >= *params.max_depth;
    if (pure || too_small || too_deep) continue;

    // Visit features in a random order until `per_split` non-constant ones
    // have been examined, then pick the best among them.
    std::iota(order.begin(), order.end(), 0);
    if (per_split < n_features) rng.shuffle(std::span<std::size_t>(order));
    std::vector<Candidate> found;
    for (std::size_t f : order) {
      if (found.size() == per_split) break;
      if (auto c = best_on_feature(x, frame.rows, f, totals)) found.push_back(*c);
    }
    if (found.empty()) continue;
    std::sort(found.begin(), found.end(),
              [](const Candidate& a, const Candidate& b) { return a.feature < b.feature; });
    Candidate best = found.front();
    for (const auto& c : found) {
      if (c.purity.better_than(best.purity)) best = c;
    }

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t r : frame.rows) {
      (x.at(r, static_cast<std::size_t>(best.feature)) <= best.threshold ? left_rows : right_rows)
          .push_back(r);
    }
    const auto left = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();
    nodes.emplace_back();
    nodes[frame.node].feature = best.feature;
    nodes[frame.node].threshold = best.threshold;
    nodes[frame.node].left = left;
    nodes[frame.node].right = left + 1;
    // Right pushed first so the left subtree is built (and draws from the
    // RNG) first.
    stack.push_back({left + 1, std::move(right_rows), frame.depth + 1});
    stack.push_back({left, std::move(left_rows), frame.depth + 1});
  }
  return DecisionTree(n_features, std::move(nodes));
}

DecisionTree train_dt(const Dataset& train, const TreeParams& params, std::uint64_t seed) {
  if (train.empty()) throw data_error("EmptyDataset", "training set is empty");
  const FeatureMatrix x(train);
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return train_tree(x, rows, params, seed);
}

RandomForest::RandomForest(std::vector<DecisionTree> trees, std::vector<std::uint64_t> tree_seeds)
    : trees_(std::move(trees)), tree_seeds_(std::move(tree_seeds)) {
  if (trees_.empty()) throw data_error("BadModel", "a random forest needs at least one tree");
}

std::size_t RandomForest::malicious_votes(std::span<const std::int64_t> x) const {
  std::size_t votes = 0;
  for (const auto& t : trees_) votes += t.predict(x) == Label::kMalicious;
  return votes;
}

Label RandomForest::predict(std::span<const std::int64_t> x) const {
  return 2 * malicious_votes(x) > trees_.size() ? Label::kMalicious : Label::kBenign;
}

nlohmann::json RandomForest::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"tree_seeds", tree_seeds_}, {"trees", trees}};
}

RandomForest RandomForest::from_json(const nlohmann::json& j) {
  std::vector<DecisionTree> trees;
  for (const auto& t : j.at("trees")) trees.push_back(DecisionTree::from_json(t));
  return RandomForest(std::move(trees), j.at("tree_seeds").get<std::vector<std::uint64_t>>());
}

RandomForest train_rf(const Dataset& train, const ForestParams& params, std::uint64_t seed) {
  if (train.empty()) throw data_error("EmptyDataset", "training set is empty");
  if (params.n_trees == 0) throw usage_error("BadParams", "n_trees must be at least 1");
  const FeatureMatrix x(train);
  const std::size_t n = x.rows();
  TreeParams tp;
  tp.min_samples_split = params.min_samples_split;
  tp.max_depth = params.max_depth;
  tp.max_features = params.max_features.value_or(
      static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols())))));

  std::vector<DecisionTree> trees(params.n_trees);
  std::vector<std::uint64_t> seeds(params.n_trees);
  for (std::size_t i = 0; i < params.n_trees; ++i) seeds[i] = derive_seed(seed, i);
  parallel_for(
      params.n_trees,
      [&](std::size_t i) {
        std::vector<std::size_t> rows(n);
        Rng rng(seeds[i]);
        if (params.bootstrap) {
          for (auto& r : rows) r = rng.index(n);
        } else {
          std::iota(rows.begin(), rows.end(), 0);
        }
        trees[i] = train_tree(x, rows, tp, rng.next_u64());
      },
      params.threads);
  return RandomForest(std::move(trees), std::move(seeds));
}

}  // namespace hpcs::ml

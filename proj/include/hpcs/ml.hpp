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

// Detection models over HPC datasets: splitting and balancing, CART
// decision trees, random forests, a one-hidden-layer network, and the
// confusion-count metrics. Malicious is the positive class throughout.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hpcs/dataset.hpp"

namespace hpcs::ml {

// ---------------------------------------------------------------------------
// Splitting and balancing

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 42;
  bool stratified = true;
};

struct TrainTest {
  Dataset train;
  Dataset test;
};

// floor(train_fraction * n) training samples; stratified splits allot
// per-class quotas by largest remainder. Samples keep their original order
// within each part. Throws usage_error("BadSplit") for a fraction outside
// (0, 1) and data_error("TooFewSamples") when a part would be empty or a
// class is missing from a stratified split.
TrainTest split(const Dataset& d, const SplitSpec& spec);

enum class BalanceMode { kOversample, kUndersample };

// Equalizes class counts. Oversampling appends seeded draws (with
// replacement) from the minority class; undersampling keeps a seeded
// subset of the majority class. Throws data_error("SingleClass").
Dataset balance(const Dataset& d, std::uint64_t seed, BalanceMode mode = BalanceMode::kOversample);

// ---------------------------------------------------------------------------
// Metrics

struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 0;
  bool defined() const { return den != 0; }
  // NaN when undefined.
  double value() const;
};

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  void add(Label truth, Label predicted);

  Ratio accuracy() const { return {tp + tn, total()}; }
  Ratio precision() const { return {tp, tp + fp}; }
  Ratio recall() const { return {tp, tp + fn}; }
  Ratio fp_rate() const { return {fp, total()}; }
  Ratio fn_rate() const { return {fn, total()}; }

  bool operator==(const ConfusionCounts&) const = default;
};

struct Metrics {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double fp_rate = 0;
  double fn_rate = 0;
  bool precision_defined = true;
  bool recall_defined = true;

  static Metrics from(const ConfusionCounts& c);
};

// ---------------------------------------------------------------------------
// Decision trees

// Column-major integer feature matrix.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(const Dataset& d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::int64_t at(std::size_t row, std::size_t col) const { return data_[col * rows_ + row]; }
  Label label(std::size_t row) const { return labels_[row]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int64_t> data_;
  std::vector<Label> labels_;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 for leaves
  std::int64_t threshold = 0;  // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<std::uint64_t, 2> counts{};  // training samples per class

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct TreeParams {
  std::size_t min_samples_split = 2;
  std::optional<std::size_t> max_depth;
  // Features examined per split; nullopt examines all of them.
  std::optional<std::size_t> max_features;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::size_t num_features, std::vector<TreeNode> nodes);

  // Majority class of the reached leaf; ties go to benign.
  Label predict(std::span<const std::int64_t> x) const;
  std::size_t num_features() const { return num_features_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& j);

  bool operator==(const DecisionTree&) const = default;

 private:
  std::size_t num_features_ = 0;
  std::vector<TreeNode> nodes_;
};

// CART with Gini impurity. Candidate thresholds are the integer floor
// midpoints between consecutive distinct values; split quality is compared
// exactly in integer arithmetic, ties going to the lowest feature index and
// then the lowest threshold. Grows until a node is pure, holds fewer than
// min_samples_split samples, reaches max_depth, or has no usable feature.
// `rows` may repeat indices (bootstrap); `seed` drives max_features
// sampling only. Throws data_error("EmptyDataset").
DecisionTree train_tree(const FeatureMatrix& x, std::span<const std::size_t> rows,
                        const TreeParams& params, std::uint64_t seed);
DecisionTree train_dt(const Dataset& train, const TreeParams& params = {}, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Random forests

struct ForestParams {
  std::size_t n_trees = 100;
  bool bootstrap = true;
  // Per-split features; nullopt means ceil(sqrt(F)).
  std::optional<std::size_t> max_features;
  std::size_t min_samples_split = 2;
  std::optional<std::size_t> max_depth;
  unsigned threads = 0;  // 0: worker_threads()
};

class RandomForest {
 public:
  RandomForest() = default;
  RandomForest(std::vector<DecisionTree> trees, std::vector<std::uint64_t> tree_seeds);

  std::size_t malicious_votes(std::span<const std::int64_t> x) const;
  // Strict majority for malicious; ties go to benign.
  Label predict(std::span<const std::int64_t> x) const;
  const std::vector<DecisionTree>& trees() const { return trees_; }
  const std::vector<std::uint64_t>& tree_seeds() const { return tree_seeds_; }

  nlohmann::json to_json() const;
  static RandomForest from_json(const nlohmann::json& j);

  bool operator==(const RandomForest&) const = default;

 private:
  std::vector<DecisionTree> trees_;
  std::vector<std::uint64_t> tree_seeds_;
};

// Tree i uses seed derive_seed(seed, i) for its bootstrap draw and feature
// sampling, so serial and parallel training agree bit for bit.
RandomForest train_rf(const Dataset& train, const ForestParams& params, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Neural network: F -> H (ReLU) -> 1 (sigmoid), binary cross-entropy.

struct NnParams {
  std::size_t hidden = 16;
  std::size_t epochs = 3000;
  double learning_rate = 0.5;
};

struct NnWeights {
  Eigen::MatrixXd w1;  // H x F
  Eigen::VectorXd b1;  // H
  Eigen::VectorXd w2;  // H
  double b2 = 0;
};

class NeuralNet {
 public:
  NeuralNet() = default;
  NeuralNet(Eigen::VectorXd mean, Eigen::VectorXd scale, NnWeights weights);

  std::size_t inputs() const { return static_cast<std::size_t>(mean_.size()); }
  std::size_t hidden() const { return static_cast<std::size_t>(weights_.b1.size()); }
  const NnWeights& weights() const { return weights_; }
  NnWeights& weights() { return weights_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& scale() const { return scale_; }

  // Rows of raw features -> standardized design matrix.
  Eigen::MatrixXd standardize(const Dataset& d) const;
  double probability(std::span<const std::int64_t> x) const;
  // Malicious iff probability > 0.5.
  Label predict(std::span<const std::int64_t> x) const;

  nlohmann::json to_json() const;
  static NeuralNet from_json(const nlohmann::json& j);

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;
  NnWeights weights_;
};

// Mean binary cross-entropy over standardized inputs `x` (n x F) and 0/1
// targets `y`; fills `grad` when non-null.
double nn_loss(const NnWeights& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               NnWeights* grad = nullptr);

// Seeded uniform initialization for an F -> H -> 1 network.
NnWeights nn_init(std::size_t inputs, std::size_t hidden, std::uint64_t seed);

struct NnTrainResult {
  NeuralNet model;
  double final_loss = 0;
};

// Full-batch gradient descent on standardized features (statistics taken
// from `train`). Throws data_error("EmptyDataset") and
// numeric_error("NonFiniteLoss").
NnTrainResult train_nn(const Dataset& train, const NnParams& params, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Model container, persistence and evaluation

enum class ModelKind { kDecisionTree, kRandomForest, kNeuralNet };

std::string_view model_kind_name(ModelKind kind);  // dt, rf, nn
std::optional<ModelKind> parse_model_kind(std::string_view name);

struct TrainOptions {
  TreeParams tree;
  ForestParams forest;
  NnParams nn;
};

struct TrainedModel {
  ModelKind kind = ModelKind::kDecisionTree;
  std::vector<std::string> feature_names;
  std::uint64_t seed = 0;
  nlohmann::json params;
  std::variant<DecisionTree, RandomForest, NeuralNet> model;
  std::optional<double> final_loss;

  Label predict(std::span<const std::int64_t> x) const;

  nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& j);
  static TrainedModel load(const std::string& path);
  void save(const std::string& path) const;
};

TrainedModel train_model(ModelKind kind, const Dataset& train, const TrainOptions& options,
                         std::uint64_t seed);

struct Prediction {
  std::string firmware_id;
  std::size_t window_index = 0;
  Label truth = Label::kBenign;
  Label predicted = Label::kBenign;
  std::optional<AttackKind> attack_kind;
};

struct EvalReport {
  ConfusionCounts counts;
  Metrics metrics;
  std::vector<Prediction> predictions;

  nlohmann::json to_json() const;
};

// Projects `test` onto the model's features and scores every sample.
// Throws data_error("EmptyDataset") for an empty test set.
EvalReport evaluate(const TrainedModel& model, const Dataset& test);

}  // namespace hpcs::ml

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

// PCA-based feature ranking and instruction-class elimination experiments.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hpcs/dataset.hpp"
#include "hpcs/ml.hpp"

namespace hpcs::pca {

struct SymmetricEigen {
  Eigen::VectorXd values;   // non-increasing
  Eigen::MatrixXd vectors;  // column k pairs with values(k)
};

// Eigendecomposition of a symmetric matrix, eigenvalues sorted in
// non-increasing order. Each eigenvector is flipped so that its
// largest-magnitude component (lowest index on ties) is positive.
SymmetricEigen eigen_symmetric(const Eigen::MatrixXd& m);

// Sample covariance (n - 1 normalization) of the rows of `x`, optionally on
// standardized columns (constant columns stay zero).
Eigen::MatrixXd covariance(const Eigen::MatrixXd& x, bool standardize = false);

Eigen::MatrixXd to_matrix(const Dataset& d);

struct FeatureScore {
  std::string name;
  double score = 0;
};

struct FeatureRanking {
  std::vector<FeatureScore> entries;  // scores non-increasing
  std::size_t n_components = 0;
  std::vector<double> eigenvalues;    // all, non-increasing

  std::vector<std::string> top(std::size_t k) const;
  nlohmann::json to_json() const;
};

struct RankOptions {
  std::size_t n_components = 3;
  bool standardize = false;
};

// score(feature j) = sum over the top n_components eigenpairs of
// lambda_k * |v_k[j]|. Ties keep the input feature order. Throws
// data_error("TooFewSamples") below 2 rows and
// data_error("DegenerateCovariance") when every feature is constant.
FeatureRanking rank_features(const Eigen::MatrixXd& x, std::span<const std::string> names,
                             const RankOptions& options = {});
FeatureRanking rank_features(const Dataset& d, const RankOptions& options = {});

// ---------------------------------------------------------------------------
// Elimination

struct EliminationSpec {
  std::string excluded;  // class symbols, e.g. "sl"
  std::string name;      // retained initials in B L A N S order, e.g. "BAN"
  std::vector<std::string> features;
};

// Removes each excluded class's unigram and every bigram mentioning it.
// `excluded` holds class symbols from {a, n, s, l, b}. Throws
// usage_error("TooManyExclusions") above two and usage_error("BadClass")
// for unknown or repeated symbols.
EliminationSpec eliminate(std::string_view excluded);

// All specs excluding exactly `count` classes, in lexicographic order of
// the excluded set over (a, b, l, n, s).
std::vector<EliminationSpec> elimination_specs(std::size_t count);

struct AblationOptions {
  ml::SplitSpec split;
  bool balance = true;
  ml::TrainOptions train;
};

struct AblationRow {
  std::string spec;
  ml::ModelKind model = ml::ModelKind::kDecisionTree;
  std::size_t n_features = 0;
  ml::ConfusionCounts counts;
  ml::Metrics metrics;
};

// For every spec x model: project, split with options.split (the same rows
// in every cell), balance the training part, train, evaluate on the
// held-out part. Row order is spec-major.
std::vector<AblationRow> run_ablation(const Dataset& d, std::span<const ml::ModelKind> models,
                                      std::span<const EliminationSpec> specs, std::uint64_t seed,
                                      const AblationOptions& options = {});

// Columns: spec,model,accuracy,precision,recall.
void write_ablation_csv(std::span<const AblationRow> rows, std::ostream& out);

}  // namespace hpcs::pca

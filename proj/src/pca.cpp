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

#include "hpcs/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "hpcs/error.hpp"
#include "hpcs/hpc.hpp"
#include "hpcs/parallel.hpp"
#include "hpcs/rng.hpp"

namespace hpcs::pca {
namespace {

// Order in which retained classes are spelled in spec names.
constexpr char kNameOrder[] = {'b', 'l', 'a', 'n', 's'};

std::string format_metric(double v, bool defined) {
  return defined && std::isfinite(v) ? fmt::format("{:.6f}", v) : std::string{};
}

}  // namespace

SymmetricEigen eigen_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw usage_error("NotSquare", "matrix must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw numeric_error("EigenFailure", "symmetric eigensolver did not converge");
  }
  const auto n = m.rows();
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    // Eigen returns ascending eigenvalues.
    out.values(k) = solver.eigenvalues()(n - 1 - k);
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1 - k);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
    }
    if (v(arg) < 0) v = -v;
    out.vectors.col(k) = v;
  }
  return out;
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x, bool standardize) {
  if (x.rows() < 2) throw data_error("TooFewSamples", "covariance needs at least 2 samples");
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  if (standardize) {
    for (Eigen::Index c = 0; c < centered.cols(); ++c) {
      const double sd = std::sqrt(centered.col(c).squaredNorm() / static_cast<double>(x.rows() - 1));
      if (sd > 0) centered.col(c) /= sd;
    }
  }
  return centered.transpose() * centered / static_cast<double>(x.rows() - 1);
}

Eigen::MatrixXd to_matrix(const Dataset& d) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d.size()),
                    static_cast<Eigen::Index>(d.feature_names.size()));
  for (std::size_t r = 0; r < d.size(); ++r) {
    for (std::size_t c = 0; c < d.feature_names.size(); ++c) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          static_cast<double>(d.samples[r].features[c]);
    }
  }
  return x;
}

std::vector<std::string> FeatureRanking::top(std::size_t k) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, entries.size()); ++i) out.push_back(entries[i].name);
  return out;
}

nlohmann::json FeatureRanking::to_json() const {
  nlohmann::json ranked = nlohmann::json::array();
  for (const auto& e : entries) ranked.push_back({{"feature", e.name}, {"score", e.score}});
  return {{"n_components", n_components}, {"eigenvalues", eigenvalues}, {"ranking", ranked}};
}

FeatureRanking rank_features(const Eigen::MatrixXd& x, std::span<const std::string> names,
                             const RankOptions& options) {
  if (static_cast<std::size_t>(x.cols()) != names.size()) {
    throw usage_error("InconsistentFeatures", "matrix width does not match feature names");
  }
  const Eigen::MatrixXd cov = covariance(x, options.standardize);
  if (cov.diagonal().maxCoeff() <= 0.0) {
    throw data_error("DegenerateCovariance", "every feature is constant");
  }
  const SymmetricEigen eig = eigen_symmetric(cov);
  const std::size_t k = std::min<std::size_t>(std::max<std::size_t>(options.n_components, 1),
                                              names.size());

  FeatureRanking out;
  out.n_components = k;
  out.eigenvalues.assign(eig.values.data(), eig.values.data() + eig.values.size());
  for (std::size_t j = 0; j < names.size(); ++j) {
    double score = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      score += std::max(eig.values(ci), 0.0) * std::abs(eig.vectors(static_cast<Eigen::Index>(j), ci));
    }
    out.entries.push_back({names[j], score});
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const FeatureScore& a, const FeatureScore& b) { return a.score > b.score; });
  return out;
}

FeatureRanking rank_features(const Dataset& d, const RankOptions& options) {
  return rank_features(to_matrix(d), d.feature_names, options);
}

EliminationSpec eliminate(std::string_view excluded) {
  if (excluded.size() > 2) {
    throw usage_error("TooManyExclusions", "at most two instruction classes can be excluded");
  }
  std::string sorted;
  for (char c : excluded) {
    if (!category_from_symbol(c) || sorted.find(c) != std::string::npos) {
      throw usage_error("BadClass", "bad instruction class in exclusion set: " + std::string(excluded));
    }
    sorted += c;
  }
  std::sort(sorted.begin(), sorted.end(), [](char a, char b) {
    return *class_index(*category_from_symbol(a)) < *class_index(*category_from_symbol(b));
  });

  EliminationSpec spec;
  spec.excluded = sorted;
  for (char c : kNameOrder) {
    if (sorted.find(c) == std::string::npos) {
      spec.name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
  }
  for (const auto& f : feature_names()) {
    const bool dropped = std::any_of(f.begin(), f.end(),
                                     [&](char c) { return sorted.find(c) != std::string::npos; });
    if (!dropped) spec.features.push_back(f);
  }
  return spec;
}

std::vector<EliminationSpec> elimination_specs(std::size_t count) {
  if (count > 2) throw usage_error("TooManyExclusions", "at most two instruction classes can be excluded");
  std::vector<EliminationSpec> out;
  std::string symbols;
  for (Category c : kCountedClasses) symbols += category_symbol(c);
  if (count == 0) {
    out.push_back(eliminate(""));
  } else if (count == 1) {
    for (char c : symbols) out.push_back(eliminate(std::string(1, c)));
  } else {
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      for (std::size_t j = i + 1; j < symbols.size(); ++j) {
        out.push_back(eliminate(std::string{symbols[i], symbols[j]}));
      }
    }
  }
  return out;
}

std::vector<AblationRow> run_ablation(const Dataset& d, std::span<const ml::ModelKind> models,
                                      std::span<const EliminationSpec> specs, std::uint64_t seed,
                                      const AblationOptions& options) {
  d.validate();
  std::vector<AblationRow> rows(specs.size() * models.size());
  parallel_for(rows.size(), [&](std::size_t cell) {
    const auto& spec = specs[cell / models.size()];
    const auto model = models[cell % models.size()];
    const Dataset projected = d.project(spec.features);
    auto parts = ml::split(projected, options.split);
    if (options.balance) parts.train = ml::balance(parts.train, derive_seed(seed, 1));
    ml::TrainOptions train = options.train;
    train.forest.threads = 1;
    const auto trained = ml::train_model(model, parts.train, train,
                                         derive_seed(seed, 2 + static_cast<std::uint64_t>(model)));
    const auto report = ml::evaluate(trained, parts.test);
    rows[cell] = {spec.name, model, spec.features.size(), report.counts, report.metrics};
  });
  return rows;
}

void write_ablation_csv(std::span<const AblationRow> rows, std::ostream& out) {
  out << "spec,model,accuracy,precision,recall\r\n";
  for (const auto& r : rows) {
    out << r.spec << ',' << ml::model_kind_name(r.model) << ','
        << format_metric(r.metrics.accuracy, r.counts.total() > 0) << ','
        << format_metric(r.metrics.precision, r.metrics.precision_defined) << ','
        << format_metric(r.metrics.recall, r.metrics.recall_defined) << "\r\n";
  }
}

}  // namespace hpcs::pca

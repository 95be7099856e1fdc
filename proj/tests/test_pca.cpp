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

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "hpcs/error.hpp"
#include "hpcs/hpc.hpp"
#include "hpcs/pca.hpp"
#include "hpcs/rng.hpp"
#include "oracles.hpp"

using namespace hpcs;
using namespace hpcs::pca;

namespace {

Eigen::MatrixXd random_symmetric(Rng& rng, Eigen::Index n) {
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.uniform(-3, 3);
  return (a + a.transpose()) / 2;
}

std::vector<std::string> names_for(Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

std::string error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

Dataset random_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  for (const auto& f : feature_names()) d.feature_names.push_back(f);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.firmware_id = "fw";
    s.window_index = i;
    const bool mal = rng.index(2) == 1;
    s.label = mal ? Label::kMalicious : Label::kBenign;
    if (mal) s.attack_kind = AttackKind::kInputArray;
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      s.features.push_back(static_cast<std::int64_t>(rng.index(10)) + (mal && f % 3 == 0 ? 4 : 0));
    }
    d.samples.push_back(s);
  }
  return d;
}

}  // namespace

TEST_SUITE("pca") {

TEST_CASE("eigenvalues agree with the Jacobi oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.index(12));
    const auto m = random_symmetric(rng, n);
    std::vector<std::vector<double>> rows(n, std::vector<double>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) rows[i][j] = m(i, j);
    const auto expected = oracle::jacobi_eigenvalues(rows);
    const auto eig = eigen_symmetric(m);
    for (Eigen::Index k = 0; k < n; ++k) CHECK(eig.values(k) == doctest::Approx(expected[k]).epsilon(1e-9));
  }
}

TEST_CASE("eigenpairs satisfy the defining equation") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(30));
    const auto m = random_symmetric(rng, n);
    const auto eig = eigen_symmetric(m);
    const double scale = std::max(1.0, m.norm());
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::VectorXd v = eig.vectors.col(k);
      CHECK((m * v - eig.values(k) * v).norm() <= 1e-9 * scale);
      CHECK(v.norm() == doctest::Approx(1.0));
      if (k > 0) CHECK(eig.values(k) <= eig.values(k - 1));
      Eigen::Index arg;
      v.cwiseAbs().maxCoeff(&arg);
      CHECK(v(arg) > 0);
    }
  }
  CHECK(error_code([] { eigen_symmetric(Eigen::MatrixXd(2, 3)); }) == "NotSquare");
}

TEST_CASE("covariance is symmetric and positive semidefinite") {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.index(40));
    const Eigen::Index f = 1 + static_cast<Eigen::Index>(rng.index(10));
    Eigen::MatrixXd x(n, f);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < f; ++j) x(i, j) = static_cast<double>(rng.index(20));
    for (bool standardize : {false, true}) {
      const auto c = covariance(x, standardize);
      CHECK((c - c.transpose()).norm() <= 1e-14 * std::max(1.0, c.norm()));
      const auto eig = eigen_symmetric(c);
      CHECK(eig.values(f - 1) >= -1e-9 * std::max(1.0, c.norm()));
    }
  }
  CHECK(error_code([] { covariance(Eigen::MatrixXd::Zero(1, 3)); }) == "TooFewSamples");
}

TEST_CASE("a planted high-variance feature ranks first") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index f = 5;
    const auto planted = static_cast<Eigen::Index>(rng.index(f));
    Eigen::MatrixXd x(200, f);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < f; ++j) x(i, j) = rng.uniform(-1, 1) * (j == planted ? 50.0 : 1.0);
    }
    const auto names = names_for(f);
    const auto r = rank_features(x, names, {1, false});
    CHECK(r.entries[0].name == names[planted]);
    CHECK(r.n_components == 1);
    for (std::size_t i = 1; i < r.entries.size(); ++i) CHECK(r.entries[i].score <= r.entries[i - 1].score);
  }
}

TEST_CASE("scores use eigenvalue-weighted absolute loadings") {
  Rng rng(5);
  Eigen::MatrixXd x(60, 4);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < 4; ++j) x(i, j) = static_cast<double>(rng.index(9)) * (j + 1);
  const auto names = names_for(4);
  const auto r = rank_features(x, names, {2, false});
  const auto eig = eigen_symmetric(covariance(x));
  for (const auto& e : r.entries) {
    const auto j = static_cast<Eigen::Index>(std::find(names.begin(), names.end(), e.name) - names.begin());
    const double expected = eig.values(0) * std::abs(eig.vectors(j, 0)) + eig.values(1) * std::abs(eig.vectors(j, 1));
    CHECK(e.score == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(r.eigenvalues.size() == 4);
  CHECK(r.top(2).size() == 2);
  CHECK(r.top(10).size() == 4);
  const auto j = r.to_json();
  CHECK(j["ranking"].size() == 4);
  CHECK(j["n_components"] == 2);
}

TEST_CASE("standardized ranking is invariant to column scaling") {
  Rng rng(6);
  Eigen::MatrixXd x(80, 5);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < 5; ++j) x(i, j) = rng.uniform(0, 10) + (j == 2 ? x(i, 0) : 0.0);
  Eigen::MatrixXd scaled = x;
  for (Eigen::Index j = 0; j < 5; ++j) scaled.col(j) *= 1.0 + 7.0 * static_cast<double>(j);
  const auto names = names_for(5);
  const auto a = rank_features(x, names, {3, true});
  const auto b = rank_features(scaled, names, {3, true});
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].name == b.entries[i].name);
    CHECK(a.entries[i].score == doctest::Approx(b.entries[i].score).epsilon(1e-9));
  }
}

TEST_CASE("ranking errors") {
  const auto names = names_for(3);
  CHECK(error_code([&] { rank_features(Eigen::MatrixXd::Constant(10, 3, 4.0), names); }) ==
        "DegenerateCovariance");
  CHECK(error_code([&] { rank_features(Eigen::MatrixXd::Zero(1, 3), names); }) == "TooFewSamples");
  CHECK(error_code([&] { rank_features(Eigen::MatrixXd::Zero(5, 2), names); }) == "InconsistentFeatures");
}

TEST_CASE("elimination feature counts and names") {
  CHECK(eliminate("").features.size() == 30);
  CHECK(eliminate("").name == "BLANS");
  for (const auto& s : elimination_specs(1)) CHECK(s.features.size() == 20);
  for (const auto& s : elimination_specs(2)) CHECK(s.features.size() == 12);
  CHECK(elimination_specs(1).size() == 5);
  CHECK(elimination_specs(2).size() == 10);
  CHECK(eliminate("s").name == "BLAN");
  CHECK(eliminate("sl").name == "BAN");
  CHECK(eliminate("ls").excluded == eliminate("sl").excluded);
  CHECK(eliminate("ls").features == eliminate("sl").features);
  for (const auto& f : eliminate("sl").features) {
    CHECK(f.find('s') == std::string::npos);
    CHECK(f.find('l') == std::string::npos);
  }
  std::set<std::string> seen;
  for (const auto& s : elimination_specs(2)) seen.insert(s.excluded);
  CHECK(seen.size() == 10);
  CHECK(error_code([] { eliminate("abl"); }) == "TooManyExclusions");
  CHECK(error_code([] { elimination_specs(3); }) == "TooManyExclusions");
  CHECK(error_code([] { eliminate("x"); }) == "BadClass");
  CHECK(error_code([] { eliminate("aa"); }) == "BadClass");
}

TEST_CASE("ablation rows cover every spec and model and match direct training") {
  const auto d = random_dataset(160, 9);
  const ml::ModelKind models[] = {ml::ModelKind::kDecisionTree, ml::ModelKind::kRandomForest};
  const auto specs = elimination_specs(2);
  AblationOptions options;
  options.train.forest.n_trees = 10;
  const auto rows = run_ablation(d, models, specs, 42, options);
  REQUIRE(rows.size() == specs.size() * 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].spec == specs[i / 2].name);
    CHECK(rows[i].model == models[i % 2]);
    CHECK(rows[i].n_features == 12);
  }

  // Cell 3: second spec, random forest.
  const auto projected = d.project(specs[1].features);
  auto parts = ml::split(projected, options.split);
  parts.train = ml::balance(parts.train, derive_seed(42, 1));
  auto train = options.train;
  train.forest.threads = 1;
  const auto model = ml::train_model(ml::ModelKind::kRandomForest, parts.train, train,
                                     derive_seed(42, 2 + static_cast<std::uint64_t>(ml::ModelKind::kRandomForest)));
  CHECK(ml::evaluate(model, parts.test).counts == rows[3].counts);
  CHECK(rows[3].counts.total() == parts.test.size());

  std::ostringstream csv;
  write_ablation_csv(rows, csv);
  const auto text = csv.str();
  CHECK(text.rfind("spec,model,accuracy,precision,recall\r\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(rows.size() + 1));
}

}  // TEST_SUITE

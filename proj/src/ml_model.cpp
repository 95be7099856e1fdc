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

#include <cmath>
#include <fstream>
#include <map>

#include "hpcs/error.hpp"
#include "hpcs/ml.hpp"

namespace hpcs::ml {
namespace {

nlohmann::json optional_json(const std::optional<std::size_t>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json metric_json(double value, bool defined) {
  return defined && std::isfinite(value) ? nlohmann::json(value) : nlohmann::json(nullptr);
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kDecisionTree: return "dt";
    case ModelKind::kRandomForest: return "rf";
    case ModelKind::kNeuralNet: return "nn";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (auto k : {ModelKind::kDecisionTree, ModelKind::kRandomForest, ModelKind::kNeuralNet}) {
    if (model_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

Label TrainedModel::predict(std::span<const std::int64_t> x) const {
  return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

nlohmann::json TrainedModel::to_json() const {
  nlohmann::json j = {{"format", "hpc-sentinel-model/1"},
                      {"kind", std::string(model_kind_name(kind))},
                      {"feature_names", feature_names},
                      {"seed", seed},
                      {"params", params}};
  if (final_loss) j["final_loss"] = *final_loss;
  j["model"] = std::visit([](const auto& m) { return m.to_json(); }, model);
  return j;
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
  TrainedModel m;
  try {
    const auto kind = parse_model_kind(j.at("kind").get<std::string>());
    if (!kind) throw data_error("BadModel", "unknown model kind " + j.at("kind").dump());
    m.kind = *kind;
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.seed = j.value("seed", std::uint64_t{0});
    m.params = j.value("params", nlohmann::json::object());
    if (j.contains("final_loss")) m.final_loss = j["final_loss"].get<double>();
    const auto& body = j.at("model");
    switch (m.kind) {
      case ModelKind::kDecisionTree: m.model = DecisionTree::from_json(body); break;
      case ModelKind::kRandomForest: m.model = RandomForest::from_json(body); break;
      case ModelKind::kNeuralNet: m.model = NeuralNet::from_json(body); break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw data_error("BadModel", e.what());
  }
  return m;
}

TrainedModel TrainedModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("IoError", "cannot open model " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw data_error("BadModel", path + ": " + e.what());
  }
}

void TrainedModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("IoError", "cannot open " + path + " for writing");
  out << to_json().dump(1) << '\n';
  if (!out) throw data_error("IoError", "failed writing " + path);
}

TrainedModel train_model(ModelKind kind, const Dataset& train, const TrainOptions& options,
                         std::uint64_t seed) {
  TrainedModel m;
  m.kind = kind;
  m.feature_names = train.feature_names;
  m.seed = seed;
  switch (kind) {
    case ModelKind::kDecisionTree:
      m.params = {{"criterion", "gini"},
                  {"min_samples_split", options.tree.min_samples_split},
                  {"max_depth", optional_json(options.tree.max_depth)},
                  {"max_features", optional_json(options.tree.max_features)}};
      m.model = train_dt(train, options.tree, seed);
      break;
    case ModelKind::kRandomForest: {
      const auto& p = options.forest;
      m.params = {{"n_trees", p.n_trees},
                  {"bootstrap", p.bootstrap},
                  {"max_features", optional_json(p.max_features)},
                  {"min_samples_split", p.min_samples_split},
                  {"max_depth", optional_json(p.max_depth)}};
      m.model = train_rf(train, p, seed);
      break;
    }
    case ModelKind::kNeuralNet: {
      const auto& p = options.nn;
      m.params = {{"hidden", p.hidden}, {"epochs", p.epochs}, {"learning_rate", p.learning_rate}};
      auto result = train_nn(train, p, seed);
      m.final_loss = result.final_loss;
      m.model = std::move(result.model);
      break;
    }
  }
  return m;
}

EvalReport evaluate(const TrainedModel& model, const Dataset& test) {
  if (test.empty()) throw data_error("EmptyDataset", "test set is empty");
  const Dataset projected = test.feature_names == model.feature_names
                                ? test
                                : test.project(model.feature_names);
  EvalReport report;
  report.predictions.reserve(projected.size());
  for (const auto& s : projected.samples) {
    const Label predicted = model.predict(s.features);
    report.counts.add(s.label, predicted);
    report.predictions.push_back({s.firmware_id, s.window_index, s.label, predicted, s.attack_kind});
  }
  report.metrics = Metrics::from(report.counts);
  return report;
}

nlohmann::json EvalReport::to_json() const {
  const auto& c = counts;
  nlohmann::json j;
  j["confusion"] = {{"tp", c.tp}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}, {"total", c.total()}};
  j["metrics"] = {{"accuracy", metric_json(metrics.accuracy, c.total() > 0)},
                  {"precision", metric_json(metrics.precision, metrics.precision_defined)},
                  {"recall", metric_json(metrics.recall, metrics.recall_defined)},
                  {"fp_rate", metric_json(metrics.fp_rate, c.total() > 0)},
                  {"fn_rate", metric_json(metrics.fn_rate, c.total() > 0)},
                  {"precision_defined", metrics.precision_defined},
                  {"recall_defined", metrics.recall_defined}};

  // Detection rate grouped by firmware origin (attack kind, or benign).
  std::map<std::string, std::pair<std::size_t, std::size_t>> groups;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : predictions) {
    const std::string group = p.attack_kind ? std::string(attack_name(*p.attack_kind)) : "benign";
    auto& g = groups[group];
    ++g.first;
    g.second += p.predicted == Label::kMalicious;
    rows.push_back({{"firmware_id", p.firmware_id},
                    {"window_index", p.window_index},
                    {"label", std::string(label_name(p.truth))},
                    {"predicted", std::string(label_name(p.predicted))},
                    {"attack_kind", p.attack_kind ? nlohmann::json(std::string(attack_name(*p.attack_kind)))
                                                  : nlohmann::json(nullptr)}});
  }
  nlohmann::json by_group = nlohmann::json::object();
  for (const auto& [name, g] : groups) {
    by_group[name] = {{"samples", g.first}, {"flagged_malicious", g.second}};
  }
  j["by_attack_kind"] = by_group;
  j["predictions"] = rows;
  return j;
}

}  // namespace hpcs::ml

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

// One-hidden-layer network trained by full-batch gradient descent.

#include <cmath>

#include "hpcs/error.hpp"
#include "hpcs/ml.hpp"
#include "hpcs/rng.hpp"

namespace hpcs::ml {
namespace {

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

NeuralNet::NeuralNet(Eigen::VectorXd mean, Eigen::VectorXd scale, NnWeights weights)
    : mean_(std::move(mean)), scale_(std::move(scale)), weights_(std::move(weights)) {
  const auto f = mean_.size();
  const auto h = weights_.b1.size();
  if (scale_.size() != f || weights_.w1.rows() != h || weights_.w1.cols() != f ||
      weights_.w2.size() != h) {
    throw data_error("BadModel", "neural network weight shapes are inconsistent");
  }
}

Eigen::MatrixXd NeuralNet::standardize(const Dataset& d) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d.size()), mean_.size());
  for (std::size_t r = 0; r < d.size(); ++r) {
    for (Eigen::Index c = 0; c < mean_.size(); ++c) {
      x(static_cast<Eigen::Index>(r), c) =
          (static_cast<double>(d.samples[r].features[static_cast<std::size_t>(c)]) - mean_(c)) /
          scale_(c);
    }
  }
  return x;
}

double NeuralNet::probability(std::span<const std::int64_t> x) const {
  Eigen::VectorXd in(mean_.size());
  for (Eigen::Index c = 0; c < in.size(); ++c) {
    in(c) = (static_cast<double>(x[static_cast<std::size_t>(c)]) - mean_(c)) / scale_(c);
  }
  const Eigen::VectorXd h = (weights_.w1 * in + weights_.b1).cwiseMax(0.0);
  const double z = weights_.w2.dot(h) + weights_.b2;
  return 1.0 / (1.0 + std::exp(-z));
}

Label NeuralNet::predict(std::span<const std::int64_t> x) const {
  return probability(x) > 0.5 ? Label::kMalicious : Label::kBenign;
}

nlohmann::json NeuralNet::to_json() const {
  nlohmann::json w1 = nlohmann::json::array();
  for (Eigen::Index r = 0; r < weights_.w1.rows(); ++r) {
    w1.push_back(vec_to_json(weights_.w1.row(r).transpose()));
  }
  return {{"layers", {inputs(), hidden(), 1}},
          {"activations", {"relu", "sigmoid"}},
          {"mean", vec_to_json(mean_)},
          {"scale", vec_to_json(scale_)},
          {"w1", w1},
          {"b1", vec_to_json(weights_.b1)},
          {"w2", vec_to_json(weights_.w2)},
          {"b2", weights_.b2}};
}

NeuralNet NeuralNet::from_json(const nlohmann::json& j) {
  NnWeights w;
  const auto& rows = j.at("w1");
  const auto mean = vec_from_json(j.at("mean"));
  w.w1.resize(static_cast<Eigen::Index>(rows.size()), mean.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = vec_from_json(rows[r]);
    if (row.size() != mean.size()) throw data_error("BadModel", "w1 row has the wrong width");
    w.w1.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  w.b1 = vec_from_json(j.at("b1"));
  w.w2 = vec_from_json(j.at("w2"));
  w.b2 = j.at("b2").get<double>();
  return NeuralNet(mean, vec_from_json(j.at("scale")), std::move(w));
}

double nn_loss(const NnWeights& w, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               NnWeights* grad) {
  const auto n = static_cast<double>(x.rows());
  const Eigen::MatrixXd pre = (x * w.w1.transpose()).rowwise() + w.b1.transpose();
  const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
  const Eigen::VectorXd z = (hidden * w.w2).array() + w.b2;

  // softplus(z) - y*z, written to stay finite for large |z|.
  double loss = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += std::max(z(i), 0.0) - y(i) * z(i) + std::log1p(std::exp(-std::abs(z(i))));
  }
  loss /= n;

  if (grad) {
    const Eigen::VectorXd p = (1.0 / (1.0 + (-z.array()).exp())).matrix();
    const Eigen::VectorXd dz = (p - y) / n;
    grad->w2 = hidden.transpose() * dz;
    grad->b2 = dz.sum();
    const Eigen::MatrixXd dpre =
        (dz * w.w2.transpose()).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    grad->w1 = dpre.transpose() * x;
    grad->b1 = dpre.colwise().sum().transpose();
  }
  return loss;
}

NnWeights nn_init(std::size_t inputs, std::size_t hidden, std::uint64_t seed) {
  Rng rng(seed);
  const auto f = static_cast<Eigen::Index>(inputs);
  const auto h = static_cast<Eigen::Index>(hidden);
  const double a1 = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(inputs, 1)));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(hidden, 1)));
  NnWeights w;
  w.w1.resize(h, f);
  w.b1.resize(h);
  w.w2.resize(h);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < f; ++c) w.w1(r, c) = rng.uniform(-a1, a1);
  }
  for (Eigen::Index r = 0; r < h; ++r) w.b1(r) = rng.uniform(-a1, a1);
  for (Eigen::Index r = 0; r < h; ++r) w.w2(r) = rng.uniform(-a2, a2);
  w.b2 = rng.uniform(-a2, a2);
  return w;
}

NnTrainResult train_nn(const Dataset& train, const NnParams& params, std::uint64_t seed) {
  if (train.empty()) throw data_error("EmptyDataset", "training set is empty");
  if (params.hidden == 0) throw usage_error("BadParams", "hidden layer needs at least one unit");
  const auto f = static_cast<Eigen::Index>(train.feature_names.size());
  const auto n = static_cast<double>(train.size());

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(f);
  Eigen::VectorXd scale = Eigen::VectorXd::Zero(f);
  for (const auto& s : train.samples) {
    for (Eigen::Index c = 0; c < f; ++c) mean(c) += static_cast<double>(s.features[static_cast<std::size_t>(c)]);
  }
  mean /= n;
  for (const auto& s : train.samples) {
    for (Eigen::Index c = 0; c < f; ++c) {
      const double d = static_cast<double>(s.features[static_cast<std::size_t>(c)]) - mean(c);
      scale(c) += d * d;
    }
  }
  for (Eigen::Index c = 0; c < f; ++c) {
    scale(c) = std::sqrt(scale(c) / n);
    if (scale(c) == 0.0) scale(c) = 1.0;
  }

  NeuralNet net(mean, scale, nn_init(static_cast<std::size_t>(f), params.hidden, seed));
  const Eigen::MatrixXd x = net.standardize(train);
  Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
  for (std::size_t i = 0; i < train.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = train.samples[i].label == Label::kMalicious ? 1.0 : 0.0;
  }

  NnWeights& w = net.weights();
  NnWeights g;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    const double loss = nn_loss(w, x, y, &g);
    if (!std::isfinite(loss)) {
      throw numeric_error("NonFiniteLoss", "loss diverged at epoch " + std::to_string(epoch));
    }
    w.w1 -= params.learning_rate * g.w1;
    w.b1 -= params.learning_rate * g.b1;
    w.w2 -= params.learning_rate * g.w2;
    w.b2 -= params.learning_rate * g.b2;
  }
  const double final_loss = nn_loss(w, x, y);
  if (!std::isfinite(final_loss)) throw numeric_error("NonFiniteLoss", "final loss is not finite");
  return {std::move(net), final_loss};
}

}  // namespace hpcs::ml

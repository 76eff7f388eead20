/*
 * Copyright 2026 The oosd Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "oosd/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "oosd/error.hpp"

namespace oosd {
namespace {

using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z) {
  return (1 + (-z).exp()).inverse();
}

// Shared state for the independent logistic sub-problems: the design matrix
// with a bias column, sample weights, and the inverse of the fixed curvature
// bound  H = X^T diag(s) X / 4 + l2 * I_w  (bias unpenalized).
struct LogisticProblem {
  Eigen::MatrixXf xa;
  Eigen::VectorXf weight;
  Eigen::MatrixXf h_inv;
  double l2 = 0.0;
  double weight_sum = 0.0;
};

LogisticProblem make_problem(const EmbeddingMatrix& x, Eigen::VectorXf sample_weight, double l2) {
  LogisticProblem p;
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  p.xa.resize(n, d + 1);
  p.xa.leftCols(d) = x;
  p.xa.col(d).setOnes();
  p.weight = std::move(sample_weight);
  p.l2 = l2;
  p.weight_sum = p.weight.cast<double>().sum();

  const Eigen::MatrixXd xd = p.xa.cast<double>();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d + 1, d + 1);
  h.selfadjointView<Eigen::Lower>().rankUpdate(
      (xd.array().colwise() * (0.5 * p.weight.cast<double>().array().sqrt())).matrix().transpose());
  h = h.selfadjointView<Eigen::Lower>();
  h.diagonal().head(d).array() += l2;
  if (l2 <= 0.0) h.diagonal().array() += 1e-9;
  p.h_inv = h.ldlt().solve(Eigen::MatrixXd::Identity(d + 1, d + 1)).cast<float>();
  return p;
}

// Majorize-minimize iterations on one block of sub-problems; `y` is n x B.
Eigen::MatrixXf fit_block(const LogisticProblem& p, const Eigen::MatrixXf& y,
                          const TrainConfig& config) {
  const Eigen::Index d = p.xa.cols() - 1;
  Eigen::MatrixXf w = Eigen::MatrixXf::Zero(y.cols(), p.xa.cols());
  double previous = 0.0;
  Eigen::MatrixXf z;
  Eigen::ArrayXXf e;
  Eigen::ArrayXXf loss_terms;
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    z.noalias() = p.xa * w.transpose();
    // One exponential per entry serves both the loss and the sigmoid.
    e = (-z.array().abs()).exp();
    // The objective only feeds the stopping rule; tolerance 0 runs the full cap.
    if (config.tolerance > 0.0) {
      loss_terms = z.array().max(0.0f) + (1.0f + e).log() - y.array() * z.array();
      const double loss = (p.weight.transpose() * loss_terms.matrix()).cast<double>().sum();
      const double objective = loss + 0.5 * p.l2 * w.leftCols(d).cast<double>().squaredNorm();
      if (iter > 0 && previous - objective <= config.tolerance * std::max(1.0, std::abs(previous))) {
        break;
      }
      previous = objective;
    }

    z.array() = ((z.array() >= 0.0f).select(1.0f, e) / (1.0f + e) - y.array()).colwise() *
                p.weight.array();
    Eigen::MatrixXf grad = z.transpose() * p.xa;
    grad.leftCols(d) += static_cast<float>(p.l2) * w.leftCols(d);
    w.noalias() -= static_cast<float>(config.learning_rate) * (grad * p.h_inv);
  }
  return w;
}

void check_config(const TrainConfig& config) {
  if (!(config.learning_rate > 0.0) || config.l2 < 0.0 || config.max_iterations < 0 ||
      config.tolerance < 0.0 || config.block_size < 1) {
    throw Error(ErrorCode::ConfigError, "invalid classifier training config");
  }
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::OvrInScope: return "ovr-is";
    case ModelKind::BinaryGate: return "binary-gate";
    case ModelKind::KPlusOne: return "k-plus-1";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "ovr-is") return ModelKind::OvrInScope;
  if (name == "binary-gate") return ModelKind::BinaryGate;
  if (name == "k-plus-1") return ModelKind::KPlusOne;
  throw Error(ErrorCode::ConfigError, "unknown model kind '" + std::string(name) + "'");
}

bool ConfidenceVector::operator==(const ConfidenceVector& other) const {
  if (values.size() != other.values.size() || values != other.values) return false;
  if (labels == other.labels) return true;
  return labels && other.labels && *labels == *other.labels;
}

IntentModel::IntentModel(ModelKind kind, std::vector<std::string> labels,
                         Eigen::MatrixXf weights, Eigen::VectorXf bias)
    : kind_(kind),
      labels_(std::make_shared<const std::vector<std::string>>(std::move(labels))),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  if (weights_.rows() != bias_.size() ||
      static_cast<std::size_t>(weights_.rows()) != labels_->size()) {
    throw Error(ErrorCode::DimMismatch, "intent model labels, weights and bias disagree");
  }
}

ConfidenceVector IntentModel::predict_conf(const Embedding& x) const {
  if (x.size() != dim()) {
    throw Error(ErrorCode::DimMismatch, "embedding has dimension " + std::to_string(x.size()) +
                                            ", model expects " + std::to_string(dim()));
  }
  Eigen::VectorXf logits = weights_ * x + bias_;
  return {sigmoid(logits.array()).matrix().cast<double>(), labels_};
}

Eigen::MatrixXf IntentModel::predict_conf_all(const EmbeddingMatrix& x) const {
  if (x.cols() != dim()) throw Error(ErrorCode::DimMismatch, "embedding matrix dimension mismatch");
  Eigen::MatrixXf logits = x * weights_.transpose();
  logits.rowwise() += bias_.transpose();
  return sigmoid(logits.array()).matrix();
}

Eigen::Index IntentModel::label_index(std::string_view label) const {
  const auto& l = *labels_;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i] == label) return static_cast<Eigen::Index>(i);
  }
  return -1;
}

IntentModel train_intent_model(const EmbeddingMatrix& x, std::span<const std::string> labels,
                               ModelKind kind, const TrainConfig& config,
                               std::vector<std::string> classes) {
  check_config(config);
  if (kind == ModelKind::BinaryGate) {
    throw Error(ErrorCode::ConfigError, "use train_binary_gate for binary-gate models");
  }
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw Error(ErrorCode::DimMismatch, "one label per embedding row required");
  }
  if (classes.empty()) {
    classes.assign(labels.begin(), labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  }
  const std::size_t min_classes = kind == ModelKind::KPlusOne ? 2 : 1;
  if (classes.size() < min_classes) {
    throw Error(ErrorCode::MissingClassExamples,
                "need at least " + std::to_string(min_classes) + " classes");
  }

  std::unordered_map<std::string_view, int> class_index;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (!class_index.emplace(classes[c], static_cast<int>(c)).second) {
      throw Error(ErrorCode::ConfigError, "duplicate class '" + classes[c] + "'");
    }
  }
  std::vector<int> y(labels.size());
  std::vector<std::size_t> counts(classes.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = class_index.find(labels[i]);
    if (it == class_index.end()) {
      throw Error(ErrorCode::MissingClassExamples, "label '" + labels[i] + "' is not a declared class");
    }
    y[i] = it->second;
    ++counts[static_cast<std::size_t>(it->second)];
  }
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (counts[c] == 0) {
      throw Error(ErrorCode::MissingClassExamples, "class '" + classes[c] + "' has no examples");
    }
  }

  const Eigen::Index n = x.rows();
  const Eigen::Index k = static_cast<Eigen::Index>(classes.size());
  Eigen::VectorXf sample_weight = Eigen::VectorXf::Ones(n);
  if (config.balance_classes) {
    for (Eigen::Index i = 0; i < n; ++i) {
      sample_weight[i] = static_cast<float>(static_cast<double>(n) /
                                            (static_cast<double>(k) * counts[y[i]]));
    }
  }
  const LogisticProblem problem = make_problem(x, std::move(sample_weight), config.l2);

  const Eigen::Index d = x.cols();
  Eigen::MatrixXf weights(k, d);
  Eigen::VectorXf bias(k);
  for (Eigen::Index c0 = 0; c0 < k; c0 += config.block_size) {
    const Eigen::Index b = std::min<Eigen::Index>(config.block_size, k - c0);
    Eigen::MatrixXf targets = Eigen::MatrixXf::Zero(n, b);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index c = y[static_cast<std::size_t>(i)] - c0;
      if (c >= 0 && c < b) targets(i, c) = 1.0f;
    }
    const Eigen::MatrixXf w = fit_block(problem, targets, config);
    weights.middleRows(c0, b) = w.leftCols(d);
    bias.segment(c0, b) = w.col(d);
  }
  return IntentModel(kind, std::move(classes), std::move(weights), std::move(bias));
}

IntentModel train_binary_gate(const EmbeddingMatrix& x, const std::vector<bool>& in_scope,
                              const TrainConfig& config) {
  check_config(config);
  if (static_cast<std::size_t>(x.rows()) != in_scope.size()) {
    throw Error(ErrorCode::DimMismatch, "one label per embedding row required");
  }
  const auto positives = static_cast<std::size_t>(std::count(in_scope.begin(), in_scope.end(), true));
  if (positives == 0 || positives == in_scope.size()) {
    throw Error(ErrorCode::SingleClassBinary, "binary gate needs both in-scope and OOS examples");
  }
  const Eigen::Index n = x.rows();
  Eigen::VectorXf sample_weight = Eigen::VectorXf::Ones(n);
  Eigen::MatrixXf targets(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool pos = in_scope[static_cast<std::size_t>(i)];
    targets(i, 0) = pos ? 1.0f : 0.0f;
    if (config.balance_classes) {
      const double count = pos ? positives : in_scope.size() - positives;
      sample_weight[i] = static_cast<float>(static_cast<double>(n) / (2.0 * count));
    }
  }
  const LogisticProblem problem = make_problem(x, std::move(sample_weight), config.l2);
  const Eigen::MatrixXf w = fit_block(problem, targets, config);
  const Eigen::Index d = x.cols();
  return IntentModel(ModelKind::BinaryGate, {"in_scope"}, w.leftCols(d), w.col(d));
}

}  // namespace oosd

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

#ifndef OOSD_CLASSIFIER_HPP_
#define OOSD_CLASSIFIER_HPP_

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "oosd/featurize.hpp"

namespace oosd {

enum class ModelKind { OvrInScope, BinaryGate, KPlusOne };

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

// Label of the extra class in the K+1 formulation.
inline constexpr std::string_view kOosLabel = "__oos__";

// Per-intent scores in [0, 1]. Values are independent sigmoids and do not
// sum to one.
struct ConfidenceVector {
  Eigen::VectorXd values;
  std::shared_ptr<const std::vector<std::string>> labels;

  Eigen::Index size() const { return values.size(); }
  const std::string& label(Eigen::Index i) const { return (*labels)[static_cast<std::size_t>(i)]; }
  bool operator==(const ConfidenceVector& other) const;
};

struct TrainConfig {
  // Scale on the preconditioned step; 1.0 is the majorize-minimize step.
  double learning_rate = 1.0;
  double l2 = 1e-4;
  int max_iterations = 30;
  // Stop a block once the relative objective decrease falls below this.
  double tolerance = 1e-4;
  // Sample weights n / (K * n_class) when set.
  bool balance_classes = false;
  // Classes optimized together; the sub-problems are independent.
  int block_size = 256;

  bool operator==(const TrainConfig&) const = default;
};

// Linear logistic scorer over embeddings. Row c of `weights` with `bias[c]`
// scores `labels[c]`.
class IntentModel {
 public:
  IntentModel() = default;
  IntentModel(ModelKind kind, std::vector<std::string> labels, Eigen::MatrixXf weights,
              Eigen::VectorXf bias);

  ModelKind kind() const { return kind_; }
  const std::vector<std::string>& labels() const { return *labels_; }
  const std::shared_ptr<const std::vector<std::string>>& shared_labels() const { return labels_; }
  const Eigen::MatrixXf& weights() const { return weights_; }
  const Eigen::VectorXf& bias() const { return bias_; }
  Eigen::Index dim() const { return weights_.cols(); }
  Eigen::Index num_outputs() const { return weights_.rows(); }

  // sigmoid(W x + b); throws Error(DimMismatch).
  ConfidenceVector predict_conf(const Embedding& x) const;

  // Row i holds the confidences of row i of `x`.
  Eigen::MatrixXf predict_conf_all(const EmbeddingMatrix& x) const;

  Eigen::Index label_index(std::string_view label) const;

 private:
  ModelKind kind_ = ModelKind::OvrInScope;
  std::shared_ptr<const std::vector<std::string>> labels_ =
      std::make_shared<const std::vector<std::string>>();
  Eigen::MatrixXf weights_;
  Eigen::VectorXf bias_;
};

// One-vs-rest training for OvrInScope and KPlusOne. `classes` fixes the
// output order; when empty, the sorted distinct labels are used.
// Throws MissingClassExamples, DimMismatch.
IntentModel train_intent_model(const EmbeddingMatrix& x, std::span<const std::string> labels,
                               ModelKind kind, const TrainConfig& config = {},
                               std::vector<std::string> classes = {});

// Single logistic output, in scope = 1. Throws SingleClassBinary when one
// side is missing.
IntentModel train_binary_gate(const EmbeddingMatrix& x, const std::vector<bool>& in_scope,
                              const TrainConfig& config = {});

}  // namespace oosd

#endif  // OOSD_CLASSIFIER_HPP_

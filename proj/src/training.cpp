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

#include <set>

#include "oosd/error.hpp"
#include "oosd/pipeline.hpp"

namespace oosd {
namespace {

std::vector<std::string> preprocess_all(const std::vector<std::string>& texts,
                                        const EntityLexicon& lexicon, const char* what) {
  std::vector<std::string> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      out.push_back(apply_entity_proxies(normalize(texts[i]), lexicon).text);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(what) + " example " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

EmbeddingMatrix vstack(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  EmbeddingMatrix out(a.rows() + b.rows(), std::max(a.cols(), b.cols()));
  if (a.rows() > 0) out.topRows(a.rows()) = a;
  if (b.rows() > 0) out.bottomRows(b.rows()) = b;
  return out;
}

}  // namespace

void check_limits(const TrainingSet& data, const TrainingLimits& limits) {
  if (data.is_texts.size() > limits.max_is_examples) {
    throw Error(ErrorCode::LimitExceeded, std::to_string(data.is_texts.size()) +
                                              " in-scope examples exceed the limit of " +
                                              std::to_string(limits.max_is_examples));
  }
  if (data.oos_texts.size() > limits.max_oos_examples) {
    throw Error(ErrorCode::LimitExceeded, std::to_string(data.oos_texts.size()) +
                                              " OOS examples exceed the limit of " +
                                              std::to_string(limits.max_oos_examples));
  }
  const std::set<std::string_view> classes(data.is_intents.begin(), data.is_intents.end());
  if (classes.size() > limits.max_classes) {
    throw Error(ErrorCode::LimitExceeded, std::to_string(classes.size()) +
                                              " intents exceed the limit of " +
                                              std::to_string(limits.max_classes));
  }
}

void validate(const DetectorConfig& config) {
  validate(config.featurizer);
  validate(config.scorer);
  validate(config.combiner);
  const TrainConfig& c = config.classifier;
  if (!(c.learning_rate > 0.0) || !(c.l2 >= 0.0) || c.max_iterations < 1 || !(c.tolerance >= 0.0) ||
      c.block_size < 1) {
    throw Error(ErrorCode::ConfigError, "classifier needs learning_rate > 0, l2 >= 0, "
                                        "max_iterations >= 1, tolerance >= 0, block_size >= 1");
  }
  if (config.pca_components < 1) throw Error(ErrorCode::ConfigError, "pca_components must be >= 1");
  if (!(config.gate_threshold >= 0.0 && config.gate_threshold <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "gate_threshold must lie in [0, 1]");
  }
}

OosDetector train_detector(const TrainingSet& data, const DetectorConfig& config,
                           const EntityLexicon& lexicon,
                           std::shared_ptr<const Featurizer> featurizer) {
  validate(config);
  check_limits(data, config.limits);
  if (data.is_texts.size() != data.is_intents.size()) {
    throw Error(ErrorCode::DimMismatch, "one intent per in-scope text required");
  }
  if (data.is_texts.empty()) {
    throw Error(ErrorCode::MissingClassExamples, "no in-scope training examples");
  }

  const std::vector<std::string> is_texts = preprocess_all(data.is_texts, lexicon, "in-scope");
  const std::vector<std::string> oos_texts = preprocess_all(data.oos_texts, lexicon, "OOS");

  if (!featurizer) {
    std::vector<std::string> corpus = is_texts;
    corpus.insert(corpus.end(), oos_texts.begin(), oos_texts.end());
    featurizer = std::make_shared<HashedTfidf>(HashedTfidf::fit(corpus, config.featurizer));
  }
  const EmbeddingMatrix is_emb = featurizer->embed_all(is_texts);
  const EmbeddingMatrix oos_emb = featurizer->embed_all(oos_texts);

  OosDetector::Parts parts;
  parts.formulation = config.formulation;
  parts.lexicon = lexicon;
  parts.featurizer = featurizer;
  parts.scorer = config.scorer;
  parts.oos_method = config.oos_method;
  parts.combiner = config.combiner;
  parts.gate_threshold = config.gate_threshold;

  switch (config.formulation) {
    case Formulation::Discounting:
    case Formulation::MaxConf:
    case Formulation::BinaryGate:
      parts.intent_model =
          train_intent_model(is_emb, data.is_intents, ModelKind::OvrInScope, config.classifier);
      break;
    case Formulation::KPlusOne: {
      if (oos_texts.empty()) {
        throw Error(ErrorCode::MissingClassExamples, "k-plus-1 needs OOS training examples");
      }
      std::vector<std::string> labels = data.is_intents;
      labels.insert(labels.end(), oos_texts.size(), std::string(kOosLabel));
      parts.intent_model = train_intent_model(vstack(is_emb, oos_emb), labels, ModelKind::KPlusOne,
                                              config.classifier);
      break;
    }
  }

  if (config.formulation == Formulation::Discounting) {
    if (config.oos_method == OosMethod::NearestNeighbor) {
      parts.index = NeighborIndex::build(is_emb, data.is_intents, oos_emb, config.scorer);
    } else {
      const Eigen::Index k = std::min<Eigen::Index>(
          {static_cast<Eigen::Index>(config.pca_components), is_emb.rows() - 1, is_emb.cols()});
      parts.pca = PcaReconstructor<double>::fit(is_emb, std::max<Eigen::Index>(k, 1));
    }
  }

  if (config.formulation == Formulation::BinaryGate) {
    if (oos_texts.empty()) {
      // No OOS examples: one-class nearest-neighbor gate.
      parts.index = NeighborIndex::build(is_emb, data.is_intents, EmbeddingMatrix(0, is_emb.cols()),
                                         config.scorer);
    } else {
      EmbeddingMatrix gate_x = vstack(is_emb, oos_emb);
      std::vector<bool> in_scope(static_cast<std::size_t>(gate_x.rows()), false);
      std::fill(in_scope.begin(), in_scope.begin() + is_emb.rows(), true);
      if (config.synonym_example && !lexicon.empty()) {
        EmbeddingMatrix synthetic(1, gate_x.cols());
        synthetic.row(0) = featurizer->embed(synthesize_synonym_example(lexicon).text).transpose();
        gate_x = vstack(gate_x, synthetic);
        in_scope.push_back(true);
      }
      parts.gate = train_binary_gate(gate_x, in_scope, config.classifier);
    }
  }
  return OosDetector(std::move(parts));
}

}  // namespace oosd

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

#include "oosd/pipeline.hpp"

#include <algorithm>

#include "oosd/error.hpp"

namespace oosd {

std::string_view formulation_name(Formulation f) {
  switch (f) {
    case Formulation::Discounting: return "discounting";
    case Formulation::BinaryGate: return "binary-gate";
    case Formulation::KPlusOne: return "k-plus-1";
    case Formulation::MaxConf: return "max-conf";
  }
  return "?";
}

Formulation parse_formulation(std::string_view name) {
  for (Formulation f : kAllFormulations) {
    if (formulation_name(f) == name) return f;
  }
  throw Error(ErrorCode::ConfigError, "unknown formulation '" + std::string(name) + "'");
}

std::string_view oos_method_name(OosMethod m) {
  return m == OosMethod::NearestNeighbor ? "nearest-neighbor" : "reconstruction";
}

OosMethod parse_oos_method(std::string_view name) {
  if (name == "nearest-neighbor") return OosMethod::NearestNeighbor;
  if (name == "reconstruction") return OosMethod::Reconstruction;
  throw Error(ErrorCode::ConfigError, "unknown OOS method '" + std::string(name) + "'");
}

OosDetector::OosDetector(Parts parts) : parts_(std::move(parts)) {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::ConfigError, what);
  };
  require(parts_.featurizer != nullptr, "detector has no featurizer");
  require(parts_.intent_model.has_value(), "detector has no intent model");
  validate(parts_.combiner);
  const Eigen::Index dim = parts_.featurizer->dim();
  if (parts_.intent_model->dim() != dim) {
    throw Error(ErrorCode::DimMismatch, "intent model and featurizer dimensions differ");
  }
  switch (parts_.formulation) {
    case Formulation::Discounting:
      require(parts_.intent_model->kind() == ModelKind::OvrInScope, "discounting needs an ovr-is model");
      if (parts_.oos_method == OosMethod::NearestNeighbor) {
        require(parts_.index.has_value(), "discounting needs a neighbor index");
      } else {
        require(parts_.pca.has_value(), "reconstruction scoring needs a PCA model");
      }
      break;
    case Formulation::BinaryGate:
      require(parts_.intent_model->kind() == ModelKind::OvrInScope, "binary-gate needs an ovr-is model");
      require(parts_.gate.has_value() || parts_.index.has_value(),
              "binary-gate needs a gate model or a one-class index");
      if (parts_.gate) require(parts_.gate->kind() == ModelKind::BinaryGate, "gate model has wrong kind");
      break;
    case Formulation::KPlusOne:
      require(parts_.intent_model->kind() == ModelKind::KPlusOne, "k-plus-1 needs a k-plus-1 model");
      break;
    case Formulation::MaxConf:
      require(parts_.intent_model->kind() == ModelKind::OvrInScope, "max-conf needs an ovr-is model");
      break;
  }
  if (parts_.index && parts_.index->dim() != dim) {
    throw Error(ErrorCode::DimMismatch, "neighbor index and featurizer dimensions differ");
  }
  if (parts_.pca && parts_.pca->dim() != dim) {
    throw Error(ErrorCode::DimMismatch, "PCA model and featurizer dimensions differ");
  }
}

std::string OosDetector::preprocess(std::string_view raw) const {
  return apply_entity_proxies(normalize(raw), parts_.lexicon).text;
}

Decision OosDetector::predict(std::string_view raw) const {
  return predict_preprocessed(preprocess(raw));
}

Decision OosDetector::predict_preprocessed(std::string_view text) const {
  return predict_embedding(parts_.featurizer->embed(text));
}

double OosDetector::gate_probability(const Embedding& embedding,
                                     std::optional<OosScore>* score) const {
  if (parts_.gate) return parts_.gate->predict_conf(embedding).values[0];
  const OosScore s = parts_.index->score(embedding, parts_.scorer);
  *score = s;
  return std::clamp(1.0 - s.distance, 0.0, 1.0);
}

Decision OosDetector::predict_embedding(const Embedding& embedding) const {
  ConfidenceVector conf = parts_.intent_model->predict_conf(embedding);
  switch (parts_.formulation) {
    case Formulation::Discounting: {
      const OosScore score = parts_.oos_method == OosMethod::NearestNeighbor
                                 ? parts_.index->score(embedding, parts_.scorer)
                                 : parts_.pca->score(embedding);
      Decision d = decide(combine(conf, score, parts_.combiner), parts_.combiner);
      d.oos_score = score;
      d.is_score = d.top_confidence;
      return d;
    }
    case Formulation::MaxConf: {
      Decision d = decide(std::move(conf), parts_.combiner);
      d.is_score = d.top_confidence;
      return d;
    }
    case Formulation::KPlusOne: {
      const Eigen::Index top = top_index(conf);
      Decision d;
      d.top_confidence = conf.values[top];
      d.oos = conf.label(top) == kOosLabel;
      if (!d.oos) d.intent = conf.label(top);
      d.final_conf = std::move(conf);
      return d;
    }
    case Formulation::BinaryGate: {
      std::optional<OosScore> score;
      const double p = gate_probability(embedding, &score);
      const Eigen::Index top = top_index(conf);
      Decision d;
      d.top_confidence = conf.values[top];
      d.oos = p < parts_.gate_threshold;
      if (!d.oos) d.intent = conf.label(top);
      d.final_conf = std::move(conf);
      d.oos_score = score;
      d.is_score = p;
      return d;
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown formulation");
}

}  // namespace oosd

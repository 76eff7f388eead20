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

#ifndef OOSD_PIPELINE_HPP_
#define OOSD_PIPELINE_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oosd/classifier.hpp"
#include "oosd/discounting.hpp"
#include "oosd/featurize.hpp"
#include "oosd/neighbor_index.hpp"
#include "oosd/pca_reconstructor.hpp"
#include "oosd/textnorm.hpp"

namespace oosd {

enum class Formulation { Discounting, BinaryGate, KPlusOne, MaxConf };

std::string_view formulation_name(Formulation f);
Formulation parse_formulation(std::string_view name);
inline constexpr Formulation kAllFormulations[] = {Formulation::Discounting, Formulation::BinaryGate,
                                                   Formulation::KPlusOne, Formulation::MaxConf};

enum class OosMethod { NearestNeighbor, Reconstruction };

std::string_view oos_method_name(OosMethod m);
OosMethod parse_oos_method(std::string_view name);

struct TrainingLimits {
  std::size_t max_is_examples = 25000;
  std::size_t max_oos_examples = 25000;
  std::size_t max_classes = 2000;

  bool operator==(const TrainingLimits&) const = default;
};

struct DetectorConfig {
  Formulation formulation = Formulation::Discounting;
  TfidfConfig featurizer;
  TrainConfig classifier;
  OosScorerConfig scorer;
  OosMethod oos_method = OosMethod::NearestNeighbor;
  int pca_components = 32;
  CombinerConfig combiner;
  // Binary-gate formulation: OOS when the gate probability is below this.
  double gate_threshold = 0.5;
  // Binary-gate formulation: add the concatenated entity synonyms as one
  // extra in-scope example.
  bool synonym_example = true;
  TrainingLimits limits;

  bool operator==(const DetectorConfig&) const = default;
};

struct TrainingSet {
  std::vector<std::string> is_texts;
  std::vector<std::string> is_intents;
  std::vector<std::string> oos_texts;
};

// A trained OOS detector for one formulation. Immutable; `predict` is safe
// to call concurrently.
class OosDetector {
 public:
  struct Parts {
    Formulation formulation = Formulation::Discounting;
    EntityLexicon lexicon;
    std::shared_ptr<const Featurizer> featurizer;
    // ovr-is for discounting, max-conf and binary-gate; k-plus-1 otherwise.
    std::optional<IntentModel> intent_model;
    std::optional<IntentModel> gate;
    // Discounting with nearest-neighbor scoring, or the one-class gate used
    // by binary-gate when no OOS examples were available.
    std::optional<NeighborIndex> index;
    std::optional<PcaReconstructor<double>> pca;
    OosScorerConfig scorer;
    OosMethod oos_method = OosMethod::NearestNeighbor;
    CombinerConfig combiner;
    double gate_threshold = 0.5;
  };

  explicit OosDetector(Parts parts);

  // Throws EmptyUtterance for blank input.
  Decision predict(std::string_view raw) const;
  Decision predict_preprocessed(std::string_view text) const;
  Decision predict_embedding(const Embedding& embedding) const;

  // normalize, then entity proxies.
  std::string preprocess(std::string_view raw) const;

  const Parts& parts() const { return parts_; }
  Formulation formulation() const { return parts_.formulation; }

 private:
  double gate_probability(const Embedding& embedding, std::optional<OosScore>* score) const;

  Parts parts_;
};

// Trains every component the configured formulation needs. When
// `featurizer` is null a hashed tf-idf model is fitted on the training
// texts. Throws LimitExceeded above the configured product limits.
OosDetector train_detector(const TrainingSet& data, const DetectorConfig& config,
                           const EntityLexicon& lexicon = {},
                           std::shared_ptr<const Featurizer> featurizer = nullptr);

void check_limits(const TrainingSet& data, const TrainingLimits& limits);
void validate(const DetectorConfig& config);

}  // namespace oosd

#endif  // OOSD_PIPELINE_HPP_

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

#ifndef OOSD_NEIGHBOR_INDEX_HPP_
#define OOSD_NEIGHBOR_INDEX_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "oosd/featurize.hpp"

namespace oosd {

enum class Source : std::uint8_t { InScope = 0, OutOfScope = 1 };

enum class SearchMode : std::uint8_t { Exact = 0, Approximate = 1 };

std::string_view search_mode_name(SearchMode mode);
SearchMode parse_search_mode(std::string_view name);

struct OosScorerConfig {
  // Weight of the example's own embedding against its intent mean.
  double blend_weight = 0.5;
  // Added to the distance when the nearest entry is an OOS example.
  double oos_penalty = 0.25;
  // Rescale blended entries to unit length. Scores are 1 - <q, e> either way.
  bool renormalize = true;
  SearchMode mode = SearchMode::Exact;
  // Inverted-file parameters; 0 picks ceil(sqrt(n)) lists and lists/4 probes.
  int num_lists = 0;
  int num_probes = 0;
  std::uint64_t seed = 42;

  bool operator==(const OosScorerConfig&) const = default;
};

void validate(const OosScorerConfig& config);

struct OosScore {
  double distance = 0.0;
  Source nearest_source = Source::InScope;

  bool operator==(const OosScore&) const = default;
};

struct Neighbor {
  Eigen::Index entry = -1;
  float similarity = 0.0f;
};

// Blended in-scope embeddings plus raw OOS embeddings; immutable once built.
class NeighborIndex {
 public:
  // Row i of `is_embeddings` belongs to `is_intents[i]`. Throws EmptyIndex,
  // DimMismatch.
  static NeighborIndex build(const EmbeddingMatrix& is_embeddings,
                             std::span<const std::string> is_intents,
                             const EmbeddingMatrix& oos_embeddings,
                             const OosScorerConfig& config = {});

  // 1 - max similarity, plus the OOS penalty when the nearest entry is OOS.
  OosScore score(const Embedding& query) const;
  OosScore score(const Embedding& query, const OosScorerConfig& config) const;

  Neighbor nearest(const Embedding& query) const;
  Neighbor nearest_exact(const Embedding& query) const;
  Neighbor nearest_approximate(const Embedding& query, int num_probes) const;

  Eigen::Index size() const { return entries_.rows(); }
  Eigen::Index dim() const { return entries_.cols(); }
  const EmbeddingMatrix& entries() const { return entries_; }
  Source source(Eigen::Index entry) const { return sources_[static_cast<std::size_t>(entry)]; }
  bool has_oos() const;
  const OosScorerConfig& config() const { return config_; }

  // Serialization access.
  const std::vector<Source>& sources() const { return sources_; }
  const std::vector<std::int32_t>& intent_ids() const { return intent_ids_; }
  const std::vector<std::string>& intent_names() const { return intent_names_; }
  static NeighborIndex from_parts(OosScorerConfig config, EmbeddingMatrix entries,
                                  std::vector<Source> sources, std::vector<std::int32_t> intent_ids,
                                  std::vector<std::string> intent_names);

 private:
  void build_lists();

  OosScorerConfig config_;
  EmbeddingMatrix entries_;
  std::vector<Source> sources_;
  std::vector<std::int32_t> intent_ids_;  // -1 for OOS entries
  std::vector<std::string> intent_names_;

  // Inverted file: entries grouped by nearest centroid.
  EmbeddingMatrix centroids_;
  std::vector<float> radii_;
  std::vector<Eigen::Index> list_offsets_;
  std::vector<Eigen::Index> list_entries_;
};

}  // namespace oosd

#endif  // OOSD_NEIGHBOR_INDEX_HPP_

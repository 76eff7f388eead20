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

#include "oosd/neighbor_index.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "oosd/error.hpp"
#include "oosd/rng.hpp"

namespace oosd {
namespace {

constexpr int kKmeansIterations = 10;

}  // namespace

std::string_view search_mode_name(SearchMode mode) {
  return mode == SearchMode::Exact ? "exact" : "approximate";
}

SearchMode parse_search_mode(std::string_view name) {
  if (name == "exact") return SearchMode::Exact;
  if (name == "approximate") return SearchMode::Approximate;
  throw Error(ErrorCode::ConfigError, "unknown search mode '" + std::string(name) + "'");
}

void validate(const OosScorerConfig& config) {
  if (!(config.blend_weight >= 0.0 && config.blend_weight <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "blend_weight must lie in [0, 1]");
  }
  if (!(config.oos_penalty >= 0.0)) throw Error(ErrorCode::ConfigError, "oos_penalty must be >= 0");
  if (config.num_lists < 0 || config.num_probes < 0) {
    throw Error(ErrorCode::ConfigError, "num_lists and num_probes must be >= 0");
  }
}

NeighborIndex NeighborIndex::build(const EmbeddingMatrix& is_embeddings,
                                   std::span<const std::string> is_intents,
                                   const EmbeddingMatrix& oos_embeddings,
                                   const OosScorerConfig& config) {
  validate(config);
  if (static_cast<std::size_t>(is_embeddings.rows()) != is_intents.size()) {
    throw Error(ErrorCode::DimMismatch, "one intent per in-scope embedding required");
  }
  const Eigen::Index n_is = is_embeddings.rows();
  const Eigen::Index n_oos = oos_embeddings.rows();
  if (n_is + n_oos == 0) throw Error(ErrorCode::EmptyIndex, "no examples to index");
  const Eigen::Index dim = n_is > 0 ? is_embeddings.cols() : oos_embeddings.cols();
  if ((n_is > 0 && is_embeddings.cols() != dim) || (n_oos > 0 && oos_embeddings.cols() != dim)) {
    throw Error(ErrorCode::DimMismatch, "in-scope and OOS embeddings differ in dimension");
  }

  NeighborIndex index;
  index.config_ = config;
  std::map<std::string_view, std::int32_t> ids;
  for (const auto& intent : is_intents) ids.emplace(intent, 0);
  for (auto& [name, id] : ids) {
    id = static_cast<std::int32_t>(index.intent_names_.size());
    index.intent_names_.emplace_back(name);
  }

  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ids.size()), dim);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(means.rows());
  index.intent_ids_.reserve(static_cast<std::size_t>(n_is + n_oos));
  for (Eigen::Index i = 0; i < n_is; ++i) {
    const std::int32_t id = ids.at(is_intents[static_cast<std::size_t>(i)]);
    index.intent_ids_.push_back(id);
    means.row(id) += is_embeddings.row(i).cast<double>();
    counts[id] += 1.0;
  }
  means.array().colwise() /= counts.array().max(1.0);

  const double lambda = config.blend_weight;
  index.entries_.resize(n_is + n_oos, dim);
  for (Eigen::Index i = 0; i < n_is; ++i) {
    Eigen::RowVectorXd blended =
        lambda * is_embeddings.row(i).cast<double>() + (1.0 - lambda) * means.row(index.intent_ids_[i]);
    if (config.renormalize) {
      const double norm = blended.norm();
      if (norm > 0.0) blended /= norm;
    }
    index.entries_.row(i) = blended.cast<float>();
  }
  if (n_oos > 0) index.entries_.bottomRows(n_oos) = oos_embeddings;
  index.sources_.assign(static_cast<std::size_t>(n_is), Source::InScope);
  index.sources_.resize(static_cast<std::size_t>(n_is + n_oos), Source::OutOfScope);
  index.intent_ids_.resize(static_cast<std::size_t>(n_is + n_oos), -1);
  index.build_lists();
  return index;
}

NeighborIndex NeighborIndex::from_parts(OosScorerConfig config, EmbeddingMatrix entries,
                                        std::vector<Source> sources,
                                        std::vector<std::int32_t> intent_ids,
                                        std::vector<std::string> intent_names) {
  validate(config);
  if (entries.rows() == 0) throw Error(ErrorCode::EmptyIndex, "no entries");
  if (sources.size() != static_cast<std::size_t>(entries.rows()) ||
      intent_ids.size() != sources.size()) {
    throw Error(ErrorCode::MalformedFile, "neighbor index parts disagree in length");
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const bool is = sources[i] == Source::InScope;
    if (is != (intent_ids[i] >= 0) || intent_ids[i] >= static_cast<std::int32_t>(intent_names.size())) {
      throw Error(ErrorCode::MalformedFile, "neighbor entry has inconsistent intent tag");
    }
  }
  NeighborIndex index;
  index.config_ = config;
  index.entries_ = std::move(entries);
  index.sources_ = std::move(sources);
  index.intent_ids_ = std::move(intent_ids);
  index.intent_names_ = std::move(intent_names);
  index.build_lists();
  return index;
}

bool NeighborIndex::has_oos() const {
  return std::find(sources_.begin(), sources_.end(), Source::OutOfScope) != sources_.end();
}

void NeighborIndex::build_lists() {
  centroids_.resize(0, 0);
  radii_.clear();
  list_offsets_.clear();
  list_entries_.clear();
  if (config_.mode != SearchMode::Approximate) return;

  const Eigen::Index n = entries_.rows();
  const Eigen::Index lists =
      std::min<Eigen::Index>(n, config_.num_lists > 0
                                    ? config_.num_lists
                                    : static_cast<Eigen::Index>(std::ceil(std::sqrt(double(n)))));

  // k-means++ seeding.
  SplitMix64 rng(config_.seed);
  centroids_.resize(lists, entries_.cols());
  centroids_.row(0) = entries_.row(static_cast<Eigen::Index>(rng.next() % std::uint64_t(n)));
  Eigen::VectorXd best_sq = (entries_.rowwise() - centroids_.row(0)).rowwise().squaredNorm().cast<double>();
  for (Eigen::Index c = 1; c < lists; ++c) {
    const double total = best_sq.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (pick = 0; pick < n - 1; ++pick) {
        target -= best_sq[pick];
        if (target < 0.0) break;
      }
    } else {
      pick = c % n;
    }
    centroids_.row(c) = entries_.row(pick);
    best_sq = best_sq.cwiseMin(
        (entries_.rowwise() - centroids_.row(c)).rowwise().squaredNorm().cast<double>());
  }

  std::vector<Eigen::Index> assign(static_cast<std::size_t>(n), 0);
  const auto assign_all = [&] {
    const Eigen::MatrixXf dots = entries_ * centroids_.transpose();
    const Eigen::VectorXf c_sq = centroids_.rowwise().squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      float best_d = c_sq[0] - 2.0f * dots(i, 0);
      for (Eigen::Index c = 1; c < lists; ++c) {
        const float d = c_sq[c] - 2.0f * dots(i, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assign[static_cast<std::size_t>(i)] = best;
    }
  };
  for (int iter = 0; iter < kKmeansIterations; ++iter) {
    assign_all();
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(lists, entries_.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(lists);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[i]) += entries_.row(i).cast<double>();
      counts[assign[i]] += 1.0;
    }
    for (Eigen::Index c = 0; c < lists; ++c) {
      if (counts[c] > 0.0) centroids_.row(c) = (sums.row(c) / counts[c]).cast<float>();
    }
  }
  assign_all();

  list_offsets_.assign(static_cast<std::size_t>(lists + 1), 0);
  for (Eigen::Index i = 0; i < n; ++i) ++list_offsets_[static_cast<std::size_t>(assign[i] + 1)];
  std::partial_sum(list_offsets_.begin(), list_offsets_.end(), list_offsets_.begin());
  list_entries_.resize(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> fill(list_offsets_.begin(), list_offsets_.end() - 1);
  for (Eigen::Index i = 0; i < n; ++i) list_entries_[static_cast<std::size_t>(fill[assign[i]]++)] = i;
  radii_.assign(static_cast<std::size_t>(lists), 0.0f);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index c = assign[static_cast<std::size_t>(i)];
    radii_[c] = std::max(radii_[c], (entries_.row(i) - centroids_.row(c)).norm());
  }
}

Neighbor NeighborIndex::nearest_exact(const Embedding& query) const {
  if (query.size() != dim()) {
    throw Error(ErrorCode::DimMismatch, "query has dimension " + std::to_string(query.size()) +
                                            ", index expects " + std::to_string(dim()));
  }
  const Eigen::VectorXf sims = entries_ * query;
  Neighbor best{0, sims[0]};
  for (Eigen::Index i = 1; i < sims.size(); ++i) {
    if (sims[i] > best.similarity) best = {i, sims[i]};
  }
  return best;
}

Neighbor NeighborIndex::nearest_approximate(const Embedding& query, int num_probes) const {
  if (centroids_.rows() == 0) return nearest_exact(query);
  if (query.size() != dim()) throw Error(ErrorCode::DimMismatch, "query dimension mismatch");
  const Eigen::Index lists = centroids_.rows();
  const int probes = num_probes > 0 ? num_probes
                                    : std::max(1, static_cast<int>((lists + 3) / 4));

  // <q, e> <= <q, c> + |q| r for every entry e of a list with centroid c.
  const float q_norm = query.norm();
  const Eigen::VectorXf centroid_sims = centroids_ * query;
  std::vector<std::pair<float, Eigen::Index>> order(static_cast<std::size_t>(lists));
  for (Eigen::Index c = 0; c < lists; ++c) {
    order[static_cast<std::size_t>(c)] = {centroid_sims[c] + q_norm * radii_[c], c};
  }
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });

  Neighbor best;
  int probed = 0;
  for (const auto& [bound, c] : order) {
    if (best.entry >= 0 && (probed >= probes || bound <= best.similarity)) break;
    for (Eigen::Index k = list_offsets_[c]; k < list_offsets_[c + 1]; ++k) {
      const Eigen::Index i = list_entries_[static_cast<std::size_t>(k)];
      const float s = entries_.row(i).dot(query);
      if (best.entry < 0 || s > best.similarity || (s == best.similarity && i < best.entry)) {
        best = {i, s};
      }
    }
    ++probed;
  }
  return best;
}

Neighbor NeighborIndex::nearest(const Embedding& query) const {
  return config_.mode == SearchMode::Approximate ? nearest_approximate(query, config_.num_probes)
                                                 : nearest_exact(query);
}

OosScore NeighborIndex::score(const Embedding& query) const { return score(query, config_); }

OosScore NeighborIndex::score(const Embedding& query, const OosScorerConfig& config) const {
  const Neighbor nn = config.mode == SearchMode::Approximate
                          ? nearest_approximate(query, config.num_probes)
                          : nearest_exact(query);
  OosScore out;
  out.distance = std::max(0.0, 1.0 - static_cast<double>(nn.similarity));
  out.nearest_source = source(nn.entry);
  if (out.nearest_source == Source::OutOfScope) out.distance += config.oos_penalty;
  return out;
}

}  // namespace oosd

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

#ifndef OOSD_FEATURIZE_HPP_
#define OOSD_FEATURIZE_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oosd {

using Embedding = Eigen::VectorXf;
// One embedding per row.
using EmbeddingMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Featureless input embeds to the zero vector; that vector is the flag.
inline bool is_empty_embedding(const Embedding& e) { return e.squaredNorm() == 0.0f; }

// Text -> unit-length dense embedding. Implementations are immutable after
// construction and safe for concurrent `embed` calls.
class Featurizer {
 public:
  virtual ~Featurizer() = default;
  virtual Eigen::Index dim() const = 0;
  virtual Embedding embed(std::string_view normalized_text) const = 0;

  EmbeddingMatrix embed_all(std::span<const std::string> texts) const;
};

struct TfidfConfig {
  // Hashed feature space; must be a power of two.
  std::uint32_t buckets = 1u << 15;
  // Output dimension of the signed sparse projection. 0 keeps the raw
  // bucket space as the embedding.
  std::uint32_t embedding_dim = 256;
  // Non-zeros per bucket in the projection.
  std::uint32_t projection_nnz = 4;
  int word_ngram_min = 1;
  int word_ngram_max = 2;
  // Character n-grams are taken inside each space-padded word.
  int char_ngram_min = 3;
  int char_ngram_max = 5;
  std::uint64_t hash_seed = 0x6f6f7364u;

  bool operator==(const TfidfConfig&) const = default;
};

// Hashed bucket -> raw term frequency, sorted by bucket.
using SparseFeatures = std::vector<std::pair<std::uint32_t, float>>;

class HashedTfidf final : public Featurizer {
 public:
  // Smoothed idf = ln((1 + N) / (1 + df)) + 1 per bucket.
  static HashedTfidf fit(std::span<const std::string> corpus, const TfidfConfig& config = {});
  static HashedTfidf from_parts(const TfidfConfig& config, Eigen::VectorXf idf,
                                std::uint64_t num_documents);

  Eigen::Index dim() const override;
  Embedding embed(std::string_view normalized_text) const override;

  SparseFeatures extract(std::string_view normalized_text) const;

  const TfidfConfig& config() const { return config_; }
  const Eigen::VectorXf& idf() const { return idf_; }
  std::uint64_t num_documents() const { return num_documents_; }

 private:
  HashedTfidf(const TfidfConfig& config, Eigen::VectorXf idf, std::uint64_t num_documents);

  TfidfConfig config_;
  Eigen::VectorXf idf_;
  std::uint64_t num_documents_ = 0;
};

void validate(const TfidfConfig& config);

// Exact-match store for embeddings produced by an external encoder.
// File format, UTF-8, one row per line: `text<TAB>v1,v2,...,vd`.
class PrecomputedEmbeddingStore final : public Featurizer {
 public:
  static PrecomputedEmbeddingStore load(const std::filesystem::path& path);
  static PrecomputedEmbeddingStore parse(std::string_view contents);

  Eigen::Index dim() const override { return dim_; }
  // Throws Error(MissingEmbedding) on a miss.
  Embedding embed(std::string_view normalized_text) const override { return lookup(normalized_text); }
  Embedding lookup(std::string_view text) const;

  std::size_t size() const { return rows_.size(); }
  // Rows in file order.
  const std::vector<std::pair<std::string, Embedding>>& rows() const { return rows_; }
  std::string serialize() const;

  static PrecomputedEmbeddingStore from_rows(std::vector<std::pair<std::string, Embedding>> rows);

 private:
  Eigen::Index dim_ = 0;
  std::vector<std::pair<std::string, Embedding>> rows_;
  std::unordered_map<std::string, std::size_t> by_text_;
};

}  // namespace oosd

#endif  // OOSD_FEATURIZE_HPP_

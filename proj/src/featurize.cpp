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

#include "oosd/featurize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <unicode/utf8.h>

#include "oosd/error.hpp"

namespace oosd {
namespace {

constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

class FeatureHasher {
 public:
  explicit FeatureHasher(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t begin(char kind) const {
    std::uint64_t h = kFnvOffset ^ mix64(seed_);
    return feed(h, std::string_view(&kind, 1));
  }

  static std::uint64_t feed(std::uint64_t h, std::string_view bytes) {
    for (unsigned char ch : bytes) {
      h ^= ch;
      h *= kFnvPrime;
    }
    return h;
  }

  static std::uint64_t finish(std::uint64_t h) { return mix64(h); }

 private:
  std::uint64_t seed_;
};

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    std::size_t end = pos;
    while (end < text.size() && text[end] != ' ') ++end;
    if (end > pos) words.push_back(text.substr(pos, end - pos));
    pos = end;
  }
  return words;
}

}  // namespace

EmbeddingMatrix Featurizer::embed_all(std::span<const std::string> texts) const {
  EmbeddingMatrix out(static_cast<Eigen::Index>(texts.size()), dim());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = embed(texts[i]).transpose();
  }
  return out;
}

void validate(const TfidfConfig& config) {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigError, what); };
  if (config.buckets < 2 || (config.buckets & (config.buckets - 1)) != 0) {
    fail("buckets must be a power of two >= 2");
  }
  if (config.embedding_dim == 1) fail("embedding_dim must be 0 or >= 2");
  if (config.embedding_dim != 0 && config.projection_nnz == 0) fail("projection_nnz must be >= 1");
  if (config.word_ngram_min < 1 || config.word_ngram_max < config.word_ngram_min) {
    if (!(config.word_ngram_min == 0 && config.word_ngram_max == 0)) fail("bad word n-gram range");
  }
  if (config.char_ngram_min < 1 || config.char_ngram_max < config.char_ngram_min) {
    if (!(config.char_ngram_min == 0 && config.char_ngram_max == 0)) fail("bad char n-gram range");
  }
  if (config.word_ngram_max == 0 && config.char_ngram_max == 0) fail("no features enabled");
}

HashedTfidf::HashedTfidf(const TfidfConfig& config, Eigen::VectorXf idf,
                         std::uint64_t num_documents)
    : config_(config), idf_(std::move(idf)), num_documents_(num_documents) {}

HashedTfidf HashedTfidf::from_parts(const TfidfConfig& config, Eigen::VectorXf idf,
                                    std::uint64_t num_documents) {
  validate(config);
  if (idf.size() != static_cast<Eigen::Index>(config.buckets)) {
    throw Error(ErrorCode::ConfigError, "idf size does not match bucket count");
  }
  return HashedTfidf(config, std::move(idf), num_documents);
}

HashedTfidf HashedTfidf::fit(std::span<const std::string> corpus, const TfidfConfig& config) {
  validate(config);
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot fit tf-idf on an empty corpus");

  HashedTfidf model(config, Eigen::VectorXf::Zero(config.buckets), corpus.size());
  Eigen::VectorXd df = Eigen::VectorXd::Zero(config.buckets);
  for (const auto& doc : corpus) {
    for (const auto& [bucket, tf] : model.extract(doc)) df[bucket] += 1.0;
  }
  const double n = static_cast<double>(corpus.size());
  model.idf_ = ((1.0 + n) / (1.0 + df.array())).log().cast<float>() + 1.0f;
  return model;
}

Eigen::Index HashedTfidf::dim() const {
  return config_.embedding_dim == 0 ? static_cast<Eigen::Index>(config_.buckets)
                                    : static_cast<Eigen::Index>(config_.embedding_dim);
}

SparseFeatures HashedTfidf::extract(std::string_view text) const {
  const FeatureHasher hasher(config_.hash_seed);
  const std::uint64_t mask = config_.buckets - 1;
  std::vector<std::uint32_t> hits;
  const auto words = split_words(text);

  if (config_.word_ngram_max > 0) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      std::uint64_t h = hasher.begin('w');
      for (int n = 1; n <= config_.word_ngram_max && i + n <= words.size(); ++n) {
        if (n > 1) h = FeatureHasher::feed(h, " ");
        h = FeatureHasher::feed(h, words[i + n - 1]);
        if (n >= config_.word_ngram_min) {
          hits.push_back(static_cast<std::uint32_t>(FeatureHasher::finish(h) & mask));
        }
      }
    }
  }

  if (config_.char_ngram_max > 0) {
    std::string padded;
    std::vector<std::size_t> starts;
    for (auto word : words) {
      padded.clear();
      padded += ' ';
      padded += word;
      padded += ' ';
      starts.clear();
      for (int32_t i = 0; i < static_cast<int32_t>(padded.size());) {
        starts.push_back(static_cast<std::size_t>(i));
        U8_FWD_1(padded.data(), i, static_cast<int32_t>(padded.size()));
      }
      starts.push_back(padded.size());
      const std::size_t num_cp = starts.size() - 1;
      for (std::size_t i = 0; i < num_cp; ++i) {
        for (int n = config_.char_ngram_min; n <= config_.char_ngram_max; ++n) {
          if (i + static_cast<std::size_t>(n) > num_cp) break;
          const std::string_view gram(padded.data() + starts[i], starts[i + n] - starts[i]);
          std::uint64_t h = FeatureHasher::feed(hasher.begin('c'), gram);
          hits.push_back(static_cast<std::uint32_t>(FeatureHasher::finish(h) & mask));
        }
      }
    }
  }

  std::sort(hits.begin(), hits.end());
  SparseFeatures features;
  for (std::uint32_t bucket : hits) {
    if (!features.empty() && features.back().first == bucket) {
      features.back().second += 1.0f;
    } else {
      features.emplace_back(bucket, 1.0f);
    }
  }
  return features;
}

Embedding HashedTfidf::embed(std::string_view text) const {
  const SparseFeatures features = extract(text);
  Embedding out = Embedding::Zero(dim());
  if (config_.embedding_dim == 0) {
    for (const auto& [bucket, tf] : features) out[bucket] = tf * idf_[bucket];
  } else {
    const float scale = 1.0f / std::sqrt(static_cast<float>(config_.projection_nnz));
    for (const auto& [bucket, tf] : features) {
      const float w = tf * idf_[bucket] * scale;
      for (std::uint32_t j = 0; j < config_.projection_nnz; ++j) {
        const std::uint64_t h =
            mix64(config_.hash_seed ^ ((static_cast<std::uint64_t>(bucket) << 8) | j) ^
                  0x9e3779b97f4a7c15ull);
        const auto coord = static_cast<Eigen::Index>((h & 0xffffffffu) % config_.embedding_dim);
        out[coord] += (h >> 63) ? -w : w;
      }
    }
  }
  const float norm = out.norm();
  if (norm > 0.0f) out /= norm;
  return out;
}

// ---------------------------------------------------------------------------

PrecomputedEmbeddingStore PrecomputedEmbeddingStore::from_rows(
    std::vector<std::pair<std::string, Embedding>> rows) {
  PrecomputedEmbeddingStore store;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& [text, vec] = rows[i];
    if (i == 0) store.dim_ = vec.size();
    if (vec.size() == 0 || vec.size() != store.dim_) {
      throw Error(ErrorCode::MalformedFile,
                  "row " + std::to_string(i + 1) + " has dimension " + std::to_string(vec.size()) +
                      ", expected " + std::to_string(store.dim_));
    }
    const double norm = vec.cast<double>().norm();
    if (norm != 0.0 && std::abs(norm - 1.0) > 1e-3) {
      throw Error(ErrorCode::MalformedFile,
                  "row " + std::to_string(i + 1) + " is not unit length");
    }
    if (!store.by_text_.emplace(text, i).second) {
      throw Error(ErrorCode::MalformedFile, "duplicate text '" + text + "'");
    }
  }
  store.rows_ = std::move(rows);
  return store;
}

PrecomputedEmbeddingStore PrecomputedEmbeddingStore::parse(std::string_view contents) {
  std::vector<std::pair<std::string, Embedding>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    std::string_view line = contents.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const std::size_t tab = line.rfind('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::MalformedFile, "line " + std::to_string(line_no) + ": missing TAB");
    }
    std::vector<float> values;
    std::string_view rest = line.substr(tab + 1);
    while (true) {
      const std::size_t comma = rest.find(',');
      const std::string_view field = rest.substr(0, comma);
      float v = 0.0f;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw Error(ErrorCode::MalformedFile,
                    "line " + std::to_string(line_no) + ": bad number '" + std::string(field) + "'");
      }
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    rows.emplace_back(std::string(line.substr(0, tab)),
                      Eigen::Map<const Embedding>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  return from_rows(std::move(rows));
}

PrecomputedEmbeddingStore PrecomputedEmbeddingStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

Embedding PrecomputedEmbeddingStore::lookup(std::string_view text) const {
  auto it = by_text_.find(std::string(text));
  if (it == by_text_.end()) {
    throw Error(ErrorCode::MissingEmbedding, "no embedding for '" + std::string(text) + "'");
  }
  return rows_[it->second].second;
}

std::string PrecomputedEmbeddingStore::serialize() const {
  std::string out;
  char buf[32];
  for (const auto& [text, vec] : rows_) {
    out += text;
    out += '\t';
    for (Eigen::Index i = 0; i < vec.size(); ++i) {
      if (i > 0) out += ',';
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), vec[i]);
      out.append(buf, end);
    }
    out += '\n';
  }
  return out;
}

}  // namespace oosd

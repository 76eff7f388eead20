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

#include "oosd/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "oosd/error.hpp"

namespace oosd {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

// Rejects keys outside `allowed` so typos do not silently fall back to defaults.
void check_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) config_error(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) config_error("unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

json featurizer_json(const TfidfConfig& c) {
  return {{"buckets", c.buckets},
          {"embedding_dim", c.embedding_dim},
          {"projection_nnz", c.projection_nnz},
          {"word_ngram_min", c.word_ngram_min},
          {"word_ngram_max", c.word_ngram_max},
          {"char_ngram_min", c.char_ngram_min},
          {"char_ngram_max", c.char_ngram_max},
          {"hash_seed", c.hash_seed}};
}

TfidfConfig featurizer_from(const json& j) {
  check_keys(j, "featurizer", {"buckets", "embedding_dim", "projection_nnz", "word_ngram_min",
                               "word_ngram_max", "char_ngram_min", "char_ngram_max", "hash_seed"});
  TfidfConfig c;
  read(j, "buckets", c.buckets);
  read(j, "embedding_dim", c.embedding_dim);
  read(j, "projection_nnz", c.projection_nnz);
  read(j, "word_ngram_min", c.word_ngram_min);
  read(j, "word_ngram_max", c.word_ngram_max);
  read(j, "char_ngram_min", c.char_ngram_min);
  read(j, "char_ngram_max", c.char_ngram_max);
  read(j, "hash_seed", c.hash_seed);
  return c;
}

json classifier_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"l2", c.l2},
          {"max_iterations", c.max_iterations}, {"tolerance", c.tolerance},
          {"balance_classes", c.balance_classes}, {"block_size", c.block_size}};
}

TrainConfig classifier_from(const json& j) {
  check_keys(j, "classifier",
             {"learning_rate", "l2", "max_iterations", "tolerance", "balance_classes", "block_size"});
  TrainConfig c;
  read(j, "learning_rate", c.learning_rate);
  read(j, "l2", c.l2);
  read(j, "max_iterations", c.max_iterations);
  read(j, "tolerance", c.tolerance);
  read(j, "balance_classes", c.balance_classes);
  read(j, "block_size", c.block_size);
  return c;
}

json scorer_json(const OosScorerConfig& c) {
  return {{"blend_weight", c.blend_weight}, {"oos_penalty", c.oos_penalty},
          {"renormalize", c.renormalize}, {"mode", search_mode_name(c.mode)},
          {"num_lists", c.num_lists}, {"num_probes", c.num_probes}, {"seed", c.seed}};
}

OosScorerConfig scorer_from(const json& j) {
  check_keys(j, "scorer",
             {"blend_weight", "oos_penalty", "renormalize", "mode", "num_lists", "num_probes", "seed"});
  OosScorerConfig c;
  read(j, "blend_weight", c.blend_weight);
  read(j, "oos_penalty", c.oos_penalty);
  read(j, "renormalize", c.renormalize);
  std::string mode(search_mode_name(c.mode));
  read(j, "mode", mode);
  c.mode = parse_search_mode(mode);
  read(j, "num_lists", c.num_lists);
  read(j, "num_probes", c.num_probes);
  read(j, "seed", c.seed);
  return c;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

nlohmann::json detector_config_to_json(const DetectorConfig& c) {
  return {{"formulation", formulation_name(c.formulation)},
          {"featurizer", featurizer_json(c.featurizer)},
          {"classifier", classifier_json(c.classifier)},
          {"scorer", scorer_json(c.scorer)},
          {"oos_method", oos_method_name(c.oos_method)},
          {"pca_components", c.pca_components},
          {"combiner",
           {{"steepness", c.combiner.steepness},
            {"threshold", c.combiner.threshold},
            {"clamp_factor", c.combiner.clamp_factor}}},
          {"gate_threshold", c.gate_threshold},
          {"synonym_example", c.synonym_example},
          {"limits",
           {{"max_is_examples", c.limits.max_is_examples},
            {"max_oos_examples", c.limits.max_oos_examples},
            {"max_classes", c.limits.max_classes}}}};
}

DetectorConfig detector_config_from_json(const nlohmann::json& j) {
  check_keys(j, "detector config",
             {"formulation", "featurizer", "classifier", "scorer", "oos_method", "pca_components",
              "combiner", "gate_threshold", "synonym_example", "limits"});
  DetectorConfig c;
  std::string name(formulation_name(c.formulation));
  read(j, "formulation", name);
  c.formulation = parse_formulation(name);
  if (j.contains("featurizer")) c.featurizer = featurizer_from(j["featurizer"]);
  if (j.contains("classifier")) c.classifier = classifier_from(j["classifier"]);
  if (j.contains("scorer")) c.scorer = scorer_from(j["scorer"]);
  name = oos_method_name(c.oos_method);
  read(j, "oos_method", name);
  c.oos_method = parse_oos_method(name);
  read(j, "pca_components", c.pca_components);
  if (j.contains("combiner")) {
    const json& cj = j["combiner"];
    check_keys(cj, "combiner", {"steepness", "threshold", "clamp_factor"});
    read(cj, "steepness", c.combiner.steepness);
    read(cj, "threshold", c.combiner.threshold);
    read(cj, "clamp_factor", c.combiner.clamp_factor);
  }
  read(j, "gate_threshold", c.gate_threshold);
  read(j, "synonym_example", c.synonym_example);
  if (j.contains("limits")) {
    const json& lj = j["limits"];
    check_keys(lj, "limits", {"max_is_examples", "max_oos_examples", "max_classes"});
    read(lj, "max_is_examples", c.limits.max_is_examples);
    read(lj, "max_oos_examples", c.limits.max_oos_examples);
    read(lj, "max_classes", c.limits.max_classes);
  }
  validate(c);
  return c;
}

TrainJob parse_train_job(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("training config is not valid JSON: ") + e.what());
  }
  check_keys(j, "training config",
             {"detector", "train_file", "delimiter", "oos_intents", "manifest", "lexicon", "embeddings",
              "output"});
  TrainJob job;
  if (j.contains("detector")) job.detector = detector_config_from_json(j["detector"]);
  std::string s;
  if (j.contains("train_file")) {
    read(j, "train_file", s);
    job.train_file = resolve(base_dir, s);
  }
  if (j.contains("delimiter")) {
    read(j, "delimiter", s);
    if (s.size() != 1) config_error("delimiter must be a single character");
    job.delimiter = s[0];
  }
  read(j, "oos_intents", job.oos_intents);
  if (j.contains("manifest")) {
    read(j, "manifest", s);
    job.manifest = resolve(base_dir, s);
  }
  if (j.contains("lexicon")) {
    read(j, "lexicon", s);
    job.lexicon = resolve(base_dir, s);
  }
  if (j.contains("embeddings")) {
    read(j, "embeddings", s);
    job.embeddings = resolve(base_dir, s);
  }
  if (!j.contains("output")) config_error("training config needs 'output'");
  read(j, "output", s);
  job.output = resolve(base_dir, s);
  if (job.train_file.has_value() == job.manifest.has_value()) {
    config_error("training config needs exactly one of 'train_file' and 'manifest'");
  }
  return job;
}

TrainJob load_train_job(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_train_job(buffer.str(), path.parent_path());
}

}  // namespace oosd

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

#ifndef OOSD_CONFIG_HPP_
#define OOSD_CONFIG_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "oosd/pipeline.hpp"

namespace oosd {

// JSON form of DetectorConfig. Every key is optional; missing keys keep
// their defaults. Unknown keys are rejected.
nlohmann::json detector_config_to_json(const DetectorConfig& config);
DetectorConfig detector_config_from_json(const nlohmann::json& j);

// Input of `oosd train`.
struct TrainJob {
  DetectorConfig detector;
  // Delimited training file (`text`, `intent` columns) ...
  std::optional<std::filesystem::path> train_file;
  char delimiter = '\t';
  // ... whose rows with these intents are OOS examples.
  std::vector<std::string> oos_intents;
  // Or a dataset manifest whose train split is used.
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> lexicon;
  // Precomputed embeddings replace the tf-idf featurizer when set.
  std::optional<std::filesystem::path> embeddings;
  std::filesystem::path output;
};

TrainJob load_train_job(const std::filesystem::path& path);
TrainJob parse_train_job(std::string_view json_text, const std::filesystem::path& base_dir = {});

}  // namespace oosd

#endif  // OOSD_CONFIG_HPP_

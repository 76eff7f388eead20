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

#ifndef OOSD_DATASET_HPP_
#define OOSD_DATASET_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oosd/metrics.hpp"

namespace oosd {

struct LabeledExample {
  std::string text;
  // OOS examples keep their source intent for bookkeeping.
  std::string intent;
  Scope scope = Scope::InScope;

  bool operator==(const LabeledExample&) const = default;
};

enum class Split { Train, Dev, Test };
inline constexpr Split kAllSplits[] = {Split::Train, Split::Dev, Split::Test};
std::string_view split_name(Split s);

// Counts per scope in the order IS, ID-OOS, OOD-OOS.
using ScopeCounts = std::array<std::size_t, 3>;

struct SplitBundle {
  std::string name;
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> dev;
  std::vector<LabeledExample> test;
  std::vector<std::string> idoos_intents;
  std::vector<std::string> warnings;

  const std::vector<LabeledExample>& split(Split s) const;
  ScopeCounts counts(Split s) const;
  // FNV-1a over every example of every split, as 16 hex digits.
  std::string digest() const;
};

// One input file of a dataset.
struct SourceFile {
  // "train", "dev", "test", or "all" (rows pooled for a three-way split).
  std::string split;
  std::filesystem::path path;
  // "delimited" or "clinc-json" (object of train/val/test/oos_* arrays of
  // [text, intent] pairs; the split field is ignored).
  std::string format = "delimited";
  char delimiter = '\t';
  bool header = true;
  bool quoting = false;
  // Column names when `header`, zero-based indices otherwise.
  std::string text_column = "text";
  std::string intent_column = "intent";
  // Forces the scope of every row when set.
  std::optional<Scope> scope;
};

struct AutoSelection {
  double fraction = 0.25;
  std::uint64_t seed = 0;
};

struct DatasetManifest {
  std::string name;
  std::vector<SourceFile> sources;
  std::vector<std::string> ood_intents;
  // Intents relabeled ID-OOS; ignored when `idoos_auto` is set.
  std::vector<std::string> idoos_intents;
  std::optional<AutoSelection> idoos_auto;
  // "none" or "coarse" (keep the part before the first '/').
  std::string intent_transform = "none";
  // Restrict in-scope rows to these intents when non-empty.
  std::vector<std::string> keep_intents;
  bool drop_empty_text = false;
  // Stratified fraction of train moved to dev.
  std::optional<double> dev_fraction;
  // Stratified train/dev/test fractions applied to "all" rows.
  std::optional<std::array<double, 3>> three_way;
  std::uint64_t seed = 0;
  std::optional<std::map<Split, ScopeCounts>> expected_counts;
  bool strict_counts = true;
  // Directory relative paths are resolved against.
  std::filesystem::path base_dir;
};

DatasetManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir = {});
DatasetManifest load_manifest(const std::filesystem::path& path);

// Throws CountMismatch, ParseError, UnknownIntentInManifest, IoError.
SplitBundle load_dataset(const DatasetManifest& manifest);

// Picks whole intents, visiting them in seeded random order and adding one
// whenever it brings the total strictly closer to fraction * total.
std::vector<std::string> select_idoos_intents(const std::map<std::string, std::size_t>& intent_counts,
                                              const AutoSelection& selection);

// Stratified holdout: ceil(fraction * n) rows, allocated to strata by
// largest remainder, drawn with a seeded shuffle. Returns a mask of held-out rows.
std::vector<bool> stratified_holdout(const std::vector<std::string>& strata, double fraction,
                                     std::uint64_t seed);

// RFC 4180 style reader; `quoting` enables double-quoted fields.
std::vector<std::vector<std::string>> read_delimited(std::string_view contents, char delimiter,
                                                     bool quoting);

}  // namespace oosd

#endif  // OOSD_DATASET_HPP_

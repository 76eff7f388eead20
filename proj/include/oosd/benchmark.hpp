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

#ifndef OOSD_BENCHMARK_HPP_
#define OOSD_BENCHMARK_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "oosd/dataset.hpp"
#include "oosd/metrics.hpp"
#include "oosd/pipeline.hpp"

namespace oosd {

struct BenchConfig {
  std::vector<Formulation> formulations{std::begin(kAllFormulations), std::end(kAllFormulations)};
  // Seeds the approximate index and the dev-set sweep; splits keep the
  // manifest's own seed so their counts stay fixed.
  std::uint64_t seed = 42;
  DetectorConfig detector;
  // Tune blend weight, OOS penalty and steepness of discounting on dev.
  bool sweep = false;
  // Datasets evaluated concurrently.
  int workers = 1;
};

struct BenchRow {
  std::string dataset;
  Formulation formulation = Formulation::Discounting;
  // Whole test split, then IS + ID-OOS only and IS + OOD-OOS only. A slice
  // is absent when the test split has no OOS of that kind.
  EvalReport all;
  std::optional<EvalReport> id_slice;
  std::optional<EvalReport> ood_slice;
  // Parameters the sweep chose; empty without a sweep.
  nlohmann::json tuned;
};

struct AggregateRow {
  std::string table;  // "overall", "hint3", "id-oos", "ood-oos"
  Formulation formulation = Formulation::Discounting;
  EvalReport report;
  std::size_t num_datasets = 0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<AggregateRow> aggregates;
  // "dataset: reason" for every dataset that could not run.
  std::vector<std::string> missing;
};

// One record per example, predicted by `detector`.
std::vector<ScoreRecord> score_examples(const OosDetector& detector,
                                        std::span<const LabeledExample> examples);

TrainingSet training_set(const SplitBundle& bundle);

// Rows keep manifest order, then formulation order.
BenchResult run_benchmark(std::span<const std::filesystem::path> manifests, const BenchConfig& config);

// Datasets whose name starts with "HINT3" form the Table-4 style subset.
std::vector<AggregateRow> aggregate_rows(std::span<const BenchRow> rows,
                                         std::span<const Formulation> formulations);

nlohmann::json bench_to_json(const BenchResult& result);
// Aligned plain-text tables, metrics in percent, "-" for absent values.
std::string render_tables(const BenchResult& result);

}  // namespace oosd

#endif  // OOSD_BENCHMARK_HPP_

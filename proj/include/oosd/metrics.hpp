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

#ifndef OOSD_METRICS_HPP_
#define OOSD_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oosd {

enum class Scope { InScope, IdOos, OodOos };

std::string_view scope_name(Scope s);
inline bool is_oos(Scope s) { return s != Scope::InScope; }

struct ScoreRecord {
  Scope gold_scope = Scope::InScope;
  std::string gold_intent;
  bool predicted_oos = false;
  std::string predicted_intent;
  // Higher means more in-scope. Required by the threshold-independent metrics.
  std::optional<double> score;
};

struct ConfusionCounts {
  std::size_t is_total = 0;
  std::size_t is_correct = 0;     // predicted in scope with the gold intent
  std::size_t is_predicted_oos = 0;
  std::size_t oos_total = 0;
  std::size_t oos_correct = 0;    // predicted OOS

  bool operator==(const ConfusionCounts&) const = default;
};

// Every metric is a fraction in [0, 1]; undefined metrics stay empty.
struct EvalReport {
  std::optional<double> overall_acc;
  std::optional<double> is_acc;
  std::optional<double> is_f1;
  std::optional<double> oos_f1;
  std::optional<double> oos_recall;
  std::optional<double> fpr90;
  std::optional<double> fpr95;
  std::optional<double> auroc;
  std::optional<double> aupr_in;
  std::optional<double> aupr_out;
  ConfusionCounts counts;
  std::size_t num_records = 0;

  bool operator==(const EvalReport&) const = default;
};

// Column order of the rendered tables.
inline constexpr std::string_view kMetricNames[] = {
    "overall_acc", "is_acc", "is_f1", "oos_f1", "oos_recall",
    "fpr90",       "fpr95",  "auroc", "aupr_in", "aupr_out"};
inline constexpr std::size_t kNumMetrics = std::size(kMetricNames);
inline constexpr std::size_t kNumThresholdDependent = 5;

std::optional<double>& metric_at(EvalReport& r, std::size_t i);
const std::optional<double>& metric_at(const EvalReport& r, std::size_t i);

// Throws EmptyRecords.
EvalReport evaluate_threshold_dependent(std::span<const ScoreRecord> records);

// In-scope is the positive class. Throws OneClassOnly, and ConfigError
// when a record has no score.
EvalReport evaluate_threshold_independent(std::span<const ScoreRecord> records);

// Both groups; the threshold-independent ones only when every record has a
// score.
EvalReport evaluate(std::span<const ScoreRecord> records);

// Unweighted mean per metric over the reports that define it.
EvalReport aggregate(std::span<const EvalReport> reports);

// Primitive curves over positive / negative score samples.
// Area under ROC: thresholds at every distinct score, tied scores moved
// together, trapezoidal area.
double roc_auc(std::span<const double> positive, std::span<const double> negative);
// Smallest FPR over thresholds whose TPR >= percent / 100.
double fpr_at_tpr(std::span<const double> positive, std::span<const double> negative, int percent);
// Step-wise area under precision-recall: sum over distinct thresholds of
// (R_k - R_{k-1}) * P_k.
double average_precision(std::span<const double> positive, std::span<const double> negative);

}  // namespace oosd

#endif  // OOSD_METRICS_HPP_

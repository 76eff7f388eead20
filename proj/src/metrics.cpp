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

#include "oosd/metrics.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "oosd/error.hpp"

namespace oosd {
namespace {

struct SweepPoint {
  std::size_t tp = 0;
  std::size_t fp = 0;
};

// Cumulative counts after admitting each distinct score, highest first.
std::vector<SweepPoint> sweep(std::span<const double> positive, std::span<const double> negative) {
  if (positive.empty() || negative.empty()) {
    throw Error(ErrorCode::OneClassOnly, "both positive and negative scores are required");
  }
  std::vector<std::pair<double, bool>> all;
  all.reserve(positive.size() + negative.size());
  for (double s : positive) all.emplace_back(s, true);
  for (double s : negative) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<SweepPoint> points;
  SweepPoint cur;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].second) {
      ++cur.tp;
    } else {
      ++cur.fp;
    }
    if (i + 1 == all.size() || all[i + 1].first != all[i].first) points.push_back(cur);
  }
  return points;
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::string_view scope_name(Scope s) {
  switch (s) {
    case Scope::InScope: return "IS";
    case Scope::IdOos: return "ID-OOS";
    case Scope::OodOos: return "OOD-OOS";
  }
  return "?";
}

std::optional<double>& metric_at(EvalReport& r, std::size_t i) {
  std::optional<double>* fields[] = {&r.overall_acc, &r.is_acc, &r.is_f1,  &r.oos_f1,  &r.oos_recall,
                                     &r.fpr90,       &r.fpr95,  &r.auroc, &r.aupr_in, &r.aupr_out};
  return *fields[i];
}

const std::optional<double>& metric_at(const EvalReport& r, std::size_t i) {
  return metric_at(const_cast<EvalReport&>(r), i);
}

double roc_auc(std::span<const double> positive, std::span<const double> negative) {
  const auto points = sweep(positive, negative);
  const double p = static_cast<double>(positive.size());
  const double n = static_cast<double>(negative.size());
  double area = 0.0;
  SweepPoint prev;
  for (const auto& pt : points) {
    area += (pt.fp - prev.fp) / n * (pt.tp + prev.tp) / (2.0 * p);
    prev = pt;
  }
  return area;
}

double fpr_at_tpr(std::span<const double> positive, std::span<const double> negative, int percent) {
  if (percent < 0 || percent > 100) throw Error(ErrorCode::ConfigError, "TPR percent must lie in [0, 100]");
  const auto points = sweep(positive, negative);
  if (percent == 0) return 0.0;
  const std::size_t p = positive.size();
  for (const auto& pt : points) {
    if (pt.tp * 100 >= static_cast<std::size_t>(percent) * p) {
      return static_cast<double>(pt.fp) / static_cast<double>(negative.size());
    }
  }
  return 1.0;
}

double average_precision(std::span<const double> positive, std::span<const double> negative) {
  const auto points = sweep(positive, negative);
  const double p = static_cast<double>(positive.size());
  double area = 0.0;
  std::size_t prev_tp = 0;
  for (const auto& pt : points) {
    const double precision = static_cast<double>(pt.tp) / static_cast<double>(pt.tp + pt.fp);
    area += (pt.tp - prev_tp) / p * precision;
    prev_tp = pt.tp;
  }
  return area;
}

EvalReport evaluate_threshold_dependent(std::span<const ScoreRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyRecords, "no records to evaluate");
  EvalReport r;
  r.num_records = records.size();
  ConfusionCounts& c = r.counts;

  struct IntentCounts {
    std::size_t tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, IntentCounts> per_intent;
  for (const auto& rec : records) {
    if (rec.gold_scope == Scope::InScope) per_intent.try_emplace(rec.gold_intent);
  }
  std::size_t oos_fp = 0;  // in-scope queries predicted OOS
  for (const auto& rec : records) {
    if (rec.gold_scope == Scope::InScope) {
      ++c.is_total;
      const bool correct = !rec.predicted_oos && rec.predicted_intent == rec.gold_intent;
      if (correct) {
        ++c.is_correct;
        ++per_intent[rec.gold_intent].tp;
      } else {
        ++per_intent[rec.gold_intent].fn;
        if (rec.predicted_oos) {
          ++c.is_predicted_oos;
          ++oos_fp;
        } else if (auto it = per_intent.find(rec.predicted_intent); it != per_intent.end()) {
          ++it->second.fp;
        }
      }
    } else {
      ++c.oos_total;
      if (rec.predicted_oos) {
        ++c.oos_correct;
      } else if (auto it = per_intent.find(rec.predicted_intent); it != per_intent.end()) {
        ++it->second.fp;
      }
    }
  }

  r.overall_acc = ratio(c.is_correct + c.oos_correct, records.size());
  r.is_acc = ratio(c.is_correct, c.is_total);
  if (!per_intent.empty()) {
    double sum = 0.0;
    for (const auto& [intent, k] : per_intent) {
      sum += 2.0 * k.tp / static_cast<double>(2 * k.tp + k.fp + k.fn);
    }
    r.is_f1 = sum / static_cast<double>(per_intent.size());
  }
  if (c.oos_total > 0) {
    r.oos_recall = ratio(c.oos_correct, c.oos_total);
    const std::size_t fn = c.oos_total - c.oos_correct;
    r.oos_f1 = 2.0 * c.oos_correct / static_cast<double>(2 * c.oos_correct + oos_fp + fn);
  }
  return r;
}

EvalReport evaluate_threshold_independent(std::span<const ScoreRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyRecords, "no records to evaluate");
  std::vector<double> pos, neg;
  for (const auto& rec : records) {
    if (!rec.score) throw Error(ErrorCode::ConfigError, "record without a score");
    (rec.gold_scope == Scope::InScope ? pos : neg).push_back(*rec.score);
  }
  EvalReport r;
  r.num_records = records.size();
  r.fpr90 = fpr_at_tpr(pos, neg, 90);
  r.fpr95 = fpr_at_tpr(pos, neg, 95);
  r.auroc = roc_auc(pos, neg);
  r.aupr_in = average_precision(pos, neg);
  std::vector<double> pos_out(neg.size()), neg_out(pos.size());
  std::transform(neg.begin(), neg.end(), pos_out.begin(), [](double s) { return -s; });
  std::transform(pos.begin(), pos.end(), neg_out.begin(), [](double s) { return -s; });
  r.aupr_out = average_precision(pos_out, neg_out);
  return r;
}

EvalReport evaluate(std::span<const ScoreRecord> records) {
  EvalReport r = evaluate_threshold_dependent(records);
  const bool scored = std::all_of(records.begin(), records.end(),
                                  [](const ScoreRecord& rec) { return rec.score.has_value(); });
  const bool both = r.counts.is_total > 0 && r.counts.oos_total > 0;
  if (scored && both) {
    const EvalReport ti = evaluate_threshold_independent(records);
    for (std::size_t i = kNumThresholdDependent; i < kNumMetrics; ++i) metric_at(r, i) = metric_at(ti, i);
  }
  return r;
}

EvalReport aggregate(std::span<const EvalReport> reports) {
  EvalReport out;
  for (std::size_t i = 0; i < kNumMetrics; ++i) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : reports) {
      if (const auto& v = metric_at(r, i)) {
        sum += *v;
        ++n;
      }
    }
    if (n > 0) metric_at(out, i) = sum / static_cast<double>(n);
  }
  for (const auto& r : reports) {
    out.num_records += r.num_records;
    out.counts.is_total += r.counts.is_total;
    out.counts.is_correct += r.counts.is_correct;
    out.counts.is_predicted_oos += r.counts.is_predicted_oos;
    out.counts.oos_total += r.counts.oos_total;
    out.counts.oos_correct += r.counts.oos_correct;
  }
  return out;
}

}  // namespace oosd

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

#include <limits>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oosd/error.hpp"

namespace oosd {
namespace {

ScoreRecord rec(Scope scope, std::string gold, bool oos, std::string pred, std::optional<double> score = {}) {
  return {scope, std::move(gold), oos, std::move(pred), score};
}

// P(pos > neg) + P(pos == neg) / 2 over all pairs.
double pairwise_auroc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

// Every threshold t (score >= t is positive), including one above all scores.
double brute_fpr(const std::vector<double>& pos, const std::vector<double>& neg, int percent) {
  std::set<double> thresholds(pos.begin(), pos.end());
  thresholds.insert(neg.begin(), neg.end());
  thresholds.insert(std::numeric_limits<double>::infinity());
  double best = 1.0;
  for (double t : thresholds) {
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (double p : pos) tp += p >= t;
    for (double n : neg) fp += n >= t;
    if (tp * 100 >= static_cast<std::size_t>(percent) * pos.size()) {
      best = std::min(best, static_cast<double>(fp) / static_cast<double>(neg.size()));
    }
  }
  return best;
}

// Mean over positives of the precision at that positive's score.
double brute_ap(const std::vector<double>& pos, const std::vector<double>& neg) {
  double sum = 0.0;
  for (double s : pos) {
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (double p : pos) tp += p >= s;
    for (double n : neg) fp += n >= s;
    sum += static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  return sum / static_cast<double>(pos.size());
}

std::vector<double> draw(std::mt19937_64& rng, std::size_t n, int levels) {
  // Few distinct levels so ties are common.
  std::uniform_int_distribution<int> u(0, levels);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng) / static_cast<double>(levels);
  return v;
}

TEST(ThresholdDependent, HandCountedExample) {
  const std::vector<ScoreRecord> r = {
      rec(Scope::InScope, "a", false, "a"),
      rec(Scope::InScope, "b", true, ""),
      rec(Scope::IdOos, "x", true, ""),
      rec(Scope::OodOos, "y", false, "a"),
  };
  const EvalReport e = evaluate_threshold_dependent(r);
  EXPECT_DOUBLE_EQ(*e.overall_acc, 0.5);
  EXPECT_DOUBLE_EQ(*e.is_acc, 0.5);
  EXPECT_DOUBLE_EQ(*e.oos_recall, 0.5);
  // a: tp 1, fp 1 -> 2/3; b: fn 1 -> 0.
  EXPECT_DOUBLE_EQ(*e.is_f1, (2.0 / 3.0) / 2.0);
  // OOS class: tp 1, fp 1 (b), fn 1 (y) -> 2/4.
  EXPECT_DOUBLE_EQ(*e.oos_f1, 0.5);
  EXPECT_EQ(e.counts.is_correct + e.counts.oos_correct, 2u);
}

TEST(ThresholdDependent, PerfectPredictionsScoreOne) {
  const std::vector<ScoreRecord> r = {
      rec(Scope::InScope, "a", false, "a"), rec(Scope::InScope, "b", false, "b"),
      rec(Scope::OodOos, "x", true, "")};
  const EvalReport e = evaluate_threshold_dependent(r);
  for (std::size_t i = 0; i < kNumThresholdDependent; ++i) EXPECT_DOUBLE_EQ(*metric_at(e, i), 1.0);
}

TEST(ThresholdDependent, AllPredictedOosOnInScopeSet) {
  const std::vector<ScoreRecord> r = {rec(Scope::InScope, "a", true, ""), rec(Scope::InScope, "b", true, "")};
  const EvalReport e = evaluate_threshold_dependent(r);
  EXPECT_DOUBLE_EQ(*e.overall_acc, 0.0);
  EXPECT_FALSE(e.oos_f1.has_value());
  EXPECT_FALSE(e.oos_recall.has_value());
}

TEST(ThresholdDependent, OverallAccRederivableFromCounts) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ScoreRecord> r;
    for (int i = 0; i < 40; ++i) {
      const Scope s = static_cast<Scope>(rng() % 3);
      const bool oos = rng() % 2;
      r.push_back(rec(s, "i" + std::to_string(rng() % 3), oos, oos ? "" : "i" + std::to_string(rng() % 3)));
    }
    const EvalReport e = evaluate_threshold_dependent(r);
    EXPECT_DOUBLE_EQ(*e.overall_acc,
                     static_cast<double>(e.counts.is_correct + e.counts.oos_correct) / r.size());
  }
}

TEST(ThresholdDependent, EmptyThrows) {
  EXPECT_THROW(evaluate_threshold_dependent({}), Error);
}

TEST(ThresholdIndependent, PerfectSeparation) {
  const std::vector<ScoreRecord> r = {rec(Scope::InScope, "a", false, "a", 0.9),
                                      rec(Scope::InScope, "a", false, "a", 0.8),
                                      rec(Scope::OodOos, "x", true, "", 0.1)};
  const EvalReport e = evaluate_threshold_independent(r);
  EXPECT_DOUBLE_EQ(*e.auroc, 1.0);
  EXPECT_DOUBLE_EQ(*e.fpr95, 0.0);
  EXPECT_DOUBLE_EQ(*e.aupr_in, 1.0);
  EXPECT_DOUBLE_EQ(*e.aupr_out, 1.0);
}

TEST(ThresholdIndependent, AllTiedIsChance) {
  const std::vector<double> pos = {0.4, 0.4, 0.4};
  const std::vector<double> neg = {0.4, 0.4};
  EXPECT_DOUBLE_EQ(roc_auc(pos, neg), 0.5);
}

TEST(ThresholdIndependent, OneOfTwoAbove) {
  const std::vector<double> pos = {0.9, 0.3};
  const std::vector<double> neg = {0.5};
  EXPECT_DOUBLE_EQ(roc_auc(pos, neg), 0.5);
}

TEST(ThresholdIndependent, OneClassThrows) {
  const std::vector<ScoreRecord> r = {rec(Scope::InScope, "a", false, "a", 0.9)};
  try {
    evaluate_threshold_independent(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OneClassOnly);
  }
}

TEST(ThresholdIndependent, AurocMatchesPairwiseOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pos = draw(rng, 1 + rng() % 100, 1 + static_cast<int>(rng() % 20));
    const auto neg = draw(rng, 1 + rng() % 100, 1 + static_cast<int>(rng() % 20));
    EXPECT_NEAR(roc_auc(pos, neg), pairwise_auroc(pos, neg), 1e-9);
  }
}

TEST(ThresholdIndependent, FprMatchesBruteForce) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pos = draw(rng, 1 + rng() % 100, 1 + static_cast<int>(rng() % 30));
    const auto neg = draw(rng, 1 + rng() % 100, 1 + static_cast<int>(rng() % 30));
    for (int n : {90, 95}) EXPECT_DOUBLE_EQ(fpr_at_tpr(pos, neg, n), brute_fpr(pos, neg, n));
    EXPECT_LE(fpr_at_tpr(pos, neg, 90), fpr_at_tpr(pos, neg, 95));
  }
}

TEST(ThresholdIndependent, AveragePrecisionMatchesBruteForce) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pos = draw(rng, 1 + rng() % 60, 1 + static_cast<int>(rng() % 10));
    const auto neg = draw(rng, 1 + rng() % 60, 1 + static_cast<int>(rng() % 10));
    EXPECT_NEAR(average_precision(pos, neg), brute_ap(pos, neg), 1e-12);
  }
}

TEST(Evaluate, KPlusOneStyleRecordsOmitThresholdIndependent) {
  const std::vector<ScoreRecord> r = {rec(Scope::InScope, "a", false, "a"), rec(Scope::OodOos, "x", true, "")};
  const EvalReport e = evaluate(r);
  EXPECT_TRUE(e.overall_acc.has_value());
  for (std::size_t i = kNumThresholdDependent; i < kNumMetrics; ++i) EXPECT_FALSE(metric_at(e, i).has_value());
}

TEST(Aggregate, MeanSkipsAbsent) {
  EvalReport a;
  EvalReport b;
  a.overall_acc = 0.8;
  b.overall_acc = 0.6;
  a.auroc = 0.9;
  const std::vector<EvalReport> reports = {a, b};
  const EvalReport m = aggregate(reports);
  EXPECT_DOUBLE_EQ(*m.overall_acc, 0.7);
  EXPECT_DOUBLE_EQ(*m.auroc, 0.9);
  EXPECT_FALSE(m.fpr95.has_value());
}

}  // namespace
}  // namespace oosd

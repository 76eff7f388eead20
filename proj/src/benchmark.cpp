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

#include "oosd/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "oosd/error.hpp"

namespace oosd {
namespace {

using nlohmann::json;

std::vector<LabeledExample> slice(std::span<const LabeledExample> examples, Scope keep) {
  std::vector<LabeledExample> out;
  for (const auto& e : examples) {
    if (e.scope == Scope::InScope || e.scope == keep) out.push_back(e);
  }
  return out;
}

bool has_scope(std::span<const LabeledExample> examples, Scope s) {
  return std::any_of(examples.begin(), examples.end(), [s](const auto& e) { return e.scope == s; });
}

// Rebuilds the discounting components that depend on the swept parameters,
// keeping the trained classifier.
OosDetector retune(const OosDetector& base, const EmbeddingMatrix& is_emb,
                   const std::vector<std::string>& is_intents, const EmbeddingMatrix& oos_emb,
                   double blend, double penalty, double steepness) {
  OosDetector::Parts parts = base.parts();
  parts.scorer.blend_weight = blend;
  parts.scorer.oos_penalty = penalty;
  parts.combiner.steepness = steepness;
  parts.index = NeighborIndex::build(is_emb, is_intents, oos_emb, parts.scorer);
  return OosDetector(std::move(parts));
}

EmbeddingMatrix embed_texts(const OosDetector& detector, const std::vector<std::string>& texts) {
  std::vector<std::string> pre;
  pre.reserve(texts.size());
  for (const auto& t : texts) pre.push_back(detector.preprocess(t));
  return detector.parts().featurizer->embed_all(pre);
}

// Grid search on dev overall accuracy; ties keep the earlier grid point,
// which starts at the defaults.
OosDetector sweep_discounting(OosDetector detector, const TrainingSet& train,
                              std::span<const LabeledExample> dev, json* tuned) {
  if (dev.empty() || detector.parts().oos_method != OosMethod::NearestNeighbor) return detector;
  const EmbeddingMatrix is_emb = embed_texts(detector, train.is_texts);
  const EmbeddingMatrix oos_emb = embed_texts(detector, train.oos_texts);
  const auto& p = detector.parts();
  double best_blend = p.scorer.blend_weight;
  double best_penalty = p.scorer.oos_penalty;
  double best_steepness = p.combiner.steepness;
  double best = evaluate_threshold_dependent(score_examples(detector, dev)).overall_acc.value_or(0.0);
  for (double blend : {0.25, 0.5, 0.75, 1.0}) {
    for (double penalty : {0.0, 0.25, 0.5}) {
      for (double steepness : {5.0, 10.0, 20.0}) {
        OosDetector candidate = retune(detector, is_emb, train.is_intents, oos_emb, blend, penalty, steepness);
        const double acc =
            evaluate_threshold_dependent(score_examples(candidate, dev)).overall_acc.value_or(0.0);
        if (acc > best) {
          best = acc;
          best_blend = blend;
          best_penalty = penalty;
          best_steepness = steepness;
        }
      }
    }
  }
  *tuned = {{"blend_weight", best_blend}, {"oos_penalty", best_penalty},
            {"steepness", best_steepness}, {"dev_overall_acc", best}};
  return retune(detector, is_emb, train.is_intents, oos_emb, best_blend, best_penalty, best_steepness);
}

std::vector<BenchRow> run_dataset(const SplitBundle& bundle, const BenchConfig& config) {
  const TrainingSet train = training_set(bundle);
  std::vector<BenchRow> rows;
  for (Formulation f : config.formulations) {
    DetectorConfig dc = config.detector;
    dc.formulation = f;
    dc.scorer.seed = config.seed;
    OosDetector detector = train_detector(train, dc);
    BenchRow row;
    row.dataset = bundle.name;
    row.formulation = f;
    if (config.sweep && f == Formulation::Discounting) {
      detector = sweep_discounting(std::move(detector), train, bundle.dev, &row.tuned);
    }
    row.all = evaluate(score_examples(detector, bundle.test));
    if (has_scope(bundle.test, Scope::IdOos)) {
      row.id_slice = evaluate(score_examples(detector, slice(bundle.test, Scope::IdOos)));
    }
    if (has_scope(bundle.test, Scope::OodOos)) {
      row.ood_slice = evaluate(score_examples(detector, slice(bundle.test, Scope::OodOos)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_metric(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", *v * 100.0);
  return buf;
}

json report_json(const EvalReport& r) {
  json j = json::object();
  for (std::size_t i = 0; i < kNumMetrics; ++i) {
    const auto& v = metric_at(r, i);
    j[std::string(kMetricNames[i])] = v ? json(*v) : json(nullptr);
  }
  j["num_records"] = r.num_records;
  j["counts"] = {{"is_total", r.counts.is_total},
                 {"is_correct", r.counts.is_correct},
                 {"is_predicted_oos", r.counts.is_predicted_oos},
                 {"oos_total", r.counts.oos_total},
                 {"oos_correct", r.counts.oos_correct}};
  return j;
}

void render(std::ostringstream& out, const std::string& title,
            const std::vector<std::pair<std::string, const EvalReport*>>& rows) {
  std::size_t width = 7;
  for (const auto& [label, r] : rows) width = std::max(width, label.size());
  out << title << '\n' << std::string(width, ' ');
  for (auto name : kMetricNames) out << "  " << std::string(std::max<std::size_t>(11, name.size()) - name.size(), ' ') << name;
  out << '\n';
  for (const auto& [label, r] : rows) {
    out << label << std::string(width - label.size(), ' ');
    for (std::size_t i = 0; i < kNumMetrics; ++i) {
      const std::string v = format_metric(metric_at(*r, i));
      out << "  " << std::string(std::max<std::size_t>(11, kMetricNames[i].size()) - v.size(), ' ') << v;
    }
    out << '\n';
  }
  out << '\n';
}

}  // namespace

std::vector<ScoreRecord> score_examples(const OosDetector& detector,
                                        std::span<const LabeledExample> examples) {
  std::vector<ScoreRecord> records;
  records.reserve(examples.size());
  for (const auto& e : examples) {
    const Decision d = detector.predict(e.text);
    ScoreRecord r;
    r.gold_scope = e.scope;
    r.gold_intent = e.intent;
    r.predicted_oos = d.oos;
    r.predicted_intent = d.intent;
    r.score = d.is_score;
    records.push_back(std::move(r));
  }
  return records;
}

TrainingSet training_set(const SplitBundle& bundle) {
  TrainingSet set;
  for (const auto& e : bundle.train) {
    if (e.scope == Scope::InScope) {
      set.is_texts.push_back(e.text);
      set.is_intents.push_back(e.intent);
    } else {
      set.oos_texts.push_back(e.text);
    }
  }
  return set;
}

std::vector<AggregateRow> aggregate_rows(std::span<const BenchRow> rows,
                                         std::span<const Formulation> formulations) {
  std::vector<AggregateRow> out;
  const auto add = [&](const std::string& table, Formulation f, auto pick) {
    std::vector<EvalReport> reports;
    for (const auto& row : rows) {
      if (row.formulation != f) continue;
      if (const EvalReport* r = pick(row)) reports.push_back(*r);
    }
    if (reports.empty()) return;
    out.push_back({table, f, aggregate(reports), reports.size()});
  };
  const std::pair<const char*, std::function<const EvalReport*(const BenchRow&)>> tables[] = {
      {"overall", [](const BenchRow& r) { return &r.all; }},
      {"hint3", [](const BenchRow& r) { return r.dataset.starts_with("HINT3") ? &r.all : nullptr; }},
      {"id-oos", [](const BenchRow& r) { return r.id_slice ? &*r.id_slice : nullptr; }},
      {"ood-oos", [](const BenchRow& r) { return r.ood_slice ? &*r.ood_slice : nullptr; }},
  };
  for (const auto& [table, pick] : tables) {
    for (Formulation f : formulations) add(table, f, pick);
  }
  return out;
}

BenchResult run_benchmark(std::span<const std::filesystem::path> manifests, const BenchConfig& config) {
  std::vector<std::vector<BenchRow>> per_dataset(manifests.size());
  std::vector<std::string> failures(manifests.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < manifests.size(); i = next++) {
      try {
        const SplitBundle bundle = load_dataset(load_manifest(manifests[i]));
        per_dataset[i] = run_dataset(bundle, config);
      } catch (const std::exception& e) {
        failures[i] = manifests[i].stem().string() + ": " + e.what();
      }
    }
  };
  const int workers = std::clamp<int>(config.workers, 1, static_cast<int>(std::max<std::size_t>(manifests.size(), 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  BenchResult result;
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    if (!failures[i].empty()) result.missing.push_back(failures[i]);
    for (auto& row : per_dataset[i]) result.rows.push_back(std::move(row));
  }
  result.aggregates = aggregate_rows(result.rows, config.formulations);
  return result;
}

nlohmann::json bench_to_json(const BenchResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    json row = {{"dataset", r.dataset},
                {"formulation", formulation_name(r.formulation)},
                {"test", report_json(r.all)},
                {"id_oos_slice", r.id_slice ? report_json(*r.id_slice) : json(nullptr)},
                {"ood_oos_slice", r.ood_slice ? report_json(*r.ood_slice) : json(nullptr)}};
    if (!r.tuned.is_null()) row["tuned"] = r.tuned;
    rows.push_back(std::move(row));
  }
  json aggregates = json::array();
  for (const auto& a : result.aggregates) {
    aggregates.push_back({{"table", a.table},
                          {"formulation", formulation_name(a.formulation)},
                          {"num_datasets", a.num_datasets},
                          {"report", report_json(a.report)}});
  }
  return {{"rows", rows}, {"aggregates", aggregates}, {"missing", result.missing}};
}

std::string render_tables(const BenchResult& result) {
  std::ostringstream out;
  std::vector<std::pair<std::string, const EvalReport*>> lines;
  for (const auto& r : result.rows) {
    lines.emplace_back(r.dataset + " " + std::string(formulation_name(r.formulation)), &r.all);
  }
  render(out, "Per dataset (test split)", lines);
  for (const char* table : {"overall", "hint3", "id-oos", "ood-oos"}) {
    lines.clear();
    for (const auto& a : result.aggregates) {
      if (a.table == table) lines.emplace_back(std::string(formulation_name(a.formulation)), &a.report);
    }
    if (!lines.empty()) render(out, std::string("Average: ") + table, lines);
  }
  for (const auto& m : result.missing) out << "skipped " << m << '\n';
  return out.str();
}

}  // namespace oosd

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

// Acceptance checks. Prints one PASS, FAIL or SKIP line per criterion and
// exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include "oosd/benchmark.hpp"
#include "oosd/container.hpp"
#include "oosd/dataset.hpp"
#include "oosd/discounting.hpp"
#include "oosd/drift.hpp"
#include "oosd/error.hpp"
#include "oosd/metrics.hpp"
#include "oosd/neighbor_index.hpp"
#include "oosd/pipeline.hpp"
#include "oosd/rng.hpp"

namespace fs = std::filesystem;
using namespace oosd;
using Clock = std::chrono::steady_clock;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict = Verdict::Pass;
  std::string detail;
};

// Collects sub-check failures; the first few are reported.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_.size() < 3) failures_.push_back(what);
    ++count_;
  }
  bool ok() const { return count_ == 0; }
  std::string summary() const {
    std::string s = std::to_string(count_) + " failed check(s): ";
    for (std::size_t i = 0; i < failures_.size(); ++i) s += (i ? "; " : "") + failures_[i];
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

Outcome finish(const Checks& c, const std::string& pass_detail) {
  return c.ok() ? Outcome{Verdict::Pass, pass_detail} : Outcome{Verdict::Fail, c.summary()};
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// --- 1 ----------------------------------------------------------------------

Outcome discount_function() {
  const auto t0 = Clock::now();
  Checks c;
  for (double a : {1.0, 10.0, 100.0}) c.expect(discount(0.5, a) == 0.5, "f(0.5, " + fmt("%g", a) + ") != 0.5");
  for (double a : {1.0, 10.0, 100.0}) {
    for (int i = 1; i <= 1000; ++i) {
      c.expect(discount(i * 1e-3, a) >= discount((i - 1) * 1e-3, a), "f decreases at x=" + fmt("%.3f", i * 1e-3));
    }
  }
  for (int i = 0; i < 500; ++i) {
    const double x = i * 1e-3;
    c.expect(discount(x, 10.0) <= x, "f(" + fmt("%.3f", x) + ", 10) = " + fmt("%.6f", discount(x, 10.0)) + " > x");
  }
  c.expect(std::abs(discount(0.2, 10.0) - 0.04742587) <= 1e-7, "f(0.2, 10) off");
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 1.0, "runtime " + fmt("%.3f s", elapsed));
  return finish(c, "f(0.2,10)=" + fmt("%.8f", discount(0.2, 10.0)) + ", " + fmt("%.3f s", elapsed));
}

// --- 2 ----------------------------------------------------------------------

Outcome argmax_invariance() {
  const auto t0 = Clock::now();
  Checks c;
  SplitMix64 rng(42);
  int checked = 0;
  for (int trial = 0; checked < 1000; ++trial) {
    Eigen::VectorXd conf(2 + static_cast<Eigen::Index>(rng.below(30)));
    for (auto& v : conf) v = rng.uniform();
    const double d = 1.5 * rng.uniform();
    if (!(discount_factor(d, CombinerConfig{}) > 0.0)) continue;
    ++checked;
    Eigen::Index a = 0;
    Eigen::Index b = 0;
    conf.maxCoeff(&a);
    Eigen::VectorXd out = combine(conf, d, CombinerConfig{});
    out.maxCoeff(&b);
    c.expect(a == b, "argmax moved in trial " + std::to_string(trial));
  }
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 1.0, "runtime " + fmt("%.3f s", elapsed));
  return finish(c, "1000 pairs with positive factor, " + fmt("%.3f s", elapsed));
}

// --- 3 ----------------------------------------------------------------------

double pairwise_auroc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

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

Outcome metric_oracles() {
  const auto t0 = Clock::now();
  Checks c;
  SplitMix64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    const std::size_t n_pos = 1 + rng.below(n - 1);
    const int levels = 1 + static_cast<int>(rng.below(50));
    std::vector<double> pos(n_pos);
    std::vector<double> neg(n - n_pos);
    for (auto& v : pos) v = static_cast<double>(rng.below(levels + 1)) / levels;
    for (auto& v : neg) v = static_cast<double>(rng.below(levels + 1)) / levels;
    c.expect(std::abs(roc_auc(pos, neg) - pairwise_auroc(pos, neg)) <= 1e-9, "AUROC trial " + std::to_string(trial));
    const double f90 = fpr_at_tpr(pos, neg, 90);
    const double f95 = fpr_at_tpr(pos, neg, 95);
    c.expect(f90 == brute_fpr(pos, neg, 90), "FPR90 trial " + std::to_string(trial));
    c.expect(f95 == brute_fpr(pos, neg, 95), "FPR95 trial " + std::to_string(trial));
    c.expect(f90 <= f95, "FPR90 > FPR95 in trial " + std::to_string(trial));
  }
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 10.0, "runtime " + fmt("%.3f s", elapsed));
  return finish(c, "100 score sets, " + fmt("%.3f s", elapsed));
}

// --- 4 ----------------------------------------------------------------------

EmbeddingMatrix unit_rows(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
  std::normal_distribution<float> g(0.0f, 1.0f);
  EmbeddingMatrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = g(rng);
    m.row(i).normalize();
  }
  return m;
}

Outcome nearest_neighbor_oracle() {
  const auto t0 = Clock::now();
  Checks c;
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = trial % 2 ? 8 : 512;
    const Eigen::Index n_is = 1 + static_cast<Eigen::Index>(rng() % 800);
    const Eigen::Index n_oos = static_cast<Eigen::Index>(rng() % (1001 - n_is));
    std::vector<std::string> intents;
    for (Eigen::Index i = 0; i < n_is; ++i) intents.push_back("i" + std::to_string(rng() % 10));
    const auto index = NeighborIndex::build(unit_rows(rng, n_is, d), intents, unit_rows(rng, n_oos, d));
    const EmbeddingMatrix queries = unit_rows(rng, 5, d);
    for (Eigen::Index k = 0; k < queries.rows(); ++k) {
      const Embedding q = queries.row(k).transpose();
      double best = -2.0;
      Eigen::Index arg = 0;
      for (Eigen::Index i = 0; i < index.size(); ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) s += static_cast<double>(index.entries()(i, j)) * q[j];
        if (s > best) {
          best = s;
          arg = i;
        }
      }
      const double expected =
          std::max(0.0, 1.0 - best) + (index.source(arg) == Source::OutOfScope ? 0.25 : 0.0);
      c.expect(std::abs(index.score(q).distance - expected) <= 1e-5, "exact score trial " + std::to_string(trial));
    }
  }

  // Approximate mode on clustered entries, the setting inverted files target.
  const Eigen::Index d = 64;
  const EmbeddingMatrix centers = unit_rows(rng, 100, d);
  std::normal_distribution<float> g(0.0f, 0.35f / std::sqrt(static_cast<float>(d)));
  EmbeddingMatrix entries(5000, d);
  std::vector<std::string> intents;
  for (Eigen::Index i = 0; i < entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) entries(i, j) = centers(i % 100, j) + g(rng);
    entries.row(i).normalize();
    intents.push_back("c" + std::to_string(i % 100));
  }
  OosScorerConfig approx;
  approx.mode = SearchMode::Approximate;
  const auto index = NeighborIndex::build(entries, intents, EmbeddingMatrix(0, d), approx);
  int hits = 0;
  const int queries = 2000;
  for (int k = 0; k < queries; ++k) {
    Embedding q = centers.row(k % 100).transpose();
    for (Eigen::Index j = 0; j < d; ++j) q[j] += g(rng);
    q.normalize();
    hits += index.nearest(q).entry == index.nearest_exact(q).entry;
  }
  const double recall = static_cast<double>(hits) / queries;
  c.expect(recall >= 0.99, "approximate recall@1 " + fmt("%.4f", recall));
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 30.0, "runtime " + fmt("%.3f s", elapsed));
  return finish(c, "exact = brute force on 100 instances, approximate recall@1 " + fmt("%.4f", recall) + ", " +
                       fmt("%.2f s", elapsed));
}

// --- 5 ----------------------------------------------------------------------

TrainingSet phone_shop() {
  TrainingSet t;
  const auto add = [&](const std::string& intent, std::initializer_list<const char*> texts) {
    for (const char* s : texts) {
      t.is_texts.emplace_back(s);
      t.is_intents.push_back(intent);
    }
  };
  add("buy_phone", {"i want to buy a cell phone", "i want an iphone 11", "purchase a new samsung",
                    "order a galaxy", "how much is the iphone xr"});
  add("repair", {"my screen is cracked", "repair my samsung", "fix my iphone 11 battery", "phone will not turn on"});
  add("billing", {"why is my bill so high", "pay my bill", "update payment method", "refund a charge"});
  t.oos_texts = {"what is the weather", "play some music", "galaxy far far away movie times"};
  return t;
}

Outcome entity_proxy_invariance() {
  const EntityLexicon lexicon({{"cell phone", "<cell_phone>", {"iphone 11", "iphone xr", "galaxy", "samsung"}}});
  Checks c;
  for (Formulation f : kAllFormulations) {
    DetectorConfig config;
    config.formulation = f;
    const OosDetector d = train_detector(phone_shop(), config, lexicon);
    c.expect(d.predict("i want an iphone 11") == d.predict("i want an iphone xr"),
             std::string(formulation_name(f)) + " decisions differ");
  }
  return finish(c, "bit-identical decisions under all 4 formulations");
}

// --- 6 ----------------------------------------------------------------------

Outcome table1_reproduction() {
  const fs::path dir = OOSD_MANIFEST_DIR;
  const std::vector<std::string> names = {"clinc150-full", "snips", "hint3-sofmattress", "hint3-powerplay11",
                                          "hint3-curekart"};
  Checks c;
  std::vector<std::string> ran;
  std::vector<std::string> absent;
  for (const auto& name : names) {
    DatasetManifest m;
    try {
      m = load_manifest(dir / (name + ".json"));
    } catch (const Error& e) {
      c.expect(false, name + " manifest: " + e.what());
      continue;
    }
    bool present = true;
    for (const auto& src : m.sources) present = present && fs::exists(m.base_dir / src.path);
    if (!present) {
      absent.push_back(name);
      continue;
    }
    m.strict_counts = true;
    try {
      load_dataset(m);
      ran.push_back(name);
    } catch (const Error& e) {
      c.expect(false, e.what());
    }
  }
  if (ran.empty() && c.ok()) return {Verdict::Skip, "dataset files absent (" + std::to_string(absent.size()) + " of " +
                                                        std::to_string(names.size()) + " missing)"};
  std::string detail = "matched Table 1 for";
  for (const auto& n : ran) detail += " " + n;
  if (!absent.empty()) detail += "; absent:";
  for (const auto& n : absent) detail += " " + n;
  return finish(c, detail);
}

// --- 7 and 8: synthetic geometry ----------------------------------------------

struct Synthetic {
  std::vector<std::pair<std::string, Embedding>> rows;
  TrainingSet train;
  std::vector<LabeledExample> test;
};

Embedding unit(const Eigen::VectorXf& v) { return v.normalized(); }

// Points around `center` at cosine >= min_cos, drawn with a seeded RNG.
std::vector<Embedding> cloud(std::mt19937_64& rng, const Embedding& center, int n, float spread) {
  std::normal_distribution<float> g(0.0f, spread);
  std::vector<Embedding> out;
  for (int i = 0; i < n; ++i) {
    Embedding e = center;
    for (auto& v : e) v += g(rng);
    out.push_back(e.normalized());
  }
  return out;
}

// Three IS clusters on the first axes. The OOS cluster sits opposite the
// second and third clusters, where the linear classifier for the first
// cluster extrapolates to high confidence. An ID-OOS cluster shares the
// third axis with intent_2 for criterion 8.
Synthetic make_synthetic(bool with_idoos) {
  constexpr Eigen::Index kDim = 16;
  std::mt19937_64 rng(42);
  Synthetic s;
  const auto axis = [](Eigen::Index i) { return Embedding(Embedding::Unit(kDim, i)); };
  const auto add = [&](const std::string& text, const Embedding& e) { s.rows.emplace_back(text, e); };

  for (int c = 0; c < 3; ++c) {
    const std::string intent = "intent_" + std::to_string(c);
    const auto train = cloud(rng, axis(c), 30, 0.04f);
    const auto test = cloud(rng, axis(c), 20, 0.04f);
    for (std::size_t i = 0; i < train.size(); ++i) {
      const std::string text = "is " + std::to_string(c) + " train " + std::to_string(i);
      add(text, train[i]);
      s.train.is_texts.push_back(text);
      s.train.is_intents.push_back(intent);
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
      const std::string text = "is " + std::to_string(c) + " test " + std::to_string(i);
      add(text, test[i]);
      s.test.push_back({text, intent, Scope::InScope});
    }
  }
  const Embedding ood_center = unit(-axis(1) - axis(2));
  for (const auto& [i, e] : [&] {
         std::vector<std::pair<int, Embedding>> v;
         int k = 0;
         for (const auto& p : cloud(rng, ood_center, 40, 0.04f)) v.emplace_back(k++, p);
         return v;
       }()) {
    const std::string text = "ood test " + std::to_string(i);
    add(text, e);
    s.test.push_back({text, "ood", Scope::OodOos});
  }
  if (with_idoos) {
    const Embedding id_center = unit(axis(2) + axis(5));
    const auto train = cloud(rng, id_center, 30, 0.04f);
    for (std::size_t i = 0; i < train.size(); ++i) {
      const std::string text = "idoos train " + std::to_string(i);
      add(text, train[i]);
      s.train.oos_texts.push_back(text);
    }
  }
  return s;
}

std::shared_ptr<const Featurizer> store_of(const Synthetic& s) {
  return std::make_shared<PrecomputedEmbeddingStore>(PrecomputedEmbeddingStore::from_rows(s.rows));
}

// Verifies the stated geometry by brute force over the built index.
void check_geometry(const Synthetic& s, const OosDetector& discounting, Checks& c) {
  const NeighborIndex& index = *discounting.parts().index;
  const auto& featurizer = *discounting.parts().featurizer;
  for (const auto& e : s.test) {
    const Embedding q = featurizer.embed(e.text);
    double min_is = 3.0;
    for (Eigen::Index i = 0; i < index.size(); ++i) {
      if (index.source(i) == Source::InScope) min_is = std::min(min_is, 1.0 - index.entries().row(i).dot(q));
    }
    if (e.scope == Scope::InScope) {
      c.expect(min_is <= 0.1, "IS point '" + e.text + "' has nearest distance " + fmt("%.3f", min_is));
    } else {
      c.expect(min_is >= 0.8, "OOS point '" + e.text + "' within " + fmt("%.3f", min_is) + " of an IS entry");
    }
  }
}

EvalReport run(const OosDetector& d, const std::vector<LabeledExample>& test) {
  return evaluate_threshold_dependent(score_examples(d, test));
}

Outcome synthetic_separation() {
  const Synthetic s = make_synthetic(false);
  DetectorConfig config;
  const OosDetector disc = train_detector(s.train, config, {}, store_of(s));
  config.formulation = Formulation::MaxConf;
  const OosDetector maxc = train_detector(s.train, config, {}, store_of(s));
  Checks c;
  check_geometry(s, disc, c);
  const EvalReport rd = run(disc, s.test);
  const EvalReport rm = run(maxc, s.test);
  // The construction requires the IS classifier to be confident on OOS points.
  double confident = 0.0;
  std::size_t oos = 0;
  for (const auto& e : s.test) {
    if (e.scope == Scope::InScope) continue;
    ++oos;
    confident += maxc.predict(e.text).top_confidence >= config.combiner.threshold;
  }
  c.expect(confident / static_cast<double>(oos) > 0.5, "IS classifier is not confident on OOS points");
  c.expect(*rd.oos_recall == 1.0, "discounting OOS recall " + fmt("%.3f", *rd.oos_recall));
  c.expect(*rd.is_acc == 1.0, "discounting IS accuracy " + fmt("%.3f", *rd.is_acc));
  c.expect(*rm.oos_recall < *rd.oos_recall, "max-conf OOS recall " + fmt("%.3f", *rm.oos_recall) + " not lower");
  return finish(c, "discounting OOS recall " + fmt("%.3f", *rd.oos_recall) + ", IS acc " + fmt("%.3f", *rd.is_acc) +
                       "; max-conf OOS recall " + fmt("%.3f", *rm.oos_recall));
}

Outcome ood_generalization() {
  const Synthetic s = make_synthetic(true);
  DetectorConfig config;
  const OosDetector disc = train_detector(s.train, config, {}, store_of(s));
  config.formulation = Formulation::KPlusOne;
  const OosDetector kp1 = train_detector(s.train, config, {}, store_of(s));
  std::vector<LabeledExample> ood_slice;
  for (const auto& e : s.test) ood_slice.push_back(e);
  const EvalReport rd = run(disc, ood_slice);
  const EvalReport rk = run(kp1, ood_slice);
  Checks c;
  c.expect(*rk.oos_recall < *rd.oos_recall, "k-plus-1 OOD recall " + fmt("%.3f", *rk.oos_recall) +
                                                 " not below discounting " + fmt("%.3f", *rd.oos_recall));
  return finish(c, "OOD-OOS recall: k-plus-1 " + fmt("%.3f", *rk.oos_recall) + " < discounting " +
                       fmt("%.3f", *rd.oos_recall));
}

// --- 9 ----------------------------------------------------------------------

// Synthetic utterances: each intent owns a few words, mixed with shared filler.
TrainingSet scale_corpus(std::size_t examples, std::size_t classes, std::vector<std::string>* queries) {
  SplitMix64 rng(42);
  const auto word = [&](std::uint64_t id) {
    static const char* syllables[] = {"ka", "lo", "mi", "ne", "su", "ra", "to", "vi", "pe", "zu", "da", "fo"};
    std::string w;
    for (int k = 0; k < 3; ++k) {
      w += syllables[id % 12];
      id /= 12;
    }
    return w;
  };
  TrainingSet t;
  for (std::size_t i = 0; i < examples; ++i) {
    const std::size_t c = i % classes;
    std::string text;
    for (int k = 0; k < 6; ++k) {
      const bool own = rng.below(2) == 0;
      const std::uint64_t id = own ? 200 + c * 4 + rng.below(4) : rng.below(200);
      text += (k ? " " : "") + word(id);
    }
    t.is_texts.push_back(text);
    t.is_intents.push_back("intent_" + std::to_string(c));
  }
  for (std::size_t i = 0; i < 10000; ++i) {
    std::string text;
    for (int k = 0; k < 6; ++k) text += (k ? " " : "") + word(rng.below(200 + classes * 4));
    queries->push_back(text);
  }
  return t;
}

Outcome efficiency_envelope() {
  std::vector<std::string> queries;
  const TrainingSet data = scale_corpus(25000, 2000, &queries);
  const auto t0 = Clock::now();
  const OosDetector d = train_detector(data, DetectorConfig{});
  const double train_s = seconds_since(t0);
  const std::string bytes = serialize_detector(d, Provenance{});
  const double mb = static_cast<double>(bytes.size()) / 1e6;

  std::vector<double> ms;
  ms.reserve(queries.size());
  for (const auto& q : queries) {
    const auto q0 = Clock::now();
    (void)d.predict(q);
    ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - q0).count());
  }
  std::sort(ms.begin(), ms.end());
  const double median = 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
  Checks c;
  c.expect(train_s <= 30.0, "training took " + fmt("%.1f s", train_s));
  c.expect(mb <= 70.0, "container " + fmt("%.1f MB", mb));
  c.expect(median <= 10.0, "median latency " + fmt("%.2f ms", median));
  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  const std::string detail = "train " + fmt("%.1f s", train_s) + ", container " + fmt("%.1f MB", mb) +
                             ", median latency " + fmt("%.3f ms", median) + " over 10k queries, index " +
                             std::to_string(d.parts().index->size()) + " entries, " + std::to_string(cores) +
                             " core(s)";
  return c.ok() ? Outcome{Verdict::Pass, detail} : Outcome{Verdict::Fail, c.summary() + " [" + detail + "]"};
}

// --- 10 ---------------------------------------------------------------------

Outcome drift() {
  Checks c;
  const OosDetector d = train_detector(phone_shop(), DetectorConfig{});
  std::vector<std::string> traffic;
  for (const auto& t : phone_shop().is_texts) traffic.push_back(t + " please");
  traffic.push_back("tell me a joke");
  const DriftReport same = compare_detectors(d, d, traffic);
  c.expect(same.share_under_0_1 == 1.0, "identical models moved traffic out of the first bucket");
  SplitMix64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(1 + rng.below(1000));
    std::vector<double> b(a.size());
    for (auto& v : a) v = rng.uniform();
    for (auto& v : b) v = rng.uniform();
    const DriftReport r = drift_report(a, b);
    const double total = std::accumulate(r.fractions.begin(), r.fractions.end(), 0.0);
    c.expect(std::abs(total - 1.0) <= 1e-9, "fractions sum to " + fmt("%.12f", total));
  }
  return finish(c, "identical models: " + fmt("%.0f%%", 100.0 * same.share_under_0_1) +
                       " under 0.1; 200 random reports sum to 1");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"discount function f", discount_function},
      {"argmax invariance of combine", argmax_invariance},
      {"metric oracles", metric_oracles},
      {"nearest-neighbor oracle", nearest_neighbor_oracle},
      {"entity-proxy invariance", entity_proxy_invariance},
      {"Table 1 split reproduction", table1_reproduction},
      {"synthetic separation", synthetic_separation},
      {"OOD-OOS generalization vs k-plus-1", ood_generalization},
      {"efficiency envelope", efficiency_envelope},
      {"drift report", drift},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Verdict::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
    failed += o.verdict == Verdict::Fail;
    std::printf("%s criterion %zu (%s): %s\n", tag, i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

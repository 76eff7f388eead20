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

// oosd: train, predict, benchmark and compare OOS detectors.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "json.hpp"
#include "oosd/benchmark.hpp"
#include "oosd/config.hpp"
#include "oosd/container.hpp"
#include "oosd/dataset.hpp"
#include "oosd/drift.hpp"
#include "oosd/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr const char* kThreadsEnv = "OOSD_THREADS";

int thread_count() {
  if (const char* env = std::getenv(kThreadsEnv)) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw oosd::Error(oosd::ErrorCode::ConfigError,
                      std::string(kThreadsEnv) + " must be a positive integer");
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw oosd::Error(oosd::ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

oosd::TrainingSet training_data(const oosd::TrainJob& job) {
  oosd::TrainingSet set;
  if (job.manifest) {
    return oosd::training_set(oosd::load_dataset(oosd::load_manifest(*job.manifest)));
  }
  const auto rows = oosd::read_delimited(read_file(*job.train_file), job.delimiter, true);
  if (rows.empty()) throw oosd::Error(oosd::ErrorCode::EmptyCorpus, "training file is empty");
  const auto& header = rows.front();
  const auto column = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw oosd::Error(oosd::ErrorCode::ParseError, std::string("training file has no '") + name + "' column");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t text_col = column("text");
  const std::size_t intent_col = column("intent");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() <= std::max(text_col, intent_col)) {
      throw oosd::Error(oosd::ErrorCode::ParseError, "training file line " + std::to_string(i + 1) +
                                                         " has too few columns");
    }
    const std::string& intent = row[intent_col];
    if (std::find(job.oos_intents.begin(), job.oos_intents.end(), intent) != job.oos_intents.end()) {
      set.oos_texts.push_back(row[text_col]);
    } else {
      set.is_texts.push_back(row[text_col]);
      set.is_intents.push_back(intent);
    }
  }
  return set;
}

int cmd_train(const fs::path& config_path) {
  const auto start = Clock::now();
  const oosd::TrainJob job = oosd::load_train_job(config_path);
  const oosd::TrainingSet data = training_data(job);
  oosd::check_limits(data, job.detector.limits);
  const oosd::EntityLexicon lexicon = job.lexicon ? oosd::load_lexicon(*job.lexicon) : oosd::EntityLexicon{};
  std::shared_ptr<const oosd::Featurizer> featurizer;
  if (job.embeddings) {
    featurizer = std::make_shared<oosd::PrecomputedEmbeddingStore>(
        oosd::PrecomputedEmbeddingStore::load(*job.embeddings));
  }
  const oosd::OosDetector detector = oosd::train_detector(data, job.detector, lexicon, featurizer);

  oosd::Provenance provenance;
  provenance.config_json = oosd::detector_config_to_json(job.detector).dump();
  provenance.config_digest = oosd::config_digest(provenance.config_json);
  provenance.build_timestamp = static_cast<std::int64_t>(std::time(nullptr));
  oosd::save_detector(job.output, detector, provenance);
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();

  std::cout << json{{"output", job.output.string()},
                    {"formulation", oosd::formulation_name(job.detector.formulation)},
                    {"in_scope_examples", data.is_texts.size()},
                    {"oos_examples", data.oos_texts.size()},
                    {"bytes", fs::file_size(job.output)},
                    {"wall_seconds", seconds}}
                   .dump()
            << '\n';
  return 0;
}

json decision_json(std::size_t line, const oosd::Decision& d, bool full_conf) {
  json j = {{"line", line}, {"oos", d.oos}, {"intent", d.oos ? json(nullptr) : json(d.intent)},
            {"top_confidence", d.top_confidence}};
  if (d.oos_score) j["oos_distance"] = d.oos_score->distance;
  if (d.is_score) j["is_score"] = *d.is_score;
  if (full_conf) {
    json conf = json::object();
    for (Eigen::Index i = 0; i < d.final_conf.size(); ++i) conf[d.final_conf.label(i)] = d.final_conf.values[i];
    j["final_conf"] = std::move(conf);
  }
  return j;
}

int cmd_predict(const fs::path& model, const std::string& input, bool latency, bool full_conf) {
  const oosd::LoadedDetector loaded = oosd::load_detector(model);
  std::vector<std::string> lines;
  if (input.empty() || input == "-") {
    lines = read_lines(std::cin);
  } else {
    std::ifstream in(input);
    if (!in) throw oosd::Error(oosd::ErrorCode::IoError, "cannot open " + input);
    lines = read_lines(in);
  }

  std::vector<std::string> out(lines.size());
  std::vector<double> millis(lines.size(), -1.0);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < lines.size(); i = next++) {
      const auto t0 = Clock::now();
      try {
        const oosd::Decision d = loaded.detector.predict(lines[i]);
        millis[i] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        out[i] = decision_json(i + 1, d, full_conf).dump();
      } catch (const oosd::Error& e) {
        out[i] = json{{"line", i + 1}, {"error", e.what()}}.dump();
      }
    }
  };
  const int workers = std::min<int>(thread_count(), static_cast<int>(std::max<std::size_t>(lines.size(), 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& o : out) std::cout << o << '\n';

  if (latency) {
    std::vector<double> ok;
    for (double m : millis) {
      if (m >= 0.0) ok.push_back(m);
    }
    json summary = {{"queries", ok.size()}, {"errors", lines.size() - ok.size()}};
    if (!ok.empty()) {
      std::sort(ok.begin(), ok.end());
      const auto at = [&](double q) {
        return ok[std::min(ok.size() - 1, static_cast<std::size_t>(q * static_cast<double>(ok.size())))];
      };
      summary["median_ms"] = ok.size() % 2 ? ok[ok.size() / 2] : 0.5 * (ok[ok.size() / 2 - 1] + ok[ok.size() / 2]);
      summary["p99_ms"] = at(0.99);
    }
    std::cerr << json{{"latency", summary}}.dump() << '\n';
  }
  return 0;
}

int cmd_bench(const fs::path& dir, const std::string& formulations, std::uint64_t seed,
              const std::string& out_path, const std::string& config_path, bool sweep) {
  std::vector<fs::path> manifests;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") manifests.push_back(entry.path());
  }
  std::sort(manifests.begin(), manifests.end());
  if (manifests.empty()) {
    throw oosd::Error(oosd::ErrorCode::IoError, "no manifests in " + dir.string());
  }

  oosd::BenchConfig config;
  config.seed = seed;
  config.sweep = sweep;
  config.workers = thread_count();
  if (!config_path.empty()) {
    config.detector = oosd::detector_config_from_json(json::parse(read_file(config_path)));
  }
  config.formulations.clear();
  std::stringstream list(formulations);
  for (std::string name; std::getline(list, name, ',');) {
    if (!name.empty()) config.formulations.push_back(oosd::parse_formulation(name));
  }
  if (config.formulations.empty()) throw oosd::Error(oosd::ErrorCode::ConfigError, "no formulations given");

  const oosd::BenchResult result = oosd::run_benchmark(manifests, config);
  std::cout << oosd::render_tables(result);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw oosd::Error(oosd::ErrorCode::IoError, "cannot write " + out_path);
    out << oosd::bench_to_json(result).dump(2) << '\n';
  }
  return result.rows.empty() ? 1 : 0;
}

int cmd_drift(const fs::path& model_a, const fs::path& model_b, const fs::path& traffic_path) {
  const oosd::LoadedDetector a = oosd::load_detector(model_a);
  const oosd::LoadedDetector b = oosd::load_detector(model_b);
  std::ifstream in(traffic_path);
  if (!in) throw oosd::Error(oosd::ErrorCode::IoError, "cannot open " + traffic_path.string());
  const std::vector<std::string> traffic = read_lines(in);
  const oosd::DriftReport r = oosd::compare_detectors(a.detector, b.detector, traffic);
  json buckets = json::array();
  for (std::size_t i = 0; i < r.fractions.size(); ++i) {
    buckets.push_back({{"lower", static_cast<double>(i) / 10.0},
                       {"upper", static_cast<double>(i + 1) / 10.0},
                       {"fraction", r.fractions[i]}});
  }
  std::cout << json{{"sample_size", r.sample_size},
                    {"skipped", r.skipped},
                    {"share_under_0_1", r.share_under_0_1},
                    {"buckets", buckets}}
                   .dump()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Out-of-scope intent detection"};
  app.require_subcommand(1);

  std::string config_path;
  auto* train = app.add_subcommand("train", "Train a detector and write a model container");
  train->add_option("--config", config_path, "Training config (JSON)")->required()->check(CLI::ExistingFile);

  std::string model;
  std::string input;
  bool latency = false;
  bool full_conf = false;
  auto* predict = app.add_subcommand("predict", "Classify one utterance per input line");
  predict->add_option("--model", model, "Model container")->required()->check(CLI::ExistingFile);
  predict->add_option("--input", input, "Input file, '-' for stdin")->default_val("-");
  predict->add_flag("--latency", latency, "Report median and p99 latency on stderr");
  predict->add_flag("--full-conf", full_conf, "Include the full final confidence vector");

  std::string manifests;
  std::string formulations = "discounting,binary-gate,k-plus-1,max-conf";
  std::uint64_t seed = 42;
  std::string report_path;
  std::string detector_config;
  bool sweep = false;
  auto* bench = app.add_subcommand("bench", "Run formulations over dataset manifests");
  bench->add_option("--manifests", manifests, "Directory of manifest files")->required()->check(CLI::ExistingDirectory);
  bench->add_option("--formulations", formulations, "Comma-separated formulations")->capture_default_str();
  bench->add_option("--seed", seed, "Seed")->capture_default_str();
  bench->add_option("--out", report_path, "Write the JSON report here");
  bench->add_option("--detector-config", detector_config, "Detector config (JSON)")->check(CLI::ExistingFile);
  bench->add_flag("--sweep", sweep, "Tune discounting parameters on dev");

  std::string model_a;
  std::string model_b;
  std::string traffic;
  auto* drift = app.add_subcommand("drift", "Top-confidence drift between two models");
  drift->add_option("--model-a", model_a, "Baseline model")->required()->check(CLI::ExistingFile);
  drift->add_option("--model-b", model_b, "Candidate model")->required()->check(CLI::ExistingFile);
  drift->add_option("--traffic", traffic, "One raw utterance per line")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    Eigen::setNbThreads(thread_count());
    if (*train) return cmd_train(config_path);
    if (*predict) return cmd_predict(model, input, latency, full_conf);
    if (*bench) return cmd_bench(manifests, formulations, seed, report_path, detector_config, sweep);
    if (*drift) return cmd_drift(model_a, model_b, traffic);
  } catch (const std::exception& e) {
    std::cerr << "oosd: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

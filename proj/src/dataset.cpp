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

#include "oosd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "oosd/error.hpp"
#include "oosd/rng.hpp"

namespace oosd {
namespace {

using nlohmann::json;

struct RawRow {
  std::string split;
  std::string text;
  std::string intent;
  std::optional<Scope> scope;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Scope parse_scope(std::string_view s) {
  if (s == "IS") return Scope::InScope;
  if (s == "ID-OOS") return Scope::IdOos;
  if (s == "OOD-OOS") return Scope::OodOos;
  throw Error(ErrorCode::ParseError, "unknown scope '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "dev") return Split::Dev;
  if (s == "test") return Split::Test;
  throw Error(ErrorCode::ParseError, "unknown split '" + std::string(s) + "'");
}

std::size_t column_index(const SourceFile& src, const std::vector<std::string>& header,
                         const std::string& column) {
  if (src.header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == column) return i;
    }
    throw Error(ErrorCode::ParseError, src.path.string() + ": no column named '" + column + "'");
  }
  try {
    std::size_t used = 0;
    const unsigned long idx = std::stoul(column, &used);
    if (used == column.size()) return idx;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ParseError,
              src.path.string() + ": headerless files need numeric columns, got '" + column + "'");
}

void read_source(const SourceFile& src, const std::filesystem::path& base, std::vector<RawRow>& rows) {
  const std::filesystem::path path = src.path.is_absolute() ? src.path : base / src.path;
  const std::string contents = read_file(path);

  if (src.format == "clinc-json") {
    json doc;
    try {
      doc = json::parse(contents);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    const std::pair<const char*, const char*> parts[] = {
        {"train", "train"}, {"val", "dev"}, {"test", "test"},
        {"oos_train", "train"}, {"oos_val", "dev"}, {"oos_test", "test"}};
    for (const auto& [key, split] : parts) {
      if (!doc.contains(key)) continue;
      const bool oos = std::string_view(key).starts_with("oos_");
      for (const auto& pair : doc[key]) {
        if (!pair.is_array() || pair.size() != 2) {
          throw Error(ErrorCode::ParseError, path.string() + ": rows must be [text, intent]");
        }
        RawRow row{split, pair[0].get<std::string>(), pair[1].get<std::string>(), src.scope};
        if (oos && !row.scope) row.scope = Scope::OodOos;
        rows.push_back(std::move(row));
      }
    }
    return;
  }
  if (src.format != "delimited") {
    throw Error(ErrorCode::ParseError, "unknown source format '" + src.format + "'");
  }

  const auto table = read_delimited(contents, src.delimiter, src.quoting);
  if (table.empty()) return;
  const std::vector<std::string> header = src.header ? table.front() : std::vector<std::string>{};
  const std::size_t text_col = column_index(src, header, src.text_column);
  const std::size_t intent_col = column_index(src, header, src.intent_column);
  for (std::size_t i = src.header ? 1 : 0; i < table.size(); ++i) {
    const auto& fields = table[i];
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() <= std::max(text_col, intent_col)) {
      throw Error(ErrorCode::ParseError,
                  path.string() + ": row " + std::to_string(i + 1) + " has too few columns");
    }
    rows.push_back({src.split, fields[text_col], fields[intent_col], src.scope});
  }
}

std::size_t ceil_fraction(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

}  // namespace

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "?";
}

const std::vector<LabeledExample>& SplitBundle::split(Split s) const {
  switch (s) {
    case Split::Train: return train;
    case Split::Dev: return dev;
    case Split::Test: return test;
  }
  return train;
}

ScopeCounts SplitBundle::counts(Split s) const {
  ScopeCounts c{0, 0, 0};
  for (const auto& ex : split(s)) ++c[static_cast<std::size_t>(ex.scope)];
  return c;
}

std::string SplitBundle::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const auto feed = [&h](std::string_view bytes) {
    for (unsigned char ch : bytes) {
      h ^= ch;
      h *= 0x100000001b3ull;
    }
    h ^= 0xff;
    h *= 0x100000001b3ull;
  };
  for (Split s : kAllSplits) {
    feed(split_name(s));
    for (const auto& ex : split(s)) {
      feed(ex.text);
      feed(ex.intent);
      feed(scope_name(ex.scope));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::vector<std::string>> read_delimited(std::string_view contents, char delimiter,
                                                     bool quoting) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  const auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  const auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  while (i < contents.size()) {
    const char ch = contents[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < contents.size() && contents[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += ch;
      }
    } else if (quoting && ch == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (ch == delimiter) {
      end_field();
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < contents.size() && contents[i + 1] == '\n') ++i;
      end_row();
    } else {
      field += ch;
      field_started = true;
    }
    ++i;
  }
  if (in_quotes) throw Error(ErrorCode::ParseError, "unterminated quoted field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

std::vector<bool> stratified_holdout(const std::vector<std::string>& strata, double fraction,
                                     std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::ConfigError, "split fraction must lie in (0, 1)");
  }
  const std::size_t n = strata.size();
  std::vector<bool> held(n, false);
  if (n == 0) return held;
  std::map<std::string_view, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[strata[i]].push_back(i);

  const std::size_t total = std::min(n, ceil_fraction(fraction, n));
  struct Quota {
    std::vector<std::size_t>* members;
    std::size_t take;
    double remainder;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  for (auto& [name, members] : groups) {
    const double exact = static_cast<double>(total) * members.size() / static_cast<double>(n);
    const auto base = static_cast<std::size_t>(std::floor(exact + 1e-9));
    quotas.push_back({&members, std::min(base, members.size()), exact - std::floor(exact + 1e-9)});
    assigned += quotas.back().take;
  }
  SplitMix64 rng(seed);
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a].remainder > quotas[b].remainder;
  });
  for (std::size_t k = 0; assigned < total && k < 2 * order.size(); ++k) {
    Quota& q = quotas[order[k % order.size()]];
    if (q.take < q.members->size()) {
      ++q.take;
      ++assigned;
    }
  }
  for (auto& q : quotas) {
    std::vector<std::size_t> members = *q.members;
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t k = 0; k < q.take; ++k) held[members[k]] = true;
  }
  return held;
}

std::vector<std::string> select_idoos_intents(const std::map<std::string, std::size_t>& intent_counts,
                                              const AutoSelection& selection) {
  if (!(selection.fraction > 0.0 && selection.fraction < 1.0)) {
    throw Error(ErrorCode::ConfigError, "auto ID-OOS fraction must lie in (0, 1)");
  }
  std::vector<std::pair<std::string, std::size_t>> intents(intent_counts.begin(), intent_counts.end());
  std::size_t total = 0;
  for (const auto& [name, count] : intents) total += count;
  SplitMix64 rng(selection.seed);
  rng.shuffle(std::span<std::pair<std::string, std::size_t>>(intents));

  const double target = selection.fraction * static_cast<double>(total);
  double sum = 0.0;
  std::vector<std::string> chosen;
  for (const auto& [name, count] : intents) {
    const double with = sum + static_cast<double>(count);
    if (std::abs(with - target) < std::abs(sum - target)) {
      sum = with;
      chosen.push_back(name);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

DatasetManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
  DatasetManifest m;
  m.base_dir = base_dir;
  try {
    m.name = doc.at("name").get<std::string>();
    for (const auto& s : doc.at("sources")) {
      SourceFile src;
      src.split = s.value("split", std::string("all"));
      src.path = s.at("path").get<std::string>();
      src.format = s.value("format", std::string("delimited"));
      const std::string delim = s.value("delimiter", std::string("\t"));
      if (delim.size() != 1) throw Error(ErrorCode::ParseError, "delimiter must be one character");
      src.delimiter = delim[0];
      src.header = s.value("header", true);
      src.quoting = s.value("quoting", src.delimiter == ',');
      const auto column = [&](const char* key, const char* fallback) {
        if (!s.contains(key)) return std::string(fallback);
        return s[key].is_number() ? std::to_string(s[key].get<int>()) : s[key].get<std::string>();
      };
      src.text_column = column("text_column", "text");
      src.intent_column = column("intent_column", "intent");
      if (s.contains("scope")) src.scope = parse_scope(s["scope"].get<std::string>());
      if (src.split != "all") parse_split(src.split);
      m.sources.push_back(std::move(src));
    }
    m.ood_intents = doc.value("ood_intents", std::vector<std::string>{});
    if (doc.contains("idoos_intents")) {
      const auto& v = doc["idoos_intents"];
      if (v.is_array()) {
        m.idoos_intents = v.get<std::vector<std::string>>();
      } else {
        const auto& a = v.at("auto");
        m.idoos_auto = AutoSelection{a.value("fraction", 0.25), a.value("seed", std::uint64_t{0})};
      }
    }
    m.intent_transform = doc.value("intent_transform", std::string("none"));
    if (m.intent_transform != "none" && m.intent_transform != "coarse") {
      throw Error(ErrorCode::ParseError, "intent_transform must be 'none' or 'coarse'");
    }
    m.keep_intents = doc.value("keep_intents", std::vector<std::string>{});
    m.drop_empty_text = doc.value("drop_empty_text", false);
    if (doc.contains("dev_fraction")) m.dev_fraction = doc["dev_fraction"].get<double>();
    if (doc.contains("three_way_split")) {
      const auto& t = doc["three_way_split"];
      m.three_way = std::array<double, 3>{t.at("train").get<double>(), t.at("dev").get<double>(),
                                          t.at("test").get<double>()};
    }
    m.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("expected_counts")) {
      std::map<Split, ScopeCounts> counts;
      for (const auto& [key, value] : doc["expected_counts"].items()) {
        const auto v = value.get<std::vector<std::size_t>>();
        if (v.size() != 3) throw Error(ErrorCode::ParseError, "expected_counts rows need 3 values");
        counts[parse_split(key)] = {v[0], v[1], v[2]};
      }
      m.expected_counts = counts;
    }
    m.strict_counts = doc.value("count_check", std::string("strict")) == "strict";
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, "manifest '" + m.name + "': " + e.what());
  }
  for (double f : {m.dev_fraction.value_or(0.5), m.idoos_auto ? m.idoos_auto->fraction : 0.5}) {
    if (!(f > 0.0 && f < 1.0)) throw Error(ErrorCode::ParseError, "fractions must lie in (0, 1)");
  }
  if (m.three_way) {
    const auto& t = *m.three_way;
    if (std::any_of(t.begin(), t.end(), [](double f) { return !(f > 0.0 && f < 1.0); }) ||
        std::abs(t[0] + t[1] + t[2] - 1.0) > 1e-9) {
      throw Error(ErrorCode::ParseError, "three_way_split fractions must be in (0, 1) and sum to 1");
    }
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.parent_path());
}

SplitBundle load_dataset(const DatasetManifest& manifest) {
  std::vector<RawRow> rows;
  for (const auto& src : manifest.sources) read_source(src, manifest.base_dir, rows);

  std::vector<RawRow> kept;
  kept.reserve(rows.size());
  const std::set<std::string> keep(manifest.keep_intents.begin(), manifest.keep_intents.end());
  const std::set<std::string> ood(manifest.ood_intents.begin(), manifest.ood_intents.end());
  std::set<std::string> seen_intents;
  for (auto& row : rows) {
    if (manifest.intent_transform == "coarse") row.intent = row.intent.substr(0, row.intent.find('/'));
    const bool blank = row.text.find_first_not_of(" \t\r\n") == std::string::npos;
    if (blank) {
      if (manifest.drop_empty_text) continue;
      throw Error(ErrorCode::ParseError, manifest.name + ": empty text for intent '" + row.intent +
                                             "' (set drop_empty_text to skip such rows)");
    }
    const bool row_ood = ood.count(row.intent) > 0 || row.scope == Scope::OodOos;
    seen_intents.insert(row.intent);
    if (!keep.empty() && !row_ood && keep.count(row.intent) == 0) continue;
    kept.push_back(std::move(row));
  }
  for (const auto& intent : manifest.ood_intents) {
    if (seen_intents.count(intent) == 0) {
      throw Error(ErrorCode::UnknownIntentInManifest, manifest.name + ": ood_intents names unknown intent '" + intent + "'");
    }
  }
  for (const auto& intent : manifest.keep_intents) {
    if (seen_intents.count(intent) == 0) {
      throw Error(ErrorCode::UnknownIntentInManifest, manifest.name + ": keep_intents names unknown intent '" + intent + "'");
    }
  }

  // Splits.
  SplitBundle bundle;
  bundle.name = manifest.name;
  std::vector<RawRow> pool;
  std::map<Split, std::vector<RawRow>> by_split;
  for (auto& row : kept) {
    if (row.split == "all") {
      pool.push_back(std::move(row));
    } else {
      by_split[parse_split(row.split)].push_back(std::move(row));
    }
  }
  if (!pool.empty()) {
    if (!manifest.three_way) {
      throw Error(ErrorCode::ParseError, manifest.name + ": rows with split 'all' need three_way_split");
    }
    const auto& t = *manifest.three_way;
    std::vector<std::string> strata;
    for (const auto& r : pool) strata.push_back(r.intent);
    const auto test_mask = stratified_holdout(strata, t[2], manifest.seed);
    std::vector<RawRow> rest;
    std::vector<std::string> rest_strata;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (test_mask[i]) {
        by_split[Split::Test].push_back(std::move(pool[i]));
      } else {
        rest_strata.push_back(pool[i].intent);
        rest.push_back(std::move(pool[i]));
      }
    }
    const auto dev_mask = stratified_holdout(rest_strata, t[1] / (t[0] + t[1]), manifest.seed + 1);
    for (std::size_t i = 0; i < rest.size(); ++i) {
      by_split[dev_mask[i] ? Split::Dev : Split::Train].push_back(std::move(rest[i]));
    }
  }
  if (manifest.dev_fraction) {
    auto& train = by_split[Split::Train];
    std::vector<std::string> strata;
    for (const auto& r : train) strata.push_back(r.intent);
    const auto mask = stratified_holdout(strata, *manifest.dev_fraction, manifest.seed + 2);
    std::vector<RawRow> remaining;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (mask[i]) {
        by_split[Split::Dev].push_back(std::move(train[i]));
      } else {
        remaining.push_back(std::move(train[i]));
      }
    }
    train = std::move(remaining);
  }

  // Scopes.
  const auto base_scope = [&](const RawRow& r) {
    if (r.scope) return *r.scope;
    return ood.count(r.intent) > 0 ? Scope::OodOos : Scope::InScope;
  };
  std::set<std::string> is_intents;
  std::map<std::string, std::size_t> train_is_counts;
  for (const auto& [split, split_rows] : by_split) {
    for (const auto& r : split_rows) {
      if (base_scope(r) != Scope::InScope) continue;
      is_intents.insert(r.intent);
      if (split == Split::Train) ++train_is_counts[r.intent];
    }
  }
  std::vector<std::string> idoos = manifest.idoos_intents;
  if (manifest.idoos_auto) {
    idoos = select_idoos_intents(train_is_counts, *manifest.idoos_auto);
  } else {
    for (const auto& intent : idoos) {
      if (is_intents.count(intent) == 0) {
        throw Error(ErrorCode::UnknownIntentInManifest,
                    manifest.name + ": ID-OOS intent '" + intent + "' does not occur in the data");
      }
    }
  }
  const std::set<std::string> idoos_set(idoos.begin(), idoos.end());
  bundle.idoos_intents.assign(idoos_set.begin(), idoos_set.end());
  for (auto& [split, split_rows] : by_split) {
    auto& out = split == Split::Train ? bundle.train : split == Split::Dev ? bundle.dev : bundle.test;
    for (auto& r : split_rows) {
      Scope scope = base_scope(r);
      if (scope == Scope::InScope && idoos_set.count(r.intent) > 0) scope = Scope::IdOos;
      out.push_back({std::move(r.text), std::move(r.intent), scope});
    }
  }

  if (manifest.expected_counts) {
    std::string deltas;
    for (const auto& [split, expected] : *manifest.expected_counts) {
      const ScopeCounts got = bundle.counts(split);
      for (std::size_t k = 0; k < 3; ++k) {
        if (got[k] != expected[k]) {
          deltas += std::string(deltas.empty() ? "" : "; ") + std::string(split_name(split)) + " " +
                    std::string(scope_name(static_cast<Scope>(k))) + ": expected " +
                    std::to_string(expected[k]) + ", got " + std::to_string(got[k]) + " (" +
                    (got[k] > expected[k] ? "+" : "-") +
                    std::to_string(got[k] > expected[k] ? got[k] - expected[k] : expected[k] - got[k]) + ")";
        }
      }
    }
    if (!deltas.empty()) {
      if (manifest.strict_counts) throw Error(ErrorCode::CountMismatch, manifest.name + ": " + deltas);
      bundle.warnings.push_back("count mismatch: " + deltas);
    }
  }
  return bundle;
}

}  // namespace oosd

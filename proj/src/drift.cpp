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

#include "oosd/drift.hpp"

#include <algorithm>
#include <cmath>

#include "oosd/error.hpp"

namespace oosd {

DriftReport drift_report(std::span<const double> top_a, std::span<const double> top_b) {
  if (top_a.size() != top_b.size()) {
    throw Error(ErrorCode::CountMismatch, "drift inputs differ in length");
  }
  if (top_a.empty()) throw Error(ErrorCode::EmptyTraffic, "no traffic to compare");
  std::array<std::size_t, 10> counts{};
  for (std::size_t i = 0; i < top_a.size(); ++i) {
    const double delta = std::abs(top_b[i] - top_a[i]);
    const auto bucket = static_cast<std::size_t>(std::min(std::floor(delta / 0.1), 9.0));
    ++counts[bucket];
  }
  DriftReport report;
  report.sample_size = top_a.size();
  const auto n = static_cast<double>(report.sample_size);
  for (std::size_t b = 0; b < counts.size(); ++b) report.fractions[b] = static_cast<double>(counts[b]) / n;
  report.share_under_0_1 = report.fractions[0];
  return report;
}

DriftReport compare_detectors(const OosDetector& a, const OosDetector& b,
                              std::span<const std::string> traffic) {
  std::vector<double> top_a;
  std::vector<double> top_b;
  std::size_t skipped = 0;
  for (const std::string& line : traffic) {
    try {
      const double ta = a.predict(line).top_confidence;
      const double tb = b.predict(line).top_confidence;
      top_a.push_back(ta);
      top_b.push_back(tb);
    } catch (const Error&) {
      ++skipped;
    }
  }
  if (top_a.empty()) throw Error(ErrorCode::EmptyTraffic, "traffic has no usable utterances");
  DriftReport report = drift_report(top_a, top_b);
  report.skipped = skipped;
  return report;
}

}  // namespace oosd

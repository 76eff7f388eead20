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

#ifndef OOSD_DRIFT_HPP_
#define OOSD_DRIFT_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "oosd/pipeline.hpp"

namespace oosd {

// Distribution of |top confidence under B - top confidence under A| over a
// traffic sample, in ten buckets of width 0.1. Bucket 9 also holds |d| = 1.
struct DriftReport {
  std::array<double, 10> fractions{};
  std::size_t sample_size = 0;
  // Fraction of queries whose change is below 0.1 (bucket 0).
  double share_under_0_1 = 0.0;
  // Lines that failed on either model; excluded from the sample.
  std::size_t skipped = 0;
};

// Throws EmptyTraffic on empty input, CountMismatch on unequal lengths.
DriftReport drift_report(std::span<const double> top_a, std::span<const double> top_b);

// Runs both detectors over the raw lines. Blank or failing lines are
// counted in `skipped`; throws EmptyTraffic when no line is usable.
DriftReport compare_detectors(const OosDetector& a, const OosDetector& b,
                              std::span<const std::string> traffic);

}  // namespace oosd

#endif  // OOSD_DRIFT_HPP_

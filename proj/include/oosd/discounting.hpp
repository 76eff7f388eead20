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

#ifndef OOSD_DISCOUNTING_HPP_
#define OOSD_DISCOUNTING_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "oosd/classifier.hpp"
#include "oosd/error.hpp"
#include "oosd/neighbor_index.hpp"

namespace oosd {

struct CombinerConfig {
  // Steepness `a` of the sigmoid branch.
  double steepness = 10.0;
  // Queries whose top final confidence is below this are OOS.
  double threshold = 0.2;
  // Clip the discount factor to [0, 1]; distances above 1 would otherwise
  // flip the sign of every confidence.
  bool clamp_factor = true;

  bool operator==(const CombinerConfig&) const = default;
};

inline void validate(const CombinerConfig& config) {
  if (!(config.steepness > 0.0)) throw Error(ErrorCode::ConfigError, "steepness must be > 0");
  if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "threshold must lie in [0, 1]");
  }
}

// f(x) = x for x >= 0.5, sigmoid(a (x - 0.5)) otherwise.
template <typename Scalar>
Scalar discount(Scalar x, Scalar steepness) {
  if (x >= Scalar(0.5)) return x;
  return Scalar(1) / (Scalar(1) + std::exp(-steepness * (x - Scalar(0.5))));
}

// 1 - f(max(distance, 0)), optionally clipped to [0, 1].
template <typename Scalar>
Scalar discount_factor(Scalar distance, const CombinerConfig& config) {
  const Scalar factor =
      Scalar(1) - discount(std::max(distance, Scalar(0)), static_cast<Scalar>(config.steepness));
  return config.clamp_factor ? std::clamp(factor, Scalar(0), Scalar(1)) : factor;
}

// Every confidence scaled by the same factor; returns an expression.
template <typename Derived>
auto combine(const Eigen::MatrixBase<Derived>& conf, typename Derived::Scalar distance,
             const CombinerConfig& config) {
  return conf * discount_factor(distance, config);
}

inline ConfidenceVector combine(const ConfidenceVector& conf, const OosScore& score,
                                const CombinerConfig& config) {
  return {combine(conf.values, score.distance, config), conf.labels};
}

// Index of the largest value; ties go to the lexicographically smallest label.
inline Eigen::Index top_index(const ConfidenceVector& conf) {
  if (conf.size() == 0) throw Error(ErrorCode::EmptyConf, "empty confidence vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < conf.size(); ++i) {
    if (conf.values[i] > conf.values[best] ||
        (conf.values[i] == conf.values[best] && conf.label(i) < conf.label(best))) {
      best = i;
    }
  }
  return best;
}

struct Decision {
  bool oos = false;
  // Empty when `oos`.
  std::string intent;
  ConfidenceVector final_conf;
  double top_confidence = 0.0;
  std::optional<OosScore> oos_score;
  // Scalar in-scope-ness used by threshold-independent metrics; absent for
  // formulations without one.
  std::optional<double> is_score;

  bool operator==(const Decision&) const = default;
};

// OOS iff max(final_conf) < threshold; otherwise the top intent.
inline Decision decide(ConfidenceVector final_conf, const CombinerConfig& config) {
  const Eigen::Index top = top_index(final_conf);
  Decision d;
  d.top_confidence = final_conf.values[top];
  d.oos = d.top_confidence < config.threshold;
  if (!d.oos) d.intent = final_conf.label(top);
  d.final_conf = std::move(final_conf);
  return d;
}

}  // namespace oosd

#endif  // OOSD_DISCOUNTING_HPP_

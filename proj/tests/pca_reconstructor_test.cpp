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

#include "oosd/pca_reconstructor.hpp"

#include <random>

#include <gtest/gtest.h>

namespace oosd {
namespace {

using Pca = PcaReconstructor<double>;

TEST(Pca, PointsOnALineAtPerpendicularOffset) {
  // Data on y = 2x + 1; the unit normal is (2, -1) / sqrt(5).
  Eigen::MatrixXd data(5, 2);
  for (int i = 0; i < 5; ++i) data.row(i) << i - 2.0, 2.0 * (i - 2.0) + 1.0;
  const Pca pca = Pca::fit(data, 1);
  const Eigen::Vector2d normal = Eigen::Vector2d(2.0, -1.0).normalized();
  for (double h : {0.0, 0.5, 3.0}) {
    const Eigen::Vector2d q = Eigen::Vector2d(7.0, 15.0) + h * normal;
    EXPECT_NEAR(pca.residual(q), h, 1e-9);
  }
  EXPECT_EQ(pca.score(Eigen::Vector2d(7.0, 15.0)).nearest_source, Source::InScope);
}

TEST(Pca, QueryInSpanScoresZero) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXd basis(2, 6);
  for (auto& v : basis.reshaped()) v = g(rng);
  Eigen::MatrixXd data(30, 6);
  for (Eigen::Index i = 0; i < 30; ++i) data.row(i) = g(rng) * basis.row(0) + g(rng) * basis.row(1);
  const Pca pca = Pca::fit(data, 2);
  const Eigen::VectorXd q = (pca.mean().transpose() + 3.0 * basis.row(0) - 2.0 * basis.row(1)).transpose();
  EXPECT_NEAR(pca.residual(q), 0.0, 1e-9);
}

TEST(Pca, CompleteBasisReconstructsTrainingData) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Eigen::MatrixXd data(10, 4);
  for (auto& v : data.reshaped()) v = g(rng);
  const Pca pca = Pca::fit(data, 4);
  for (Eigen::Index i = 0; i < data.rows(); ++i) EXPECT_NEAR(pca.residual(data.row(i).transpose()), 0.0, 1e-9);
}

TEST(Pca, ComponentsAreOrthonormal) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd data(40, 8);
  for (auto& v : data.reshaped()) v = g(rng);
  const Pca pca = Pca::fit(data, 5);
  EXPECT_TRUE((pca.components() * pca.components().transpose()).isIdentity(1e-10));
}

TEST(Pca, RankDeficientAndBadK) {
  Eigen::MatrixXd line(4, 3);
  for (int i = 0; i < 4; ++i) line.row(i) << i, 2 * i, 3 * i;
  try {
    Pca::fit(line, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
  }
  EXPECT_THROW(Pca::fit(line, 0), Error);
  EXPECT_THROW(Pca::fit(line, 4), Error);
  EXPECT_THROW(Pca::fit(line.topRows(1), 1), Error);
}

TEST(Pca, FloatScalar) {
  Eigen::MatrixXf data(5, 2);
  for (int i = 0; i < 5; ++i) data.row(i) << float(i), 0.0f;
  const auto pca = PcaReconstructor<float>::fit(data, 1);
  EXPECT_NEAR(pca.residual(Eigen::Vector2f(3.0f, 0.25f)), 0.25f, 1e-6f);
}

}  // namespace
}  // namespace oosd

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

#include "oosd/classifier.hpp"

#include <random>

#include <gtest/gtest.h>

#include "oosd/error.hpp"

namespace oosd {
namespace {

EmbeddingMatrix rows(std::initializer_list<std::initializer_list<float>> r) {
  EmbeddingMatrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (float v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Three noisy clusters around orthogonal directions in 8 dimensions.
void clusters(EmbeddingMatrix* x, std::vector<std::string>* labels, int per_class = 20) {
  std::mt19937_64 rng(9);
  std::normal_distribution<float> noise(0.0f, 0.15f);
  *x = EmbeddingMatrix(3 * per_class, 8);
  labels->clear();
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class; ++i) {
      const Eigen::Index r = c * per_class + i;
      for (Eigen::Index j = 0; j < 8; ++j) (*x)(r, j) = noise(rng);
      (*x)(r, c) += 1.0f;
      x->row(r).normalize();
      labels->push_back("intent_" + std::to_string(c));
    }
  }
}

Eigen::Index argmax(const ConfidenceVector& c) {
  Eigen::Index i = 0;
  c.values.maxCoeff(&i);
  return i;
}

TEST(Classifier, SeparatesOrthogonalSingletons) {
  const EmbeddingMatrix x = rows({{1, 0}, {0, 1}});
  const std::vector<std::string> labels = {"a", "b"};
  const IntentModel m = train_intent_model(x, labels, ModelKind::OvrInScope);
  const auto ca = m.predict_conf(x.row(0).transpose());
  const auto cb = m.predict_conf(x.row(1).transpose());
  EXPECT_GT(ca.values[m.label_index("a")], 0.5);
  EXPECT_LT(ca.values[m.label_index("b")], 0.5);
  EXPECT_GT(cb.values[m.label_index("b")], 0.5);
  EXPECT_LT(cb.values[m.label_index("a")], 0.5);
}

TEST(Classifier, TrainingPointsPredictTheirLabel) {
  EmbeddingMatrix x;
  std::vector<std::string> labels;
  clusters(&x, &labels);
  const IntentModel m = train_intent_model(x, labels, ModelKind::OvrInScope);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto c = m.predict_conf(x.row(i).transpose());
    EXPECT_EQ(c.label(argmax(c)), labels[static_cast<std::size_t>(i)]);
    EXPECT_TRUE((c.values.array() >= 0.0).all() && (c.values.array() <= 1.0).all());
  }
}

TEST(Classifier, TrainingIsBitIdentical) {
  EmbeddingMatrix x;
  std::vector<std::string> labels;
  clusters(&x, &labels);
  const IntentModel a = train_intent_model(x, labels, ModelKind::OvrInScope);
  const IntentModel b = train_intent_model(x, labels, ModelKind::OvrInScope);
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_EQ(a.bias(), b.bias());
  EXPECT_EQ(a.labels(), b.labels());
}

TEST(Classifier, OvrDecomposability) {
  EmbeddingMatrix x;
  std::vector<std::string> labels;
  clusters(&x, &labels);
  const IntentModel a =
      train_intent_model(x, labels, ModelKind::OvrInScope, {}, {"intent_0", "intent_1", "intent_2"});
  const IntentModel b =
      train_intent_model(x, labels, ModelKind::OvrInScope, {}, {"intent_2", "intent_0", "intent_1"});
  const Embedding q = x.row(5).transpose();
  const auto ca = a.predict_conf(q);
  const auto cb = b.predict_conf(q);
  for (const auto& label : a.labels()) {
    EXPECT_NEAR(ca.values[a.label_index(label)], cb.values[b.label_index(label)], 1e-6) << label;
  }
}

TEST(Classifier, BlockSizeDoesNotChangeTheModel) {
  EmbeddingMatrix x;
  std::vector<std::string> labels;
  clusters(&x, &labels);
  TrainConfig one;
  one.block_size = 1;
  const IntentModel a = train_intent_model(x, labels, ModelKind::OvrInScope, one);
  const IntentModel b = train_intent_model(x, labels, ModelKind::OvrInScope);
  EXPECT_TRUE(a.weights().isApprox(b.weights(), 1e-5f));
}

TEST(Classifier, MissingClassExamples) {
  const EmbeddingMatrix x = rows({{1, 0}, {0, 1}});
  const std::vector<std::string> labels = {"a", "b"};
  try {
    train_intent_model(x, labels, ModelKind::OvrInScope, {}, {"a", "b", "c"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingClassExamples);
  }
}

TEST(Classifier, ZeroWeightModelPredictsHalf) {
  const IntentModel m(ModelKind::OvrInScope, {"a", "b", "c"}, Eigen::MatrixXf::Zero(3, 4),
                      Eigen::VectorXf::Zero(3));
  const auto c = m.predict_conf(Embedding::Ones(4));
  EXPECT_TRUE(c.values.isApproxToConstant(0.5));
}

TEST(Classifier, DimensionMismatchThrows) {
  const IntentModel m(ModelKind::OvrInScope, {"a"}, Eigen::MatrixXf::Zero(1, 4), Eigen::VectorXf::Zero(1));
  try {
    m.predict_conf(Embedding::Ones(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimMismatch);
  }
}

TEST(Classifier, BatchMatchesSingle) {
  EmbeddingMatrix x;
  std::vector<std::string> labels;
  clusters(&x, &labels, 5);
  const IntentModel m = train_intent_model(x, labels, ModelKind::OvrInScope);
  const Eigen::MatrixXf all = m.predict_conf_all(x);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    EXPECT_TRUE(all.row(i).transpose().cast<double>().isApprox(m.predict_conf(x.row(i).transpose()).values, 1e-5));
  }
}

TEST(BinaryGate, SingleOutputProbability) {
  const EmbeddingMatrix x = rows({{1, 0}, {0.9f, 0.1f}, {0, 1}});
  const IntentModel g = train_binary_gate(x, {true, true, false});
  EXPECT_EQ(g.kind(), ModelKind::BinaryGate);
  EXPECT_EQ(g.num_outputs(), 1);
  EXPECT_GT(g.predict_conf(Embedding(Eigen::Vector2f(1, 0))).values[0], 0.5);
  EXPECT_LT(g.predict_conf(Embedding(Eigen::Vector2f(0, 1))).values[0], 0.5);
}

TEST(BinaryGate, NeedsBothSides) {
  const EmbeddingMatrix x = rows({{1, 0}, {0, 1}});
  try {
    train_binary_gate(x, {true, true});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingleClassBinary);
  }
}

TEST(ModelKind, NamesRoundTrip) {
  for (ModelKind k : {ModelKind::OvrInScope, ModelKind::BinaryGate, ModelKind::KPlusOne}) {
    EXPECT_EQ(parse_model_kind(model_kind_name(k)), k);
  }
  EXPECT_THROW(parse_model_kind("nope"), Error);
}

}  // namespace
}  // namespace oosd

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

#ifndef OOSD_PCA_RECONSTRUCTOR_HPP_
#define OOSD_PCA_RECONSTRUCTOR_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "oosd/error.hpp"
#include "oosd/neighbor_index.hpp"

namespace oosd {

// Linear autoencoder: the OOS score of a query is the norm of its residual
// after projecting (query - mean) onto the top-k principal directions.
template <typename Scalar>
class PcaReconstructor {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  PcaReconstructor() = default;
  PcaReconstructor(Vector mean, Matrix components)
      : mean_(std::move(mean)), components_(std::move(components)) {
    if (components_.cols() != mean_.size()) {
      throw Error(ErrorCode::DimMismatch, "PCA components and mean differ in dimension");
    }
  }

  // Rows of `data` are examples. Requires k <= dim and at least k + 1 rows;
  // throws RankDeficient when the centered data has rank below k.
  template <typename Derived>
  static PcaReconstructor fit(const Eigen::MatrixBase<Derived>& data, Eigen::Index k) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (k < 1 || k > d) {
      throw Error(ErrorCode::ConfigError, "PCA needs 1 <= k <= dim (k=" + std::to_string(k) + ")");
    }
    if (n < k + 1) {
      throw Error(ErrorCode::RankDeficient,
                  "PCA with k=" + std::to_string(k) + " needs at least " + std::to_string(k + 1) +
                      " examples");
    }
    const Matrix x = data.template cast<Scalar>();
    Vector mean = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - mean.transpose();
    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const Scalar tol = std::max<Scalar>(sv.size() > 0 ? sv[0] : Scalar(0), Scalar(1)) *
                       static_cast<Scalar>(std::max(n, d)) * std::numeric_limits<Scalar>::epsilon();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv[rank] > tol) ++rank;
    if (k > rank) {
      throw Error(ErrorCode::RankDeficient, "k=" + std::to_string(k) +
                                                " exceeds data rank " + std::to_string(rank));
    }
    return PcaReconstructor(std::move(mean), svd.matrixV().leftCols(k).transpose());
  }

  template <typename Derived>
  Scalar residual(const Eigen::MatrixBase<Derived>& query) const {
    if (query.size() != mean_.size()) {
      throw Error(ErrorCode::DimMismatch, "query dimension does not match PCA model");
    }
    const Vector r = query.template cast<Scalar>() - mean_;
    const Vector coeffs = components_ * r;
    return (r - components_.transpose() * coeffs).norm();
  }

  template <typename Derived>
  OosScore score(const Eigen::MatrixBase<Derived>& query) const {
    return {static_cast<double>(residual(query)), Source::InScope};
  }

  Eigen::Index num_components() const { return components_.rows(); }
  Eigen::Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  // Orthonormal rows.
  const Matrix& components() const { return components_; }

 private:
  Vector mean_;
  Matrix components_;
};

}  // namespace oosd

#endif  // OOSD_PCA_RECONSTRUCTOR_HPP_

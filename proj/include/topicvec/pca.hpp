// Copyright 2026 The topicvec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "topicvec/lda.hpp"

namespace topicvec {

// Principal components of the rows of a data matrix. `basis` is d x k with
// orthonormal columns in descending eigenvalue order; each column has its
// largest-magnitude coordinate positive.
struct PcaModel {
  Eigen::VectorXd mean;
  RowMatrix basis;
  Eigen::VectorXd eigenvalues;  // top k of the sample covariance (n - 1)

  std::size_t input_dim() const noexcept {
    return static_cast<std::size_t>(basis.rows());
  }
  std::size_t output_dim() const noexcept {
    return static_cast<std::size_t>(basis.cols());
  }
  double explained_variance() const { return eigenvalues.sum(); }

  // Mean-centred projection; no re-normalization.
  RowMatrix project(const RowMatrix& data) const;
  Eigen::VectorXd project(const Eigen::VectorXd& row) const;
};

PcaModel fit_pca(const RowMatrix& data, std::size_t target_dim);

struct PcaReduction {
  RowMatrix projected;
  PcaModel model;
};

// Requires rows > target_dim.
PcaReduction pca_reduce(const RowMatrix& data, std::size_t target_dim);

}  // namespace topicvec

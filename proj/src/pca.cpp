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

#include "topicvec/pca.hpp"

#include <Eigen/Eigenvalues>

#include "topicvec/error.hpp"

namespace topicvec {

RowMatrix PcaModel::project(const RowMatrix& data) const {
  if (static_cast<std::size_t>(data.cols()) != input_dim()) {
    throw DataError("PCA input has " + std::to_string(data.cols()) +
                    " columns, model expects " + std::to_string(input_dim()));
  }
  return (data.rowwise() - mean.transpose()) * basis;
}

Eigen::VectorXd PcaModel::project(const Eigen::VectorXd& row) const {
  if (static_cast<std::size_t>(row.size()) != input_dim()) {
    throw DataError("PCA input dimension mismatch");
  }
  return basis.transpose() * (row - mean);
}

PcaModel fit_pca(const RowMatrix& data, std::size_t target_dim) {
  const auto n = static_cast<std::size_t>(data.rows());
  const auto d = static_cast<std::size_t>(data.cols());
  if (target_dim < 1) throw UsageError("PCA target dimension must be >= 1");
  if (n <= target_dim) {
    throw DataError("PCA needs more rows (" + std::to_string(n) +
                    ") than target dimensions (" + std::to_string(target_dim) +
                    ")");
  }
  if (target_dim > d) {
    throw DataError("PCA target dimension " + std::to_string(target_dim) +
                    " exceeds input dimension " + std::to_string(d));
  }

  PcaModel model;
  model.mean = data.colwise().mean().transpose();
  const RowMatrix centered = data.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw DataError("PCA eigendecomposition failed");
  }
  // Eigen returns ascending eigenvalues.
  const auto k = static_cast<Eigen::Index>(target_dim);
  const auto dd = static_cast<Eigen::Index>(d);
  model.basis.resize(dd, k);
  model.eigenvalues.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(dd - 1 - c);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    model.basis.col(c) = v;
    model.eigenvalues[c] = solver.eigenvalues()[dd - 1 - c];
  }
  return model;
}

PcaReduction pca_reduce(const RowMatrix& data, std::size_t target_dim) {
  PcaReduction out;
  out.model = fit_pca(data, target_dim);
  out.projected = out.model.project(data);
  return out;
}

}  // namespace topicvec

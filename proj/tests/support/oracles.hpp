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

// Independent reference computations used by the tests. Nothing here calls
// into the code paths it is used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "topicvec/corpus.hpp"
#include "topicvec/lda.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
inline std::vector<double> jacobi_eigenvalues(Matrix a, int max_sweeps = 100) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i][i];
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

// Sample covariance (n - 1 denominator) of row-major data.
inline Matrix covariance(const Matrix& rows) {
  const std::size_t n = rows.size();
  const std::size_t d = rows.front().size();
  std::vector<double> mean(d, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j] / n;
  Matrix cov(d, std::vector<double>(d, 0.0));
  for (const auto& r : rows)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / (n - 1);
  return cov;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(na * nb);
}

// Best one-to-one matching of recovered to planted rows by exhaustive
// permutation search; returns the mean cosine of the matched pairs.
inline double best_match_mean_cosine(const Matrix& recovered,
                                     const Matrix& planted) {
  const std::size_t k = planted.size();
  std::vector<std::size_t> perm(recovered.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1.0;
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += cosine(recovered[perm[i]], planted[i]);
    best = std::max(best, total / k);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// tau(w) by looping over the raw mention list, one document lookup per
// mention.
inline std::vector<double> brute_force_tau(const topicvec::TopicModel& model,
                                           const std::vector<topicvec::Mention>& mentions) {
  std::vector<double> tau(model.num_topics, 0.0);
  for (const auto& m : mentions)
    for (std::uint32_t k = 0; k < model.num_topics; ++k)
      tau[k] += model.doc_topics(m.doc_id, k);
  for (double& t : tau) t /= static_cast<double>(mentions.size());
  return tau;
}

// Rule check for relevant-topic selection: sorted descending (ties by id),
// and the chosen prefix is the shortest reaching the threshold unless capped.
inline std::vector<std::uint32_t> brute_force_relevant(const std::vector<double>& tau,
                                                       double threshold,
                                                       std::size_t cap) {
  std::vector<std::uint32_t> order(tau.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return tau[a] != tau[b] ? tau[a] > tau[b] : a < b;
  });
  for (std::size_t len = 1; len <= order.size(); ++len) {
    double cum = 0.0;
    for (std::size_t i = 0; i < len; ++i) cum += tau[order[i]];
    if (cum >= threshold || len == cap) {
      return {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(len)};
    }
  }
  return order;
}

}  // namespace oracle

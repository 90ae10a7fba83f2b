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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "topicvec/corpus.hpp"

namespace topicvec {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using TopicId = std::uint32_t;

// Fitted LDA model. phi is K x V over `vocab`; doc_topics is D x K (tau(d)).
struct TopicModel {
  std::uint32_t num_topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t iterations = 0;
  std::vector<std::string> vocab;
  RowMatrix phi;
  RowMatrix doc_topics;

  std::size_t num_docs() const noexcept {
    return static_cast<std::size_t>(doc_topics.rows());
  }
  double doc_topic(DocId doc, TopicId topic) const;
};

struct LdaOptions {
  std::uint32_t num_topics = 25;
  double alpha = 0.0001;
  double beta = 0.0;  // <= 0 means 1/K
  std::uint32_t iterations = 1000;
  std::uint64_t seed = 1;
  // Sampler vocabulary hygiene; the mention index is unaffected.
  std::uint32_t drop_most_frequent = 100;
  std::uint64_t min_token_count = 5;
};

// Count matrices of the collapsed Gibbs sampler, exposed after every sweep.
struct GibbsCounts {
  const std::vector<std::uint32_t>& doc_topic;    // D x K
  const std::vector<std::uint32_t>& topic_word;   // K x V
  const std::vector<std::uint64_t>& topic_total;  // K
  const std::vector<std::uint32_t>& doc_length;   // eligible tokens per doc
  std::uint32_t num_topics;
  std::uint32_t vocab_size;
  std::uint32_t sweep;  // 1-based
};

using SweepObserver = std::function<void(const GibbsCounts&)>;

// Collapsed Gibbs sampling with a fixed sweep budget; the final state's
// counts give phi = (n_kv + beta) / (n_k + V beta) and
// tau(d) = (n_dk + alpha) / (n_d + K alpha).
TopicModel fit_lda(const CorpusStore& store, const LdaOptions& options,
                   const SweepObserver& observer = {});

// Tokens the sampler keeps under `options`, sorted.
std::vector<std::string> lda_vocabulary(const CorpusStore& store,
                                        const LdaOptions& options);

// JSON header line followed by little-endian f64 phi and doc_topics.
void write_topic_model(const TopicModel& model, std::ostream& out);
TopicModel read_topic_model(std::istream& in);

// Top `n` words per topic by phi.
nlohmann::json topic_summaries(const TopicModel& model, std::size_t n = 10);

}  // namespace topicvec

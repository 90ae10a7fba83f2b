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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "topicvec/encoding.hpp"
#include "topicvec/lda.hpp"
#include "topicvec/pca.hpp"
#include "topicvec/topics.hpp"

namespace topicvec {

enum class Variant {
  kCMask, kCLast, kCInput, kCAvg, kCAll,
  kTMask, kTLast, kTAvg,
  kAMask, kALast, kAAvg,
};

// How many vectors a variant keeps per word.
enum class VectorLayout {
  kSingle,  // one vector
  kLayers,  // one per encoder layer, combined by a layer combiner
  kTopics,  // one per global topic, zero rows off the relevant set
};

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);
VectorLayout layout_of(Variant v);
EncodeMode mode_of(Variant v);
bool uses_topic_samples(Variant v);

// Unit vector in the direction of the sum (equivalently of the mean).
// Throws DataError when the inputs cancel.
Eigen::VectorXd aggregate_mentions(std::span<const Eigen::VectorXd> vectors);

// Per-word vectors of one variant. For kTopics every word has K rows and
// rows outside relevant_topics are exactly zero.
struct VariantMatrix {
  std::string name;  // variant tag, "-PCA" appended after reduction
  VectorLayout layout = VectorLayout::kSingle;
  EncodeMode mode = EncodeMode::kUnmasked;
  std::uint32_t dim = 0;
  std::vector<std::string> words;
  std::vector<RowMatrix> vectors;
  std::vector<std::vector<TopicId>> relevant_topics;

  std::size_t size() const noexcept { return words.size(); }
  std::optional<std::size_t> find(std::string_view word) const;
  void add(std::string word, RowMatrix rows,
           std::vector<TopicId> relevant = {});

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

struct WordSamples {
  const MentionSample* random = nullptr;
  std::vector<const MentionSample*> per_topic;
  const RelevantTopics* relevant = nullptr;
};

// Groups samples by word: the random sample plus one sample per topic.
std::unordered_map<std::string, WordSamples> group_samples(
    const std::vector<MentionSample>& samples);

// Rows for one word: 1 x d (C_mask/C_last/C_input/C_avg/A_*), (L+1) x d
// (C_all) or K x d (T_*).
RowMatrix build_variant(Variant variant, const WordSamples& samples,
                        std::uint32_t num_topics, const VectorStore& store);

// Unit-normalized unweighted mean of the non-zero topic rows in `relevant`.
Eigen::VectorXd average_topic_vectors(const RowMatrix& topic_rows,
                                      std::span<const TopicId> relevant);

// Fits one PCA over every non-zero row of the matrix and projects them.
// Zero rows (off-topic slots) stay zero.
struct VariantPca {
  VariantMatrix reduced;
  PcaModel model;
};
VariantPca pca_reduce_variant(const VariantMatrix& matrix,
                              std::size_t target_dim);

// One vector per word for neighbor search: the row itself for kSingle,
// otherwise the normalized unweighted mean of the word's non-zero rows.
RowMatrix collapse_rows(const VariantMatrix& matrix);

struct Neighbor {
  std::string word;
  double cosine = 0.0;
};

// Top k rows by cosine, skipping `exclude_word`; ties by ascending word.
std::vector<Neighbor> nearest_neighbors(const Eigen::VectorXd& query,
                                        std::string_view exclude_word,
                                        std::span<const std::string> words,
                                        const RowMatrix& rows, std::size_t k);

// "CVS1" payload (one f32 vector per record) plus a JSON-lines sidecar
// {word, variant, topic_id|null, layer_index|null, record_id}. Zero topic
// rows are not stored.
void write_variant(const VariantMatrix& matrix, std::ostream& store_out,
                   std::ostream& sidecar_out);
VariantMatrix read_variant(std::istream& store_in, std::istream& sidecar_in,
                           std::uint32_t num_topics);

// TSV dumps: 2-D PCA coordinates of every non-zero row and per-row nearest
// neighbors against collapsed word vectors.
void write_coordinates_tsv(const VariantMatrix& matrix, std::ostream& out);
void write_neighbors_tsv(const VariantMatrix& matrix,
                         std::span<const std::string> query_words,
                         std::size_t k, std::ostream& out);

}  // namespace topicvec

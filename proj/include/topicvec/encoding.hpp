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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "topicvec/corpus.hpp"
#include "topicvec/lda.hpp"
#include "topicvec/topics.hpp"

namespace topicvec {

using RowMatrixF =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class EncodeMode : std::uint8_t { kUnmasked = 0, kMasked = 1 };

std::string_view to_string(EncodeMode mode);
EncodeMode parse_encode_mode(std::string_view text);

struct EncodeRequest {
  MentionId mention_id = 0;
  std::vector<std::string> tokens;
  std::uint32_t token_index = 0;
  EncodeMode mode = EncodeMode::kUnmasked;
};

// layers is layer_count x dim. UNMASKED: L+1 rows (row 0 = input embedding,
// row L = output layer). MASKED: one row, the output vector at the mask.
struct LayerVectors {
  MentionId mention_id = 0;
  EncodeMode mode = EncodeMode::kUnmasked;
  RowMatrixF layers;
};

// Contract every contextual encoder satisfies.
class ContextEncoder {
 public:
  virtual ~ContextEncoder() = default;
  virtual std::uint32_t dim() const = 0;
  virtual std::uint32_t layer_count(EncodeMode mode) const = 0;
  virtual LayerVectors encode(const EncodeRequest& request) const = 0;
};

// Deterministic stand-in for a transformer. Each token string gets a
// unit-norm pseudo-random base vector b(t) derived from (seed, token).
// UNMASKED layer l mixes the target with the context mean:
//   normalize((1 - l/L) b(target) + (l/L) mean_context b(t)).
// MASKED yields normalize(mean_context b(t)); the target never enters.
class ReferenceEncoder final : public ContextEncoder {
 public:
  ReferenceEncoder(std::uint64_t seed, std::uint32_t num_layers,
                   std::uint32_t dim);

  std::uint32_t dim() const override { return dim_; }
  std::uint32_t layer_count(EncodeMode mode) const override {
    return mode == EncodeMode::kMasked ? 1 : num_layers_ + 1;
  }
  LayerVectors encode(const EncodeRequest& request) const override;

  Eigen::VectorXd base_vector(std::string_view token) const;

 private:
  std::uint64_t seed_;
  std::uint32_t num_layers_;
  std::uint32_t dim_;
};

LayerVectors reference_encode(const EncodeRequest& request, std::uint64_t seed,
                              std::uint32_t num_layers, std::uint32_t dim);

// In-memory form of a "CVS1" file.
class VectorStore {
 public:
  VectorStore(std::uint32_t dim, std::uint32_t layer_count, EncodeMode mode);

  std::uint32_t dim() const noexcept { return dim_; }
  std::uint32_t layer_count() const noexcept { return layer_count_; }
  EncodeMode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return records_.size(); }
  const std::vector<LayerVectors>& records() const noexcept { return records_; }

  // Throws DataError on a duplicate id or a shape/mode mismatch.
  void add(LayerVectors record);
  bool contains(MentionId id) const;
  const LayerVectors& at(MentionId id) const;

 private:
  std::uint32_t dim_;
  std::uint32_t layer_count_;
  EncodeMode mode_;
  std::vector<LayerVectors> records_;
  std::unordered_map<MentionId, std::size_t> by_id_;
};

// Little-endian: "CVS1", u32 version=1, u32 d, u32 layer_count, u8 mode,
// u64 record_count, then per record u64 mention_id + layer_count*d f32.
void write_store(const VectorStore& store, std::ostream& out);
VectorStore read_store(std::istream& in);

struct ManifestEntry {
  MentionId mention_id = 0;
  std::string word;
  std::vector<std::string> tokens;
  std::uint32_t token_index = 0;
  EncodeMode mode = EncodeMode::kUnmasked;
  std::optional<TopicId> topic_id;

  EncodeRequest request() const {
    return EncodeRequest{mention_id, tokens, token_index, mode};
  }
};

// One JSON line per (sample, mention). Returns the number of lines written.
std::size_t emit_manifest(const std::vector<MentionSample>& samples,
                          const CorpusStore& store, EncodeMode mode,
                          std::ostream& out);
std::vector<ManifestEntry> read_manifest(std::istream& in);

}  // namespace topicvec

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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "topicvec/aggregate.hpp"
#include "topicvec/config.hpp"
#include "topicvec/corpus.hpp"
#include "topicvec/encoding.hpp"
#include "topicvec/lda.hpp"
#include "topicvec/topics.hpp"

namespace topicvec {

enum class Stage {
  kIngest, kLda, kTopics, kSelect, kManifest, kEncode,
  kAggregate, kPca, kTrain, kEval, kNeighbors,
};

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view name);
const std::vector<Stage>& all_stages();

// Stable 64-bit seed for per-word randomness.
std::uint64_t word_seed(std::uint64_t seed, std::string_view word);

// Random and/or per-relevant-topic samples for each word, in word order.
std::vector<MentionSample> draw_samples(
    const MentionIndex& index, const TopicModel* model,
    const std::vector<RelevantTopics>& relevant, bool random_samples,
    bool topic_samples, std::size_t n_random, std::size_t n_per_topic,
    std::uint64_t seed);

// Encodes each distinct mention of the manifest once.
VectorStore encode_manifest(const std::vector<ManifestEntry>& entries,
                            EncodeMode mode, const ContextEncoder& encoder);

// Builds the variant for every word that has samples; `relevant` must cover
// the words for topic-based variants.
VariantMatrix build_variant_matrix(
    Variant variant, const std::vector<std::string>& words,
    const std::vector<MentionSample>& samples,
    const std::vector<RelevantTopics>& relevant, std::uint32_t num_topics,
    const VectorStore& store);

// Writes via a temporary file in the same directory, then renames.
void write_atomic(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer);

// Runs pipeline stages against `<output_dir>/<config hash prefix>/`.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  const PipelineConfig& config() const noexcept { return config_; }
  const std::filesystem::path& run_dir() const noexcept { return run_dir_; }

  void run(Stage stage);

  std::filesystem::path artifact(std::string_view name) const;

 private:
  void ingest();
  void lda();
  void topics();
  void select();
  void manifest();
  void encode();
  void aggregate();
  void pca();
  void train();
  void eval();
  void neighbors();

  void require(std::string_view artifact_name, std::string_view description,
               Stage producer) const;
  void record_stage(Stage stage, const std::vector<std::string>& outputs);
  std::vector<std::string> target_words(const MentionIndex& index) const;

  PipelineConfig config_;
  std::string hash_;
  std::filesystem::path run_dir_;
};

}  // namespace topicvec

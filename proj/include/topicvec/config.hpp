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
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace topicvec {

// Pipeline settings. Defaults follow the reference experimental setup:
// 25 topics, alpha 1e-4, 500 random mentions, 100 mentions per topic,
// cumulative importance 0.6 capped at 6 topics, min word count 100.
struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path dataset;
  std::filesystem::path split_file;
  std::filesystem::path output_dir = "out";

  std::uint64_t min_count = 100;

  std::uint32_t lda_topics = 25;
  double lda_alpha = 0.0001;
  double lda_beta = 0.0;  // 0 selects 1/K
  std::uint32_t lda_iterations = 1000;
  std::uint32_t lda_drop_top = 100;
  std::uint64_t lda_min_token_count = 5;
  std::uint64_t lda_seed = 1;

  double threshold = 0.6;
  std::uint32_t max_topics = 6;
  std::uint32_t n_random = 500;
  std::uint32_t n_per_topic = 100;
  std::uint64_t sample_seed = 1;

  std::string encoder = "reference";  // or "store"
  std::filesystem::path store_masked;
  std::filesystem::path store_unmasked;
  std::uint32_t encoder_layers = 12;
  std::uint32_t encoder_dim = 768;
  std::uint64_t encoder_seed = 1;

  std::vector<std::string> variants{"C_mask", "T_mask"};
  std::vector<std::string> pca_variants;
  std::uint32_t pca_dim = 300;

  std::uint32_t min_positives = 10;
  std::uint64_t split_seed = 1;
  std::vector<std::size_t> grid_batch{4, 8, 16};
  std::vector<double> grid_lr{0.01, 0.005, 0.001, 0.0001};
  std::uint32_t max_epochs = 100;
  std::uint32_t patience = 10;
  double weight_decay = 0.01;
  std::uint64_t probe_seed = 1;

  std::uint32_t neighbor_k = 5;
  std::vector<std::string> neighbor_words;

  // Applies one "key=value" setting. Relative paths resolve against
  // `base_dir`. Throws UsageError for unknown keys or bad values.
  void set(std::string_view key, std::string_view value,
           const std::filesystem::path& base_dir);

  // Every setting as canonical key -> value text, sorted by key.
  std::map<std::string, std::string> canonical() const;

  // Hex SHA-256 of the canonical settings.
  std::string hash() const;

  // Range checks and path existence; throws UsageError.
  void validate() const;

  // Variants the probe stages evaluate: `variants` plus "<v>-PCA" for each
  // of `pca_variants`.
  std::vector<std::string> probe_variants() const;
};

// Plain-text "key=value" lines; '#' starts a comment. Paths are relative to
// the file's directory.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::string_view text,
                            const std::filesystem::path& base_dir);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace topicvec

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
#include <string>
#include <vector>

#include "topicvec/corpus.hpp"
#include "topicvec/lda.hpp"

// Generators for desk-scale corpora with known structure.
namespace topicvec::synthetic {

struct PlantedTopicsOptions {
  std::uint32_t num_topics = 5;
  std::uint32_t words_per_topic = 30;
  std::uint32_t num_docs = 1000;
  std::uint32_t doc_length = 50;
  std::uint32_t sentence_length = 10;
  double doc_alpha = 0.1;    // Dirichlet prior of each document's mixture
  double word_alpha = 1.0;   // Dirichlet prior of each planted topic row
};

// Corpus drawn from the LDA generative process with disjoint per-topic
// vocabularies. `phi` is num_topics x |vocab| over `vocab`.
struct PlantedTopics {
  CorpusStore corpus;
  std::vector<std::string> vocab;
  RowMatrix phi;
};

PlantedTopics make_planted_topics(const PlantedTopicsOptions& options,
                                  std::uint64_t seed);

struct PropertyCorpusOptions {
  std::uint32_t background_topics = 6;
  std::uint32_t topic_vocab = 40;
  std::uint32_t num_targets = 120;
  std::uint32_t num_properties = 3;
  double positive_rate = 0.35;
  // Mentions per target word, split by context type.
  std::uint32_t main_mentions = 60;      // the word's own background topic
  std::uint32_t property_mentions = 30;  // the shared property topic
  std::uint32_t other_mentions = 30;     // spread over other backgrounds
  std::uint32_t context_tokens = 8;      // topic tokens per target sentence
  std::uint32_t cue_tokens = 2;          // property cues per property sentence
  std::uint32_t idiosyncratic_tokens = 3;  // per-word nuisance in backgrounds
  std::uint32_t sentences_per_doc = 5;
};

// Target words whose properties surface only in the contexts of one
// minority topic shared by all words; their majority contexts carry
// word-specific nuisance tokens instead.
struct PropertyCorpus {
  std::vector<std::string> records;  // "<name>\t<text>" corpus lines
  std::vector<std::string> dataset;  // "<word>\t<labels>" TSV lines
  std::vector<std::string> targets;
  std::vector<std::string> properties;
  std::uint32_t num_topics = 0;      // background topics + 1
};

PropertyCorpus make_property_corpus(const PropertyCorpusOptions& options,
                                    std::uint64_t seed);

}  // namespace topicvec::synthetic

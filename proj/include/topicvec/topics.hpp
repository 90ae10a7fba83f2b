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
#include <vector>

#include "topicvec/corpus.hpp"
#include "topicvec/lda.hpp"

namespace topicvec {

// tau_i(w): mean of tau_i(d) over every mention of w (documents with several
// mentions count several times).
struct WordTopicImportance {
  std::string word;
  std::vector<double> tau;
};

struct RelevantTopics {
  std::string word;
  std::vector<TopicId> topics;  // descending importance, ties by id
  double cumulative = 0.0;

  bool contains(TopicId topic) const;
};

struct MentionSample {
  std::string word;
  std::optional<TopicId> topic_id;  // nullopt: random sample
  std::vector<Mention> mentions;
  std::size_t n_requested = 0;

  bool is_random() const noexcept { return !topic_id.has_value(); }
};

WordTopicImportance word_topic_importance(const TopicModel& model,
                                          const MentionIndex& index,
                                          std::string_view word);

// Shortest descending prefix with cumulative importance >= threshold, cut at
// max_topics even when the threshold is then not reached.
RelevantTopics select_relevant_topics(const WordTopicImportance& tau,
                                      double threshold,
                                      std::size_t max_topics);

// Documents mentioning `word`, ranked by descending tau_topic(d) (ties by
// doc id), contribute the first occurrence in each of their sentences, in
// corpus order, until n contexts are collected.
MentionSample select_topic_mentions(const MentionIndex& index,
                                    const TopicModel& model,
                                    std::string_view word, TopicId topic,
                                    std::size_t n);

// Uniform sample without replacement, kept in corpus order.
MentionSample select_random_mentions(const MentionIndex& index,
                                     std::string_view word, std::size_t n,
                                     std::uint64_t seed);

// JSON-lines persistence: {word, tau, topics, cumulative} and
// {word, topic_id|"RANDOM", n_requested, mentions:[id,...]}.
void write_relevant_topics_jsonl(
    const std::vector<std::pair<WordTopicImportance, RelevantTopics>>& rows,
    std::ostream& out);
std::vector<std::pair<WordTopicImportance, RelevantTopics>>
read_relevant_topics_jsonl(std::istream& in);

void write_samples_jsonl(const std::vector<MentionSample>& samples,
                         std::ostream& out);
std::vector<MentionSample> read_samples_jsonl(std::istream& in,
                                              const MentionIndex& index);

}  // namespace topicvec

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

#include "topicvec/topics.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "topicvec/error.hpp"

namespace topicvec {

bool RelevantTopics::contains(TopicId topic) const {
  return std::find(topics.begin(), topics.end(), topic) != topics.end();
}

WordTopicImportance word_topic_importance(const TopicModel& model,
                                          const MentionIndex& index,
                                          std::string_view word) {
  const auto& mentions = index.mentions(word);
  if (mentions.empty()) {
    throw DataError("word '" + std::string(word) + "' has no mentions");
  }
  WordTopicImportance out{std::string(word),
                          std::vector<double>(model.num_topics, 0.0)};
  for (const Mention& m : mentions) {
    for (TopicId k = 0; k < model.num_topics; ++k) {
      out.tau[k] += model.doc_topic(m.doc_id, k);
    }
  }
  const auto n = static_cast<double>(mentions.size());
  for (double& t : out.tau) t /= n;
  return out;
}

RelevantTopics select_relevant_topics(const WordTopicImportance& tau,
                                      double threshold,
                                      std::size_t max_topics) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw UsageError("topic threshold must lie in (0, 1]");
  }
  if (max_topics < 1) throw UsageError("max_topics must be >= 1");
  std::vector<TopicId> order(tau.tau.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](TopicId a, TopicId b) {
    return tau.tau[a] > tau.tau[b];
  });
  RelevantTopics out{tau.word, {}, 0.0};
  for (TopicId t : order) {
    if (out.topics.size() == max_topics || out.cumulative >= threshold) break;
    out.topics.push_back(t);
    out.cumulative += tau.tau[t];
  }
  return out;
}

MentionSample select_topic_mentions(const MentionIndex& index,
                                    const TopicModel& model,
                                    std::string_view word, TopicId topic,
                                    std::size_t n) {
  if (n < 1) throw UsageError("sample size must be >= 1");
  if (topic >= model.num_topics) {
    throw UsageError("topic id " + std::to_string(topic) + " out of range");
  }
  const auto& mentions = index.mentions(word);

  // One context per sentence: the first occurrence, grouped by document.
  struct DocContexts {
    DocId doc;
    std::vector<const Mention*> contexts;
  };
  std::vector<DocContexts> docs;
  for (const Mention& m : mentions) {
    if (docs.empty() || docs.back().doc != m.doc_id) {
      docs.push_back({m.doc_id, {}});
    }
    auto& ctx = docs.back().contexts;
    if (ctx.empty() || ctx.back()->sent_id != m.sent_id) ctx.push_back(&m);
  }
  std::stable_sort(docs.begin(), docs.end(),
                   [&](const DocContexts& a, const DocContexts& b) {
                     const double ta = model.doc_topic(a.doc, topic);
                     const double tb = model.doc_topic(b.doc, topic);
                     return ta != tb ? ta > tb : a.doc < b.doc;
                   });

  MentionSample out{std::string(word), topic, {}, n};
  for (const DocContexts& d : docs) {
    for (const Mention* m : d.contexts) {
      if (out.mentions.size() == n) return out;
      out.mentions.push_back(*m);
    }
  }
  return out;
}

MentionSample select_random_mentions(const MentionIndex& index,
                                     std::string_view word, std::size_t n,
                                     std::uint64_t seed) {
  if (n < 1) throw UsageError("sample size must be >= 1");
  const auto& mentions = index.mentions(word);
  MentionSample out{std::string(word), std::nullopt, {}, n};
  out.mentions.reserve(std::min(n, mentions.size()));
  std::mt19937_64 rng(seed);
  std::sample(mentions.begin(), mentions.end(),
              std::back_inserter(out.mentions), n, rng);
  return out;
}

void write_relevant_topics_jsonl(
    const std::vector<std::pair<WordTopicImportance, RelevantTopics>>& rows,
    std::ostream& out) {
  for (const auto& [tau, relevant] : rows) {
    out << nlohmann::ordered_json{{"word", tau.word},
                          {"tau", tau.tau},
                          {"topics", relevant.topics},
                          {"cumulative", relevant.cumulative}}
               .dump()
        << '\n';
  }
}

std::vector<std::pair<WordTopicImportance, RelevantTopics>>
read_relevant_topics_jsonl(std::istream& in) {
  std::vector<std::pair<WordTopicImportance, RelevantTopics>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto word = j.at("word").get<std::string>();
      rows.emplace_back(
          WordTopicImportance{word, j.at("tau").get<std::vector<double>>()},
          RelevantTopics{word, j.at("topics").get<std::vector<TopicId>>(),
                         j.at("cumulative").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("relevant topics line " + std::to_string(line_no) +
                        ": " + e.what());
    }
  }
  return rows;
}

void write_samples_jsonl(const std::vector<MentionSample>& samples,
                         std::ostream& out) {
  for (const MentionSample& s : samples) {
    nlohmann::json ids = nlohmann::json::array();
    for (const Mention& m : s.mentions) ids.push_back(m.mention_id);
    nlohmann::json topic = s.topic_id ? nlohmann::json(*s.topic_id)
                                      : nlohmann::json("RANDOM");
    out << nlohmann::ordered_json{{"word", s.word},
                          {"topic_id", topic},
                          {"n_requested", s.n_requested},
                          {"mentions", ids}}
               .dump()
        << '\n';
  }
}

std::vector<MentionSample> read_samples_jsonl(std::istream& in,
                                              const MentionIndex& index) {
  std::vector<MentionSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      MentionSample s;
      s.word = j.at("word").get<std::string>();
      const auto& topic = j.at("topic_id");
      if (!topic.is_string()) s.topic_id = topic.get<TopicId>();
      s.n_requested = j.at("n_requested").get<std::size_t>();
      for (const auto& id : j.at("mentions")) {
        const Mention& m = index.mention(id.get<MentionId>());
        if (m.word != s.word) {
          throw DataError("sample for '" + s.word + "' references mention " +
                          std::to_string(m.mention_id) + " of '" + m.word +
                          "'");
        }
        s.mentions.push_back(m);
      }
      samples.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("samples line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return samples;
}

}  // namespace topicvec

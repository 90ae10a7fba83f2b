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

#include "topicvec/synthetic.hpp"

#include <algorithm>
#include <random>

#include "topicvec/error.hpp"

namespace topicvec::synthetic {
namespace {

std::vector<double> sample_dirichlet(std::size_t n, double alpha,
                                     std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> out(n);
  double total = 0.0;
  for (double& x : out) {
    x = gamma(rng);
    total += x;
  }
  if (total <= 0.0) {
    // Every draw underflowed; put all mass on one coordinate.
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::fill(out.begin(), out.end(), 0.0);
    out[pick(rng)] = 1.0;
    return out;
  }
  for (double& x : out) x /= total;
  return out;
}

std::string join_sentences(const std::vector<std::vector<std::string>>& sents) {
  std::string text;
  for (const auto& s : sents) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!text.empty()) text += ' ';
      text += s[i];
    }
    text += '.';
  }
  return text;
}

}  // namespace

PlantedTopics make_planted_topics(const PlantedTopicsOptions& options,
                                  std::uint64_t seed) {
  if (options.num_topics < 1 || options.words_per_topic < 1 ||
      options.num_docs < 1 || options.doc_length < 1 ||
      options.sentence_length < 1) {
    throw UsageError("planted topic options must all be positive");
  }
  std::mt19937_64 rng(seed);
  const std::uint32_t K = options.num_topics;
  const std::uint32_t V = K * options.words_per_topic;

  PlantedTopics out;
  for (std::uint32_t k = 0; k < K; ++k) {
    for (std::uint32_t i = 0; i < options.words_per_topic; ++i) {
      out.vocab.push_back("t" + std::to_string(k) + "w" + std::to_string(i));
    }
  }
  out.phi = RowMatrix::Zero(K, V);
  for (std::uint32_t k = 0; k < K; ++k) {
    const auto row =
        sample_dirichlet(options.words_per_topic, options.word_alpha, rng);
    for (std::uint32_t i = 0; i < options.words_per_topic; ++i) {
      out.phi(k, k * options.words_per_topic + i) = row[i];
    }
  }

  std::vector<std::discrete_distribution<std::uint32_t>> word_dist;
  for (std::uint32_t k = 0; k < K; ++k) {
    word_dist.emplace_back(out.phi.row(k).data(), out.phi.row(k).data() + V);
  }

  std::vector<Document> docs;
  for (std::uint32_t d = 0; d < options.num_docs; ++d) {
    const auto theta = sample_dirichlet(K, options.doc_alpha, rng);
    std::discrete_distribution<std::uint32_t> topic_dist(theta.begin(),
                                                         theta.end());
    Document doc;
    doc.doc_id = d;
    doc.name = "doc" + std::to_string(d);
    Sentence current;
    for (std::uint32_t i = 0; i < options.doc_length; ++i) {
      const std::uint32_t z = topic_dist(rng);
      current.tokens.push_back(out.vocab[word_dist[z](rng)]);
      if (current.tokens.size() == options.sentence_length ||
          i + 1 == options.doc_length) {
        current.sent_id = static_cast<SentId>(doc.sentences.size());
        doc.sentences.push_back(std::move(current));
        current = Sentence{};
      }
    }
    docs.push_back(std::move(doc));
  }
  out.corpus = CorpusStore(std::move(docs));
  return out;
}

PropertyCorpus make_property_corpus(const PropertyCorpusOptions& options,
                                    std::uint64_t seed) {
  if (options.background_topics < 2 || options.num_targets < 1 ||
      options.num_properties < 1 || options.sentences_per_doc < 1) {
    throw UsageError("property corpus options out of range");
  }
  std::mt19937_64 rng(seed);
  const std::uint32_t G = options.background_topics;
  const std::uint32_t property_topic = G;
  constexpr std::uint32_t kCuesPerProperty = 4;
  constexpr std::uint32_t kIdiosyncraticVocab = 4;

  auto topic_word = [&](std::uint32_t topic, std::uint32_t i) {
    return topic == property_topic ? "fld" + std::to_string(i)
                                   : "bg" + std::to_string(topic) + "x" +
                                         std::to_string(i);
  };

  PropertyCorpus out;
  out.num_topics = G + 1;
  for (std::uint32_t p = 0; p < options.num_properties; ++p) {
    out.properties.push_back("prop" + std::to_string(p));
  }

  std::bernoulli_distribution positive(options.positive_rate);
  std::uniform_int_distribution<std::uint32_t> pick_background(0, G - 1);
  std::uniform_int_distribution<std::uint32_t> pick_vocab(
      0, options.topic_vocab - 1);
  std::uniform_int_distribution<std::uint32_t> pick_cue(0, kCuesPerProperty - 1);
  std::uniform_int_distribution<std::uint32_t> pick_idio(
      0, kIdiosyncraticVocab - 1);

  // Sentence pools per topic; every sentence mentions exactly one target.
  std::vector<std::vector<std::vector<std::string>>> pools(G + 1);

  for (std::uint32_t w = 0; w < options.num_targets; ++w) {
    const std::string target = "tgt" + std::to_string(w);
    out.targets.push_back(target);
    std::vector<std::uint32_t> props;
    std::string labels;
    for (std::uint32_t p = 0; p < options.num_properties; ++p) {
      if (positive(rng)) {
        props.push_back(p);
        if (!labels.empty()) labels += ',';
        labels += out.properties[p];
      }
    }
    out.dataset.push_back(target + "\t" + labels);

    const std::uint32_t main_topic = pick_background(rng);
    auto make_sentence = [&](std::uint32_t topic) {
      std::vector<std::string> tokens;
      for (std::uint32_t i = 0; i < options.context_tokens; ++i) {
        tokens.push_back(topic_word(topic, pick_vocab(rng)));
      }
      if (topic == property_topic) {
        for (std::uint32_t p : props) {
          for (std::uint32_t i = 0; i < options.cue_tokens; ++i) {
            tokens.push_back("cue" + std::to_string(p) + "x" +
                             std::to_string(pick_cue(rng)));
          }
        }
      } else {
        for (std::uint32_t i = 0; i < options.idiosyncratic_tokens; ++i) {
          tokens.push_back("id" + std::to_string(w) + "x" +
                           std::to_string(pick_idio(rng)));
        }
      }
      std::uniform_int_distribution<std::size_t> where(0, tokens.size());
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(where(rng)),
                    target);
      pools[topic].push_back(std::move(tokens));
    };

    for (std::uint32_t i = 0; i < options.main_mentions; ++i) {
      make_sentence(main_topic);
    }
    for (std::uint32_t i = 0; i < options.property_mentions; ++i) {
      make_sentence(property_topic);
    }
    for (std::uint32_t i = 0; i < options.other_mentions; ++i) {
      std::uint32_t t = pick_background(rng);
      while (t == main_topic) t = pick_background(rng);
      make_sentence(t);
    }
  }

  std::vector<std::vector<std::vector<std::string>>> docs;
  for (auto& pool : pools) {
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t i = 0; i < pool.size(); i += options.sentences_per_doc) {
      const std::size_t end =
          std::min(pool.size(), i + options.sentences_per_doc);
      docs.emplace_back(pool.begin() + static_cast<std::ptrdiff_t>(i),
                        pool.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  std::shuffle(docs.begin(), docs.end(), rng);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    out.records.push_back("doc" + std::to_string(d) + "\t" +
                          join_sentences(docs[d]));
  }
  return out;
}

}  // namespace topicvec::synthetic

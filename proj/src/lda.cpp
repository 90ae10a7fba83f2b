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

#include "topicvec/lda.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "topicvec/error.hpp"

namespace topicvec {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

double TopicModel::doc_topic(DocId doc, TopicId topic) const {
  if (doc >= doc_topics.rows() || topic >= num_topics) {
    throw DataError("topic model lookup out of range (doc " +
                    std::to_string(doc) + ", topic " + std::to_string(topic) +
                    ")");
  }
  return doc_topics(doc, topic);
}

std::vector<std::string> lda_vocabulary(const CorpusStore& store,
                                        const LdaOptions& options) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const Document& doc : store.documents()) {
    for (const Sentence& s : doc.sentences) {
      for (const std::string& t : s.tokens) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(),
                                                            counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> kept;
  for (std::size_t i = options.drop_most_frequent; i < ranked.size(); ++i) {
    if (ranked[i].second >= options.min_token_count) {
      kept.push_back(ranked[i].first);
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

TopicModel fit_lda(const CorpusStore& store, const LdaOptions& options,
                   const SweepObserver& observer) {
  const std::uint32_t K = options.num_topics;
  if (K < 2) throw UsageError("LDA needs at least 2 topics");
  if (!(options.alpha > 0.0)) throw UsageError("LDA alpha must be > 0");
  if (options.iterations < 1) throw UsageError("LDA needs >= 1 iteration");
  if (store.size() == 0) throw DataError("empty corpus");
  const double alpha = options.alpha;
  const double beta = options.beta > 0.0 ? options.beta : 1.0 / K;

  TopicModel model;
  model.num_topics = K;
  model.alpha = alpha;
  model.beta = beta;
  model.seed = options.seed;
  model.iterations = options.iterations;
  model.vocab = lda_vocabulary(store, options);
  const auto V = static_cast<std::uint32_t>(model.vocab.size());

  std::unordered_map<std::string_view, std::uint32_t> word_id;
  for (std::uint32_t v = 0; v < V; ++v) word_id.emplace(model.vocab[v], v);

  const std::size_t D = store.size();
  std::vector<std::vector<std::uint32_t>> doc_words(D);
  std::size_t total_tokens = 0;
  for (const Document& doc : store.documents()) {
    auto& words = doc_words[doc.doc_id];
    for (const Sentence& s : doc.sentences) {
      for (const std::string& t : s.tokens) {
        auto it = word_id.find(t);
        if (it != word_id.end()) words.push_back(it->second);
      }
    }
    total_tokens += words.size();
  }
  if (total_tokens == 0) {
    throw DataError("corpus has no LDA-eligible tokens");
  }

  std::vector<std::uint32_t> n_dk(D * K, 0);
  std::vector<std::uint32_t> n_kv(static_cast<std::size_t>(K) * V, 0);
  std::vector<std::uint64_t> n_k(K, 0);
  std::vector<std::uint32_t> n_d(D, 0);
  std::vector<std::vector<std::uint32_t>> assignment(D);

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::uint32_t> pick_topic(0, K - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t d = 0; d < D; ++d) {
    assignment[d].resize(doc_words[d].size());
    n_d[d] = static_cast<std::uint32_t>(doc_words[d].size());
    for (std::size_t i = 0; i < doc_words[d].size(); ++i) {
      const std::uint32_t z = pick_topic(rng);
      assignment[d][i] = z;
      ++n_dk[d * K + z];
      ++n_kv[static_cast<std::size_t>(z) * V + doc_words[d][i]];
      ++n_k[z];
    }
  }

  const double v_beta = V * beta;
  std::vector<double> cdf(K);
  for (std::uint32_t sweep = 1; sweep <= options.iterations; ++sweep) {
    for (std::size_t d = 0; d < D; ++d) {
      const auto& words = doc_words[d];
      auto& z_d = assignment[d];
      std::uint32_t* doc_counts = &n_dk[d * K];
      for (std::size_t i = 0; i < words.size(); ++i) {
        const std::uint32_t v = words[i];
        std::uint32_t z = z_d[i];
        --doc_counts[z];
        --n_kv[static_cast<std::size_t>(z) * V + v];
        --n_k[z];

        double acc = 0.0;
        for (std::uint32_t k = 0; k < K; ++k) {
          acc += (doc_counts[k] + alpha) *
                 (n_kv[static_cast<std::size_t>(k) * V + v] + beta) /
                 (static_cast<double>(n_k[k]) + v_beta);
          cdf[k] = acc;
        }
        const double u = unit(rng) * acc;
        z = static_cast<std::uint32_t>(
            std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        if (z >= K) z = K - 1;

        z_d[i] = z;
        ++doc_counts[z];
        ++n_kv[static_cast<std::size_t>(z) * V + v];
        ++n_k[z];
      }
    }
    if (observer) observer(GibbsCounts{n_dk, n_kv, n_k, n_d, K, V, sweep});
  }

  model.phi.resize(K, V);
  for (std::uint32_t k = 0; k < K; ++k) {
    const double denom = static_cast<double>(n_k[k]) + v_beta;
    for (std::uint32_t v = 0; v < V; ++v) {
      model.phi(k, v) = (n_kv[static_cast<std::size_t>(k) * V + v] + beta) / denom;
    }
  }
  model.doc_topics.resize(static_cast<Eigen::Index>(D), K);
  for (std::size_t d = 0; d < D; ++d) {
    const double denom = n_d[d] + K * alpha;
    for (std::uint32_t k = 0; k < K; ++k) {
      model.doc_topics(static_cast<Eigen::Index>(d), k) =
          (n_dk[d * K + k] + alpha) / denom;
    }
  }
  return model;
}

void write_topic_model(const TopicModel& model, std::ostream& out) {
  nlohmann::json header{{"format", "topicvec-lda"},
                        {"version", 1},
                        {"K", model.num_topics},
                        {"alpha", model.alpha},
                        {"beta", model.beta},
                        {"seed", model.seed},
                        {"iterations", model.iterations},
                        {"vocab", model.vocab},
                        {"num_docs", model.num_docs()}};
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(model.phi.data()),
            static_cast<std::streamsize>(model.phi.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(model.doc_topics.data()),
            static_cast<std::streamsize>(model.doc_topics.size() *
                                         sizeof(double)));
}

TopicModel read_topic_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("topic model: missing header");
  TopicModel model;
  std::size_t num_docs = 0;
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.at("format") != "topicvec-lda" || header.at("version") != 1) {
      throw FormatError("topic model: unsupported format or version");
    }
    model.num_topics = header.at("K").get<std::uint32_t>();
    model.alpha = header.at("alpha").get<double>();
    model.beta = header.at("beta").get<double>();
    model.seed = header.at("seed").get<std::uint64_t>();
    model.iterations = header.at("iterations").get<std::uint32_t>();
    model.vocab = header.at("vocab").get<std::vector<std::string>>();
    num_docs = header.at("num_docs").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("topic model header: ") + e.what());
  }
  model.phi.resize(model.num_topics,
                   static_cast<Eigen::Index>(model.vocab.size()));
  model.doc_topics.resize(static_cast<Eigen::Index>(num_docs),
                          model.num_topics);
  auto read_block = [&](RowMatrix& m) {
    const auto bytes = static_cast<std::streamsize>(m.size() * sizeof(double));
    in.read(reinterpret_cast<char*>(m.data()), bytes);
    if (in.gcount() != bytes) throw FormatError("topic model: truncated payload");
  };
  read_block(model.phi);
  read_block(model.doc_topics);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("topic model: trailing bytes after payload");
  }
  return model;
}

nlohmann::json topic_summaries(const TopicModel& model, std::size_t n) {
  nlohmann::json topics = nlohmann::json::array();
  const auto V = static_cast<std::size_t>(model.phi.cols());
  for (std::uint32_t k = 0; k < model.num_topics; ++k) {
    std::vector<std::size_t> order(V);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t top = std::min(n, V);
    std::partial_sort(order.begin(), order.begin() + top, order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double pa = model.phi(k, a);
                        const double pb = model.phi(k, b);
                        return pa != pb ? pa > pb : a < b;
                      });
    nlohmann::json words = nlohmann::json::array();
    nlohmann::json weights = nlohmann::json::array();
    for (std::size_t i = 0; i < top; ++i) {
      words.push_back(model.vocab[order[i]]);
      weights.push_back(model.phi(k, order[i]));
    }
    topics.push_back({{"topic", k}, {"words", words}, {"weights", weights}});
  }
  return topics;
}

}  // namespace topicvec

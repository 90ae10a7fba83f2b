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

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "topicvec/aggregate.hpp"
#include "topicvec/error.hpp"
#include "topicvec/probe.hpp"

using namespace topicvec;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

RowMatrix random_rows(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RowMatrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

oracle::Matrix to_oracle(const RowMatrix& m) {
  oracle::Matrix out(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

struct Encoded {
  CorpusStore corpus;
  MentionIndex index;
  VectorStore store{1, 1, EncodeMode::kUnmasked};
};

Encoded encode_corpus(const std::string& text, EncodeMode mode) {
  std::istringstream in(text);
  Encoded e;
  e.corpus = ingest_corpus(in);
  e.index = build_mention_index(e.corpus, build_vocabulary(e.corpus, 1));
  const ReferenceEncoder enc(3, 4, 16);
  e.store = VectorStore(16, enc.layer_count(mode), mode);
  for (const auto& [word, mentions] : e.index.postings()) {
    for (const auto& m : mentions) {
      const auto& s = e.corpus.sentence(m.doc_id, m.sent_id);
      if (mode == EncodeMode::kMasked && s.tokens.size() < 2) continue;
      e.store.add(enc.encode({m.mention_id, s.tokens, m.token_index, mode}));
    }
  }
  return e;
}

}  // namespace

TEST_CASE("aggregate examples") {
  const std::vector<Eigen::VectorXd> one{vec({3, 4, 0})};
  CHECK(aggregate_mentions(one).isApprox(vec({0.6, 0.8, 0.0}), 1e-12));
  const std::vector<Eigen::VectorXd> two{vec({1, 0}), vec({0, 1})};
  const auto r = aggregate_mentions(two);
  CHECK(r(0) == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(r(1) == doctest::Approx(0.7071).epsilon(1e-4));
  const std::vector<Eigen::VectorXd> cancel{vec({1, 0}), vec({-1, 0})};
  CHECK_THROWS_WITH_AS(aggregate_mentions(cancel), doctest::Contains("degenerate"),
                       DataError);
  CHECK_THROWS_AS(aggregate_mentions({}), DataError);
}

TEST_CASE("aggregate is permutation and scale invariant") {
  std::mt19937_64 rng(4);
  const RowMatrix m = random_rows(20, 8, rng);
  std::vector<Eigen::VectorXd> vs;
  for (Eigen::Index i = 0; i < m.rows(); ++i) vs.push_back(m.row(i).transpose());
  const auto base = aggregate_mentions(vs);
  CHECK(std::abs(base.norm() - 1.0) < 1e-12);
  std::shuffle(vs.begin(), vs.end(), rng);
  CHECK(aggregate_mentions(vs).isApprox(base, 1e-12));
  for (auto& v : vs) v *= 3.5;
  CHECK(aggregate_mentions(vs).isApprox(base, 1e-12));
}

TEST_CASE("variant table") {
  CHECK(parse_variant("T_mask") == Variant::kTMask);
  CHECK(to_string(Variant::kCAll) == "C_all");
  CHECK(layout_of(Variant::kCAll) == VectorLayout::kLayers);
  CHECK(layout_of(Variant::kTAvg) == VectorLayout::kTopics);
  CHECK(layout_of(Variant::kALast) == VectorLayout::kSingle);
  CHECK(mode_of(Variant::kCMask) == EncodeMode::kMasked);
  CHECK(mode_of(Variant::kCLast) == EncodeMode::kUnmasked);
  CHECK(uses_topic_samples(Variant::kAMask));
  CHECK_FALSE(uses_topic_samples(Variant::kCAvg));
  CHECK_THROWS_AS(parse_variant("Q_mask"), UsageError);
}

TEST_CASE("C_input equals the base vector of the word") {
  const Encoded e = encode_corpus("a\tthe cat sat.\nb\ta cat ran far.\n",
                                  EncodeMode::kUnmasked);
  const MentionSample random{"cat", std::nullopt, e.index.mentions("cat"), 500};
  WordSamples ws;
  ws.random = &random;
  const RowMatrix row = build_variant(Variant::kCInput, ws, 2, e.store);
  REQUIRE(row.rows() == 1);
  const Eigen::VectorXd base = ReferenceEncoder(3, 4, 16).base_vector("cat");
  CHECK((row.row(0).transpose() - base).norm() < 1e-6);

  const RowMatrix all = build_variant(Variant::kCAll, ws, 2, e.store);
  CHECK(all.rows() == 5);
  CHECK((all.row(0) - row.row(0)).norm() < 1e-12);
  const RowMatrix last = build_variant(Variant::kCLast, ws, 2, e.store);
  CHECK((all.row(4) - last.row(0)).norm() < 1e-12);
  CHECK_THROWS_AS(build_variant(Variant::kCMask, ws, 2, e.store), DataError);
}

TEST_CASE("topic variants zero off-topic rows and A matches the combiner") {
  const Encoded e = encode_corpus(
      "a\tthe cat sat.\nb\ta cat ran far.\nc\tone cat slept.\n", EncodeMode::kMasked);
  const auto& cats = e.index.mentions("cat");
  const MentionSample s1{"cat", 1u, {cats[0], cats[1]}, 2};
  const MentionSample s3{"cat", 3u, {cats[2]}, 2};
  const RelevantTopics rel{"cat", {3, 1}, 0.7};
  WordSamples ws;
  ws.per_topic = {&s1, &s3};
  ws.relevant = &rel;

  const RowMatrix t = build_variant(Variant::kTMask, ws, 4, e.store);
  REQUIRE(t.rows() == 4);
  CHECK((t.row(0).array() == 0.0).all());
  CHECK((t.row(2).array() == 0.0).all());
  CHECK(std::abs(t.row(1).norm() - 1.0) < 1e-9);
  CHECK(std::abs(t.row(3).norm() - 1.0) < 1e-9);

  const RowMatrix a = build_variant(Variant::kAMask, ws, 4, e.store);
  REQUIRE(a.rows() == 1);
  const TopicCombiner equal{Eigen::VectorXd::Constant(4, 0.37)};
  CHECK((combine_topics(t, rel.topics, equal) - a.row(0).transpose()).norm() < 1e-9);

  const RelevantTopics single{"cat", {1}, 0.7};
  ws.relevant = &single;
  const RowMatrix a1 = build_variant(Variant::kAMask, ws, 4, e.store);
  CHECK((a1.row(0) - t.row(1)).norm() < 1e-12);

  const RelevantTopics missing{"cat", {2}, 0.7};
  ws.relevant = &missing;
  CHECK_THROWS_AS(build_variant(Variant::kTMask, ws, 4, e.store), DataError);
  const RelevantTopics none{"cat", {}, 0.0};
  ws.relevant = &none;
  CHECK_THROWS_AS(build_variant(Variant::kTMask, ws, 4, e.store), DataError);
}

TEST_CASE("A of orthogonal topic vectors") {
  RowMatrix rows = RowMatrix::Zero(3, 3);
  rows(1, 0) = 1.0;
  rows(2, 1) = 1.0;
  const std::vector<TopicId> rel{1, 2};
  const auto avg = average_topic_vectors(rows, rel);
  CHECK(avg.isApprox(vec({1, 1, 0}) / std::sqrt(2.0), 1e-12));
}

TEST_CASE("pca matches a dense eigensolver") {
  std::mt19937_64 rng(10);
  const RowMatrix data = random_rows(50, 10, rng);
  const PcaReduction r = pca_reduce(data, 5);
  auto eig = oracle::jacobi_eigenvalues(oracle::covariance(to_oracle(data)));
  std::sort(eig.rbegin(), eig.rend());
  double top5 = 0.0;
  for (int i = 0; i < 5; ++i) {
    top5 += eig[i];
    CHECK(r.model.eigenvalues(i) == doctest::Approx(eig[i]).epsilon(1e-8));
  }
  CHECK(std::abs(r.model.explained_variance() - top5) < 1e-8);
  const RowMatrix gram = r.model.basis.transpose() * r.model.basis;
  CHECK((gram - RowMatrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-8);
  for (Eigen::Index c = 0; c < 5; ++c) {
    Eigen::Index arg;
    r.model.basis.col(c).cwiseAbs().maxCoeff(&arg);
    CHECK(r.model.basis(arg, c) > 0.0);
  }
  CHECK(r.projected.rows() == 50);
  CHECK(r.projected.cols() == 5);
  CHECK_THROWS_AS(pca_reduce(data.topRows(5), 5), DataError);
}

TEST_CASE("pca reconstructs planar data exactly") {
  std::mt19937_64 rng(12);
  const RowMatrix coeffs = random_rows(30, 2, rng);
  const RowMatrix plane = random_rows(2, 10, rng);
  const RowMatrix offset = random_rows(1, 10, rng);
  RowMatrix data = coeffs * plane;
  data.rowwise() += offset.row(0);
  const PcaReduction r = pca_reduce(data, 2);
  RowMatrix back = r.projected * r.model.basis.transpose();
  back.rowwise() += r.model.mean.transpose();
  CHECK((back - data).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("variant pca keeps zero rows zero") {
  std::mt19937_64 rng(13);
  VariantMatrix m;
  m.name = "T_mask";
  m.layout = VectorLayout::kTopics;
  for (int w = 0; w < 8; ++w) {
    RowMatrix rows = RowMatrix::Zero(3, 6);
    rows.row(w % 3) = random_rows(1, 6, rng);
    rows.row((w + 1) % 3) = random_rows(1, 6, rng);
    m.add("w" + std::to_string(w), rows,
          {static_cast<TopicId>(w % 3), static_cast<TopicId>((w + 1) % 3)});
  }
  const VariantPca p = pca_reduce_variant(m, 2);
  CHECK(p.reduced.name == "T_mask-PCA");
  CHECK(p.reduced.dim == 2);
  for (int w = 0; w < 8; ++w) {
    const auto& rows = p.reduced.vectors[w];
    CHECK((rows.row((w + 2) % 3).array() == 0.0).all());
    CHECK(rows.row(w % 3).norm() > 0.0);
    CHECK(p.reduced.relevant_topics[w] == m.relevant_topics[w]);
  }
}

TEST_CASE("nearest neighbors") {
  std::mt19937_64 rng(14);
  const std::vector<std::string> words{"a", "b", "c", "d", "e"};
  const RowMatrix rows = random_rows(5, 4, rng);
  const Eigen::VectorXd q = rows.row(2).transpose();
  const auto nn = nearest_neighbors(q, "c", words, rows, 10);
  REQUIRE(nn.size() == 4);
  std::vector<std::pair<double, std::string>> brute;
  for (int i = 0; i < 5; ++i) {
    if (i == 2) continue;
    std::vector<double> a(q.data(), q.data() + 4), b(4);
    for (int j = 0; j < 4; ++j) b[j] = rows(i, j);
    brute.emplace_back(-oracle::cosine(a, b), words[i]);
  }
  std::sort(brute.begin(), brute.end());
  for (int i = 0; i < 4; ++i) {
    CHECK(nn[i].word == brute[i].second);
    CHECK(nn[i].cosine == doctest::Approx(-brute[i].first).epsilon(1e-12));
  }

  const auto self = nearest_neighbors(q, "", words, rows, 1);
  CHECK(self[0].word == "c");
  CHECK(self[0].cosine == doctest::Approx(1.0));

  RowMatrix axis = RowMatrix::Zero(3, 2);
  axis.col(0).setOnes();
  const std::vector<std::string> names{"z", "x", "y"};
  const auto ortho = nearest_neighbors(vec({0, 1}), "", names, axis, 3);
  CHECK(ortho[0].word == "x");
  CHECK(ortho[1].word == "y");
  CHECK(ortho[2].word == "z");
  CHECK(ortho[0].cosine == 0.0);
  CHECK_THROWS(nearest_neighbors(q, "", {}, RowMatrix(0, 4), 1));
}

TEST_CASE("variant persistence and TSV dumps") {
  std::mt19937_64 rng(15);
  VariantMatrix m;
  m.name = "T_mask";
  m.layout = VectorLayout::kTopics;
  m.mode = EncodeMode::kMasked;
  for (int w = 0; w < 4; ++w) {
    RowMatrix rows = RowMatrix::Zero(3, 5);
    rows.row(w % 3) = random_rows(1, 5, rng).cast<float>().cast<double>();
    m.add("w" + std::to_string(w), rows, {static_cast<TopicId>(w % 3)});
  }
  std::stringstream store, sidecar;
  write_variant(m, store, sidecar);
  std::string first;
  std::getline(sidecar, first);
  CHECK(first == R"({"word":"w0","variant":"T_mask","topic_id":0,"layer_index":null,"record_id":0})");
  sidecar.seekg(0);
  const VariantMatrix back = read_variant(store, sidecar, 3);
  CHECK(back.words == m.words);
  CHECK(back.relevant_topics == m.relevant_topics);
  for (int w = 0; w < 4; ++w) CHECK(back.vectors[w] == m.vectors[w]);

  std::stringstream coords;
  write_coordinates_tsv(m, coords);
  std::string header;
  std::getline(coords, header);
  CHECK(header == "word\ttopic_id\tlayer_index\tx\ty");
  int lines = 0;
  for (std::string line; std::getline(coords, line);) ++lines;
  CHECK(lines == 4);

  std::stringstream nb;
  const std::vector<std::string> queries{"w1"};
  write_neighbors_tsv(m, queries, 2, nb);
  std::getline(nb, header);
  CHECK(header == "query\ttopic_id\tlayer_index\trank\tneighbor\tcosine");
}

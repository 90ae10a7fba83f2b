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

#include <map>
#include <sstream>
#include <string>

#include "topicvec/corpus.hpp"
#include "topicvec/error.hpp"

using namespace topicvec;

namespace {

CorpusStore from_text(const std::string& text) {
  std::istringstream in(text);
  return ingest_corpus(in);
}

}  // namespace

TEST_CASE("tokenizer lowercases, strips punctuation and splits sentences") {
  const auto sents = tokenize_text("The cat sat. The cat slept.");
  REQUIRE(sents.size() == 2);
  CHECK(sents[0].tokens == std::vector<std::string>{"the", "cat", "sat"});
  CHECK(sents[1].tokens == std::vector<std::string>{"the", "cat", "slept"});
  CHECK(sents[1].sent_id == 1);

  const auto quoted = tokenize_text("\"Hello,\" she said!  Really?yes (maybe)");
  REQUIRE(quoted.size() == 2);
  CHECK(quoted[0].tokens == std::vector<std::string>{"hello", "she", "said"});
  CHECK(quoted[1].tokens ==
        std::vector<std::string>{"really?yes", "maybe"});
}

TEST_CASE("tokenizer splits on non-ASCII whitespace") {
  // U+00A0 no-break space and U+3000 ideographic space.
  const auto sents = tokenize_text("caf\xC3\xA9\xC2\xA0noir\xE3\x80\x80ok");
  REQUIRE(sents.size() == 1);
  CHECK(sents[0].tokens ==
        std::vector<std::string>{"caf\xC3\xA9", "noir", "ok"});
}

TEST_CASE("ingest one record") {
  const CorpusStore store = from_text("d1\tThe cat sat. The cat slept.\n");
  REQUIRE(store.size() == 1);
  CHECK(store.document(0).sentences.size() == 2);
  CHECK(store.token_count() == 6);
  CHECK(store.document(0).name == "d1");
}

TEST_CASE("ingest assigns ids in file order") {
  const CorpusStore store =
      from_text("zeta\tFirst doc.\nalpha\tSecond doc.\n\nmid\tThird one.\n");
  REQUIRE(store.size() == 3);
  CHECK(store.document(0).name == "zeta");
  CHECK(store.document(1).name == "alpha");
  CHECK(store.document(2).name == "mid");
  for (DocId i = 0; i < 3; ++i) CHECK(store.document(i).doc_id == i);
}

TEST_CASE("ingest errors") {
  CHECK_THROWS_WITH_AS(from_text(""), "empty corpus", DataError);
  CHECK_THROWS_WITH_AS(from_text("\n\n"), "empty corpus", DataError);
  CHECK_THROWS_WITH_AS(from_text("ok\tfine.\nno tab here\n"),
                       doctest::Contains("line 2"), DataError);
  CHECK_THROWS_WITH_AS(from_text("x\t... !!\n"), doctest::Contains("line 1"),
                       DataError);
  CHECK_THROWS_AS(ingest_corpus(std::filesystem::path("/no/such/file")),
                  DataError);
}

TEST_CASE("vocabulary thresholds") {
  const CorpusStore store = from_text(
      "a\tcat cat cat dog.\nb\tcat dog cat bird.\n");
  const Vocabulary v3 = build_vocabulary(store, 3);
  CHECK(v3.entries == decltype(v3.entries){{"cat", 5}});

  const Vocabulary v1 = build_vocabulary(store, 1);
  CHECK(v1.entries.size() == 3);
  CHECK(v1.frequency("dog") == 2);
  CHECK(v1.frequency("bird") == 1);

  CHECK(build_vocabulary(store, 6).entries.empty());
}

TEST_CASE("mention index enumerates occurrences") {
  const CorpusStore store = from_text("a\tthe cat saw the cat\n");
  const Vocabulary vocab = build_vocabulary(store, 1);
  const MentionIndex index = build_mention_index(store, vocab);
  const auto& cats = index.mentions("cat");
  REQUIRE(cats.size() == 2);
  CHECK(cats[0].token_index == 1);
  CHECK(cats[1].token_index == 4);
  CHECK(index.mention_count() == 5);
}

TEST_CASE("mention index orders documents and filters words") {
  const CorpusStore store = from_text("a\tdog cat.\nb\tcat bird.\n");
  const Vocabulary vocab = build_vocabulary(store, 2);
  const MentionIndex index = build_mention_index(store, vocab);
  CHECK_FALSE(index.contains("dog"));
  CHECK_THROWS_AS(index.mentions("dog"), DataError);
  const auto& cats = index.mentions("cat");
  REQUIRE(cats.size() == 2);
  CHECK(cats[0].doc_id == 0);
  CHECK(cats[1].doc_id == 1);
}

TEST_CASE("mention index detects vocabulary/store mismatch") {
  const CorpusStore store = from_text("a\tcat cat dog.\n");
  Vocabulary vocab = build_vocabulary(store, 1);
  vocab.entries["cat"] = 3;
  CHECK_THROWS_WITH_AS(build_mention_index(store, vocab),
                       doctest::Contains("mismatch"), DataError);
}

TEST_CASE("index invariants on a fixture: conservation, integrity, determinism") {
  const std::string text =
      "d0\tThe quick brown fox jumps. The fox sleeps!\n"
      "d1\tA dog and a fox? The dog barks at the fox.\n"
      "d2\tNothing here but the sun. And the moon, the stars.\n";
  const CorpusStore store = from_text(text);
  for (std::uint64_t min_count : {1u, 2u, 3u}) {
    const Vocabulary vocab = build_vocabulary(store, min_count);
    const MentionIndex index = build_mention_index(store, vocab);

    std::uint64_t freq_total = 0;
    for (const auto& [w, n] : vocab.entries) freq_total += n;
    std::uint64_t postings_total = 0;
    for (const auto& [w, list] : index.postings()) postings_total += list.size();
    CHECK(postings_total == freq_total);

    for (const auto& [w, list] : index.postings()) {
      for (const Mention& m : list) {
        CHECK(store.sentence(m.doc_id, m.sent_id).tokens.at(m.token_index) == w);
        CHECK(index.mention(m.mention_id) == m);
      }
    }

    const CorpusStore again = from_text(text);
    const MentionIndex index2 =
        build_mention_index(again, build_vocabulary(again, min_count));
    CHECK(index2.postings() == index.postings());
  }
}

TEST_CASE("corpus and index JSON-lines round trip") {
  const CorpusStore store = from_text("a\tthe cat saw the cat.\nb\tcat naps.\n");
  const MentionIndex index = build_mention_index(store, build_vocabulary(store, 1));

  std::stringstream corpus_io;
  write_corpus_jsonl(store, corpus_io);
  const CorpusStore store2 = read_corpus_jsonl(corpus_io);
  REQUIRE(store2.size() == store.size());
  CHECK(store2.document(1).sentences[0].tokens ==
        store.document(1).sentences[0].tokens);

  std::stringstream index_io;
  write_mention_index_jsonl(index, index_io);
  const std::string line = index_io.str().substr(0, index_io.str().find('\n'));
  CHECK(line == R"({"word":"cat","mentions":[[1,0,0,1],[4,0,0,4],[5,1,0,0]]})");
  const MentionIndex index2 = read_mention_index_jsonl(index_io);
  CHECK(index2.postings() == index.postings());
}

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
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace topicvec {

using DocId = std::uint32_t;
using SentId = std::uint32_t;
using MentionId = std::uint64_t;

struct Sentence {
  SentId sent_id = 0;
  std::vector<std::string> tokens;
};

struct Document {
  DocId doc_id = 0;
  std::string name;  // the record's external id string
  std::vector<Sentence> sentences;
};

// Tokenized corpus. Immutable once built; safe for concurrent reads.
class CorpusStore {
 public:
  CorpusStore() = default;
  explicit CorpusStore(std::vector<Document> docs);

  const std::vector<Document>& documents() const noexcept { return docs_; }
  std::size_t size() const noexcept { return docs_.size(); }
  const Document& document(DocId id) const;
  const Sentence& sentence(DocId doc, SentId sent) const;
  std::size_t token_count() const noexcept { return token_count_; }

 private:
  std::vector<Document> docs_;
  std::size_t token_count_ = 0;
};

struct Vocabulary {
  std::map<std::string, std::uint64_t, std::less<>> entries;
  std::uint64_t min_count = 1;

  bool contains(std::string_view word) const;
  std::uint64_t frequency(std::string_view word) const;
};

struct Mention {
  MentionId mention_id = 0;
  std::string word;
  DocId doc_id = 0;
  SentId sent_id = 0;
  std::uint32_t token_index = 0;

  friend bool operator==(const Mention&, const Mention&) = default;
};

// word -> occurrences in corpus order. Mention ids are dense and follow the
// order in which vocabulary tokens appear in the corpus.
class MentionIndex {
 public:
  MentionIndex() = default;
  using Postings = std::map<std::string, std::vector<Mention>, std::less<>>;

  explicit MentionIndex(Postings postings);

  const Postings& postings() const noexcept { return postings_; }
  bool contains(std::string_view word) const;
  // Throws DataError for words without postings.
  const std::vector<Mention>& mentions(std::string_view word) const;
  const Mention& mention(MentionId id) const;
  std::size_t mention_count() const noexcept { return by_id_.size(); }

 private:
  Postings postings_;
  std::vector<Mention> by_id_;
};

// Lowercases, splits on Unicode whitespace and strips leading/trailing ASCII
// punctuation. Sentences end at a token whose last character is '.', '!' or
// '?'. Empty tokens and empty sentences are dropped.
std::vector<Sentence> tokenize_text(std::string_view text);

// One document per line: "<name>\t<text>". Blank lines are skipped.
CorpusStore ingest_corpus(std::istream& in);
CorpusStore ingest_corpus(const std::filesystem::path& path);

Vocabulary build_vocabulary(const CorpusStore& store, std::uint64_t min_count);

MentionIndex build_mention_index(const CorpusStore& store,
                                 const Vocabulary& vocab);

// JSON-lines persistence.
void write_corpus_jsonl(const CorpusStore& store, std::ostream& out);
CorpusStore read_corpus_jsonl(std::istream& in);
void write_mention_index_jsonl(const MentionIndex& index, std::ostream& out);
MentionIndex read_mention_index_jsonl(std::istream& in);

}  // namespace topicvec

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

#include "topicvec/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <utility>

#include <nlohmann/json.hpp>

#include "topicvec/error.hpp"

namespace topicvec {
namespace {

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Decodes one UTF-8 code point starting at text[pos]; returns its byte length.
// Invalid sequences are consumed one byte at a time and never count as space.
std::size_t decode_utf8(std::string_view text, std::size_t pos, char32_t& cp) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t len = 1;
  if (lead < 0x80) {
    cp = lead;
    return 1;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    cp = 0xFFFD;
    return 1;
  }
  if (pos + len > text.size()) {
    cp = 0xFFFD;
    return 1;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const auto c = static_cast<unsigned char>(text[pos + i]);
    if ((c & 0xC0) != 0x80) {
      cp = 0xFFFD;
      return 1;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  return len;
}

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

std::string normalize_token(std::string_view raw) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end && is_ascii_punct(raw[begin])) ++begin;
  while (end > begin && is_ascii_punct(raw[end - 1])) --end;
  std::string token(raw.substr(begin, end - begin));
  for (char& c : token) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80) c = static_cast<char>(std::tolower(u));
  }
  return token;
}

bool ends_sentence(std::string_view raw) {
  const char last = raw.back();
  return last == '.' || last == '!' || last == '?';
}

}  // namespace

CorpusStore::CorpusStore(std::vector<Document> docs) : docs_(std::move(docs)) {
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    if (docs_[i].doc_id != i) {
      throw DataError("document ids must be dense and ordered; found id " +
                      std::to_string(docs_[i].doc_id) + " at position " +
                      std::to_string(i));
    }
    if (docs_[i].sentences.empty()) {
      throw DataError("document " + std::to_string(i) + " has no sentences");
    }
    for (const Sentence& s : docs_[i].sentences) {
      if (s.tokens.empty()) {
        throw DataError("document " + std::to_string(i) +
                        " contains an empty sentence");
      }
      token_count_ += s.tokens.size();
    }
  }
}

const Document& CorpusStore::document(DocId id) const {
  if (id >= docs_.size()) {
    throw DataError("unknown document id " + std::to_string(id));
  }
  return docs_[id];
}

const Sentence& CorpusStore::sentence(DocId doc, SentId sent) const {
  const Document& d = document(doc);
  if (sent >= d.sentences.size()) {
    throw DataError("unknown sentence " + std::to_string(sent) +
                    " in document " + std::to_string(doc));
  }
  return d.sentences[sent];
}

bool Vocabulary::contains(std::string_view word) const {
  return entries.find(word) != entries.end();
}

std::uint64_t Vocabulary::frequency(std::string_view word) const {
  auto it = entries.find(word);
  return it == entries.end() ? 0 : it->second;
}

MentionIndex::MentionIndex(Postings postings) : postings_(std::move(postings)) {
  std::size_t total = 0;
  for (const auto& [word, list] : postings_) total += list.size();
  by_id_.resize(total);
  std::vector<bool> seen(total, false);
  for (const auto& [word, list] : postings_) {
    for (const Mention& m : list) {
      if (m.mention_id >= total || seen[m.mention_id]) {
        throw DataError("mention ids are not dense and unique (word '" + word +
                        "', id " + std::to_string(m.mention_id) + ")");
      }
      if (m.word != word) {
        throw DataError("mention " + std::to_string(m.mention_id) +
                        " filed under '" + word + "' names '" + m.word + "'");
      }
      seen[m.mention_id] = true;
      by_id_[m.mention_id] = m;
    }
  }
}

bool MentionIndex::contains(std::string_view word) const {
  return postings_.find(word) != postings_.end();
}

const std::vector<Mention>& MentionIndex::mentions(std::string_view word) const {
  auto it = postings_.find(word);
  if (it == postings_.end()) {
    throw DataError("unknown word '" + std::string(word) + "'");
  }
  return it->second;
}

const Mention& MentionIndex::mention(MentionId id) const {
  if (id >= by_id_.size()) {
    throw DataError("unknown mention id " + std::to_string(id));
  }
  return by_id_[id];
}

std::vector<Sentence> tokenize_text(std::string_view text) {
  std::vector<Sentence> sentences;
  Sentence current;
  auto flush = [&] {
    if (!current.tokens.empty()) {
      current.sent_id = static_cast<SentId>(sentences.size());
      sentences.push_back(std::move(current));
      current = Sentence{};
    }
  };

  std::size_t pos = 0;
  std::size_t word_begin = std::string_view::npos;
  auto finish_word = [&](std::size_t word_end) {
    std::string_view raw = text.substr(word_begin, word_end - word_begin);
    std::string token = normalize_token(raw);
    if (!token.empty()) current.tokens.push_back(std::move(token));
    if (ends_sentence(raw)) flush();
    word_begin = std::string_view::npos;
  };

  while (pos < text.size()) {
    char32_t cp = 0;
    const std::size_t len = decode_utf8(text, pos, cp);
    if (is_unicode_space(cp)) {
      if (word_begin != std::string_view::npos) finish_word(pos);
    } else if (word_begin == std::string_view::npos) {
      word_begin = pos;
    }
    pos += len;
  }
  if (word_begin != std::string_view::npos) finish_word(text.size());
  flush();
  return sentences;
}

CorpusStore ingest_corpus(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("malformed record at line " + std::to_string(line_no) +
                      ": expected '<doc_id>\\t<text>'");
    }
    Document doc;
    doc.doc_id = static_cast<DocId>(docs.size());
    doc.name = line.substr(0, tab);
    doc.sentences = tokenize_text(std::string_view(line).substr(tab + 1));
    if (doc.sentences.empty()) {
      throw DataError("malformed record at line " + std::to_string(line_no) +
                      ": no tokens");
    }
    docs.push_back(std::move(doc));
  }
  if (in.bad()) throw DataError("read failure while ingesting corpus");
  if (docs.empty()) throw DataError("empty corpus");
  return CorpusStore(std::move(docs));
}

CorpusStore ingest_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read corpus file " + path.string());
  return ingest_corpus(in);
}

Vocabulary build_vocabulary(const CorpusStore& store, std::uint64_t min_count) {
  if (min_count < 1) throw UsageError("min_count must be >= 1");
  std::map<std::string, std::uint64_t, std::less<>> counts;
  for (const Document& doc : store.documents()) {
    for (const Sentence& s : doc.sentences) {
      for (const std::string& t : s.tokens) ++counts[t];
    }
  }
  Vocabulary vocab;
  vocab.min_count = min_count;
  for (auto& [word, n] : counts) {
    if (n >= min_count) vocab.entries.emplace(word, n);
  }
  return vocab;
}

MentionIndex build_mention_index(const CorpusStore& store,
                                 const Vocabulary& vocab) {
  MentionIndex::Postings postings;
  MentionId next_id = 0;
  for (const Document& doc : store.documents()) {
    for (const Sentence& s : doc.sentences) {
      for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        const std::string& t = s.tokens[i];
        if (!vocab.contains(t)) continue;
        postings[t].push_back(Mention{next_id++, t, doc.doc_id, s.sent_id,
                                      static_cast<std::uint32_t>(i)});
      }
    }
  }
  for (const auto& [word, freq] : vocab.entries) {
    auto it = postings.find(word);
    const std::uint64_t found = it == postings.end() ? 0 : it->second.size();
    if (found != freq) {
      throw DataError("vocabulary/store mismatch for '" + word +
                      "': vocabulary says " + std::to_string(freq) +
                      ", corpus has " + std::to_string(found));
    }
  }
  return MentionIndex(std::move(postings));
}

void write_corpus_jsonl(const CorpusStore& store, std::ostream& out) {
  for (const Document& doc : store.documents()) {
    nlohmann::json sentences = nlohmann::json::array();
    for (const Sentence& s : doc.sentences) sentences.push_back(s.tokens);
    nlohmann::ordered_json j{{"doc_id", doc.doc_id},
                     {"name", doc.name},
                     {"sentences", std::move(sentences)}};
    out << j.dump() << '\n';
  }
}

CorpusStore read_corpus_jsonl(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Document doc;
      doc.doc_id = j.at("doc_id").get<DocId>();
      doc.name = j.at("name").get<std::string>();
      for (const auto& s : j.at("sentences")) {
        Sentence sent;
        sent.sent_id = static_cast<SentId>(doc.sentences.size());
        sent.tokens = s.get<std::vector<std::string>>();
        doc.sentences.push_back(std::move(sent));
      }
      docs.push_back(std::move(doc));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("corpus line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  if (docs.empty()) throw DataError("empty corpus");
  return CorpusStore(std::move(docs));
}

void write_mention_index_jsonl(const MentionIndex& index, std::ostream& out) {
  for (const auto& [word, list] : index.postings()) {
    nlohmann::json mentions = nlohmann::json::array();
    for (const Mention& m : list) {
      mentions.push_back({m.mention_id, m.doc_id, m.sent_id, m.token_index});
    }
    out << nlohmann::ordered_json{{"word", word}, {"mentions", std::move(mentions)}}
               .dump()
        << '\n';
  }
}

MentionIndex read_mention_index_jsonl(std::istream& in) {
  MentionIndex::Postings postings;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto word = j.at("word").get<std::string>();
      auto& list = postings[word];
      for (const auto& m : j.at("mentions")) {
        list.push_back(Mention{m.at(0).get<MentionId>(), word,
                               m.at(1).get<DocId>(), m.at(2).get<SentId>(),
                               m.at(3).get<std::uint32_t>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("mention index line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return MentionIndex(std::move(postings));
}

}  // namespace topicvec

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

#include "topicvec/encoding.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

#include <nlohmann/json.hpp>

#include "topicvec/error.hpp"

namespace topicvec {
namespace {

constexpr std::array<char, 4> kMagic = {'C', 'V', 'S', '1'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// (0, 1], never zero so the log below stays finite.
double unit_open(std::uint64_t& state) {
  return (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
}

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw FormatError(std::string("truncated store: missing ") + what);
  }
  return value;
}

}  // namespace

std::string_view to_string(EncodeMode mode) {
  return mode == EncodeMode::kMasked ? "MASKED" : "UNMASKED";
}

EncodeMode parse_encode_mode(std::string_view text) {
  if (text == "MASKED" || text == "masked") return EncodeMode::kMasked;
  if (text == "UNMASKED" || text == "unmasked") return EncodeMode::kUnmasked;
  throw FormatError("unknown encode mode '" + std::string(text) + "'");
}

ReferenceEncoder::ReferenceEncoder(std::uint64_t seed, std::uint32_t num_layers,
                                   std::uint32_t dim)
    : seed_(seed), num_layers_(num_layers), dim_(dim) {
  if (num_layers < 1) throw UsageError("reference encoder needs >= 1 layer");
  if (dim < 1) throw UsageError("reference encoder needs dim >= 1");
}

Eigen::VectorXd ReferenceEncoder::base_vector(std::string_view token) const {
  std::uint64_t seed_state = seed_;
  std::uint64_t state = fnv1a(token) ^ splitmix64(seed_state);
  Eigen::VectorXd v(dim_);
  // Box-Muller gives an isotropic direction after normalization.
  for (std::uint32_t i = 0; i < dim_; i += 2) {
    const double r = std::sqrt(-2.0 * std::log(unit_open(state)));
    const double theta = 2.0 * std::numbers::pi * unit_open(state);
    v[i] = r * std::cos(theta);
    if (i + 1 < dim_) v[i + 1] = r * std::sin(theta);
  }
  return v / v.norm();
}

LayerVectors ReferenceEncoder::encode(const EncodeRequest& request) const {
  if (request.tokens.empty()) throw DataError("cannot encode an empty sentence");
  if (request.token_index >= request.tokens.size()) {
    throw DataError("token_index " + std::to_string(request.token_index) +
                    " out of range for mention " +
                    std::to_string(request.mention_id));
  }
  const bool has_context = request.tokens.size() > 1;
  Eigen::VectorXd context = Eigen::VectorXd::Zero(dim_);
  for (std::size_t i = 0; i < request.tokens.size(); ++i) {
    if (i != request.token_index) context += base_vector(request.tokens[i]);
  }
  if (has_context) context /= static_cast<double>(request.tokens.size() - 1);

  LayerVectors out;
  out.mention_id = request.mention_id;
  out.mode = request.mode;
  if (request.mode == EncodeMode::kMasked) {
    if (!has_context) {
      throw DataError("masked encoding of mention " +
                      std::to_string(request.mention_id) +
                      " has no context tokens");
    }
    const double norm = context.norm();
    if (norm == 0.0) throw DataError("masked context vectors cancel out");
    out.layers = (context / norm).cast<float>().transpose();
    return out;
  }

  const Eigen::VectorXd target = base_vector(request.tokens[request.token_index]);
  // A lone target has nothing to mix in; every layer stays at b(target).
  if (!has_context) context = target;
  out.layers.resize(num_layers_ + 1, dim_);
  for (std::uint32_t layer = 0; layer <= num_layers_; ++layer) {
    const double gamma = static_cast<double>(layer) / num_layers_;
    Eigen::VectorXd mixed = (1.0 - gamma) * target + gamma * context;
    const double norm = mixed.norm();
    if (norm == 0.0) throw DataError("layer mixture cancels out");
    out.layers.row(layer) = (mixed / norm).cast<float>().transpose();
  }
  return out;
}

LayerVectors reference_encode(const EncodeRequest& request, std::uint64_t seed,
                              std::uint32_t num_layers, std::uint32_t dim) {
  return ReferenceEncoder(seed, num_layers, dim).encode(request);
}

VectorStore::VectorStore(std::uint32_t dim, std::uint32_t layer_count,
                         EncodeMode mode)
    : dim_(dim), layer_count_(layer_count), mode_(mode) {}

void VectorStore::add(LayerVectors record) {
  if (record.mode != mode_) {
    throw DataError("record " + std::to_string(record.mention_id) +
                    " has mode " + std::string(to_string(record.mode)) +
                    ", store holds " + std::string(to_string(mode_)));
  }
  if (record.layers.rows() != layer_count_ || record.layers.cols() != dim_) {
    throw DataError("dimension mismatch for record " +
                    std::to_string(record.mention_id) + ": got " +
                    std::to_string(record.layers.rows()) + "x" +
                    std::to_string(record.layers.cols()) + ", expected " +
                    std::to_string(layer_count_) + "x" + std::to_string(dim_));
  }
  if (!record.layers.allFinite()) {
    throw DataError("non-finite entries in record " +
                    std::to_string(record.mention_id));
  }
  const auto [it, inserted] =
      by_id_.emplace(record.mention_id, records_.size());
  if (!inserted) {
    throw DataError("duplicate record id " + std::to_string(record.mention_id));
  }
  records_.push_back(std::move(record));
}

bool VectorStore::contains(MentionId id) const { return by_id_.count(id) > 0; }

const LayerVectors& VectorStore::at(MentionId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) {
    throw DataError("missing vectors for mention " + std::to_string(id));
  }
  return records_[it->second];
}

void write_store(const VectorStore& store, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, store.dim());
  put<std::uint32_t>(out, store.layer_count());
  put<std::uint8_t>(out, static_cast<std::uint8_t>(store.mode()));
  put<std::uint64_t>(out, store.size());
  for (const LayerVectors& r : store.records()) {
    put<std::uint64_t>(out, r.mention_id);
    out.write(reinterpret_cast<const char*>(r.layers.data()),
              static_cast<std::streamsize>(r.layers.size() * sizeof(float)));
  }
  if (!out) throw DataError("failed writing vector store");
}

VectorStore read_store(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || magic != kMagic) {
    throw FormatError("bad magic: not a CVS1 vector store");
  }
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kVersion) {
    throw FormatError("unsupported store version " + std::to_string(version));
  }
  const auto dim = get<std::uint32_t>(in, "dimension");
  const auto layer_count = get<std::uint32_t>(in, "layer count");
  const auto mode_byte = get<std::uint8_t>(in, "mode");
  if (mode_byte > 1) {
    throw FormatError("invalid mode byte " + std::to_string(mode_byte));
  }
  if (dim == 0 || layer_count == 0) {
    throw FormatError("dimension mismatch: zero dimension or layer count");
  }
  const auto mode = static_cast<EncodeMode>(mode_byte);
  if (mode == EncodeMode::kMasked && layer_count != 1) {
    throw FormatError("dimension mismatch: masked stores carry one layer");
  }
  const auto count = get<std::uint64_t>(in, "record count");

  VectorStore store(dim, layer_count, mode);
  const auto payload =
      static_cast<std::streamsize>(std::size_t{layer_count} * dim * sizeof(float));
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t id = 0;
    in.read(reinterpret_cast<char*>(&id), sizeof(id));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(id))) {
      throw FormatError("truncated store: header promises " +
                        std::to_string(count) + " records, found " +
                        std::to_string(i));
    }
    LayerVectors r;
    r.mention_id = id;
    r.mode = mode;
    r.layers.resize(layer_count, dim);
    in.read(reinterpret_cast<char*>(r.layers.data()), payload);
    if (in.gcount() != payload) {
      throw FormatError("truncated store: record " + std::to_string(i) +
                        " is incomplete");
    }
    store.add(std::move(r));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("store has trailing bytes after " +
                      std::to_string(count) + " records");
  }
  return store;
}

std::size_t emit_manifest(const std::vector<MentionSample>& samples,
                          const CorpusStore& store, EncodeMode mode,
                          std::ostream& out) {
  std::size_t lines = 0;
  for (const MentionSample& s : samples) {
    for (const Mention& m : s.mentions) {
      if (m.doc_id >= store.size() ||
          m.sent_id >= store.document(m.doc_id).sentences.size()) {
        throw DataError("dangling mention " + std::to_string(m.mention_id));
      }
      const Sentence& sent = store.sentence(m.doc_id, m.sent_id);
      if (m.token_index >= sent.tokens.size() ||
          sent.tokens[m.token_index] != m.word) {
        throw DataError("dangling mention " + std::to_string(m.mention_id) +
                        ": token does not match '" + m.word + "'");
      }
      nlohmann::json topic = s.topic_id ? nlohmann::json(*s.topic_id)
                                        : nlohmann::json("RANDOM");
      out << nlohmann::ordered_json{{"mention_id", m.mention_id},
                            {"word", m.word},
                            {"tokens", sent.tokens},
                            {"token_index", m.token_index},
                            {"mode", to_string(mode)},
                            {"topic_id", topic}}
                 .dump()
          << '\n';
      ++lines;
    }
  }
  return lines;
}

std::vector<ManifestEntry> read_manifest(std::istream& in) {
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.mention_id = j.at("mention_id").get<MentionId>();
      e.word = j.at("word").get<std::string>();
      e.tokens = j.at("tokens").get<std::vector<std::string>>();
      e.token_index = j.at("token_index").get<std::uint32_t>();
      e.mode = parse_encode_mode(j.at("mode").get<std::string>());
      const auto& topic = j.at("topic_id");
      if (!topic.is_string()) e.topic_id = topic.get<TopicId>();
      if (e.token_index >= e.tokens.size()) {
        throw FormatError("manifest line " + std::to_string(line_no) +
                          ": token_index out of range");
      }
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return entries;
}

}  // namespace topicvec

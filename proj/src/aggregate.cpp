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

#include "topicvec/aggregate.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "topicvec/error.hpp"

namespace topicvec {
namespace {

struct VariantInfo {
  Variant variant;
  std::string_view name;
  VectorLayout layout;
  EncodeMode mode;
};

constexpr std::array<VariantInfo, 11> kVariants = {{
    {Variant::kCMask, "C_mask", VectorLayout::kSingle, EncodeMode::kMasked},
    {Variant::kCLast, "C_last", VectorLayout::kSingle, EncodeMode::kUnmasked},
    {Variant::kCInput, "C_input", VectorLayout::kSingle, EncodeMode::kUnmasked},
    {Variant::kCAvg, "C_avg", VectorLayout::kSingle, EncodeMode::kUnmasked},
    {Variant::kCAll, "C_all", VectorLayout::kLayers, EncodeMode::kUnmasked},
    {Variant::kTMask, "T_mask", VectorLayout::kTopics, EncodeMode::kMasked},
    {Variant::kTLast, "T_last", VectorLayout::kTopics, EncodeMode::kUnmasked},
    {Variant::kTAvg, "T_avg", VectorLayout::kTopics, EncodeMode::kUnmasked},
    {Variant::kAMask, "A_mask", VectorLayout::kSingle, EncodeMode::kMasked},
    {Variant::kALast, "A_last", VectorLayout::kSingle, EncodeMode::kUnmasked},
    {Variant::kAAvg, "A_avg", VectorLayout::kSingle, EncodeMode::kUnmasked},
}};

const VariantInfo& info(Variant v) {
  return kVariants[static_cast<std::size_t>(v)];
}

enum class LayerPick { kFirst, kLast, kMean };

LayerPick layer_pick(Variant v) {
  switch (v) {
    case Variant::kCMask:
    case Variant::kTMask:
    case Variant::kAMask:
    case Variant::kCInput:
      return LayerPick::kFirst;
    case Variant::kCLast:
    case Variant::kTLast:
    case Variant::kALast:
      return LayerPick::kLast;
    default:
      return LayerPick::kMean;
  }
}

Eigen::VectorXd mention_vector(const LayerVectors& lv, LayerPick pick) {
  switch (pick) {
    case LayerPick::kFirst:
      return lv.layers.row(0).transpose().cast<double>();
    case LayerPick::kLast:
      return lv.layers.row(lv.layers.rows() - 1).transpose().cast<double>();
    case LayerPick::kMean:
      break;
  }
  return lv.layers.cast<double>().colwise().mean().transpose();
}

Eigen::VectorXd aggregate_sample(const MentionSample& sample,
                                 const VectorStore& store, LayerPick pick) {
  if (sample.mentions.empty()) {
    throw DataError("empty mention sample for '" + sample.word + "'");
  }
  std::vector<Eigen::VectorXd> vectors;
  vectors.reserve(sample.mentions.size());
  for (const Mention& m : sample.mentions) {
    vectors.push_back(mention_vector(store.at(m.mention_id), pick));
  }
  return aggregate_mentions(vectors);
}

RowMatrix topic_rows(Variant variant, const WordSamples& samples,
                     std::uint32_t num_topics, const VectorStore& store) {
  if (samples.relevant == nullptr || samples.relevant->topics.empty()) {
    throw DataError("topic variant needs a non-empty relevant topic set");
  }
  const RelevantTopics& relevant = *samples.relevant;
  RowMatrix rows = RowMatrix::Zero(num_topics, store.dim());
  for (TopicId t : relevant.topics) {
    if (t >= num_topics) {
      throw DataError("relevant topic " + std::to_string(t) + " out of range");
    }
    auto it = std::find_if(
        samples.per_topic.begin(), samples.per_topic.end(),
        [&](const MentionSample* s) { return s->topic_id == t; });
    if (it == samples.per_topic.end()) {
      throw DataError("no topic-" + std::to_string(t) + " sample for '" +
                      relevant.word + "'");
    }
    rows.row(t) = aggregate_sample(**it, store, layer_pick(variant)).transpose();
  }
  return rows;
}

bool is_zero_row(const RowMatrix& m, Eigen::Index r) {
  return (m.row(r).array() == 0.0).all();
}

Variant base_variant(std::string_view name) {
  constexpr std::string_view kSuffix = "-PCA";
  if (name.size() > kSuffix.size() &&
      name.substr(name.size() - kSuffix.size()) == kSuffix) {
    name.remove_suffix(kSuffix.size());
  }
  return parse_variant(name);
}

}  // namespace

std::string_view to_string(Variant v) { return info(v).name; }

Variant parse_variant(std::string_view name) {
  for (const VariantInfo& i : kVariants) {
    if (i.name == name) return i.variant;
  }
  throw UsageError("unknown variant '" + std::string(name) + "'");
}

VectorLayout layout_of(Variant v) { return info(v).layout; }
EncodeMode mode_of(Variant v) { return info(v).mode; }

bool uses_topic_samples(Variant v) {
  return layout_of(v) == VectorLayout::kTopics || v == Variant::kAMask ||
         v == Variant::kALast || v == Variant::kAAvg;
}

Eigen::VectorXd aggregate_mentions(std::span<const Eigen::VectorXd> vectors) {
  if (vectors.empty()) throw DataError("cannot aggregate an empty mention list");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(vectors.front().size());
  double scale = 0.0;
  for (const auto& v : vectors) {
    if (v.size() != sum.size()) {
      throw DataError("mention vectors have inconsistent dimensions");
    }
    sum += v;
    scale += v.norm();
  }
  const double norm = sum.norm();
  if (!(norm > 1e-12 * scale)) {
    throw DataError("degenerate aggregate: mention vectors cancel out");
  }
  return sum / norm;
}

std::optional<std::size_t> VariantMatrix::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void VariantMatrix::add(std::string word, RowMatrix rows,
                        std::vector<TopicId> relevant) {
  if (dim == 0) dim = static_cast<std::uint32_t>(rows.cols());
  if (rows.cols() != dim) {
    throw DataError("variant row dimension mismatch for '" + word + "'");
  }
  if (!vectors.empty() && rows.rows() != vectors.front().rows()) {
    throw DataError("variant row count mismatch for '" + word + "'");
  }
  if (!index_.emplace(word, words.size()).second) {
    throw DataError("duplicate word '" + word + "' in variant " + name);
  }
  words.push_back(std::move(word));
  vectors.push_back(std::move(rows));
  if (layout == VectorLayout::kTopics) {
    relevant_topics.push_back(std::move(relevant));
  }
}

std::unordered_map<std::string, WordSamples> group_samples(
    const std::vector<MentionSample>& samples) {
  std::unordered_map<std::string, WordSamples> grouped;
  for (const MentionSample& s : samples) {
    WordSamples& g = grouped[s.word];
    if (s.is_random()) {
      g.random = &s;
    } else {
      g.per_topic.push_back(&s);
    }
  }
  return grouped;
}

Eigen::VectorXd average_topic_vectors(const RowMatrix& rows,
                                      std::span<const TopicId> relevant) {
  if (relevant.empty()) throw DataError("empty relevant topic set");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(rows.cols());
  for (TopicId t : relevant) sum += rows.row(t).transpose();
  const double norm = sum.norm();
  if (!(norm > 0.0)) throw DataError("degenerate aggregate of topic vectors");
  return sum / norm;
}

RowMatrix build_variant(Variant variant, const WordSamples& samples,
                        std::uint32_t num_topics, const VectorStore& store) {
  if (store.mode() != mode_of(variant)) {
    throw DataError(std::string(to_string(variant)) + " needs a " +
                    std::string(to_string(mode_of(variant))) + " store");
  }
  if (uses_topic_samples(variant)) {
    RowMatrix rows = topic_rows(variant, samples, num_topics, store);
    if (layout_of(variant) == VectorLayout::kTopics) return rows;
    return average_topic_vectors(rows, samples.relevant->topics).transpose();
  }

  if (samples.random == nullptr) {
    throw DataError(std::string(to_string(variant)) +
                    " needs a random mention sample");
  }
  if (variant != Variant::kCAll) {
    return aggregate_sample(*samples.random, store, layer_pick(variant))
        .transpose();
  }
  RowMatrix rows(store.layer_count(), store.dim());
  std::vector<Eigen::VectorXd> vectors;
  for (std::uint32_t layer = 0; layer < store.layer_count(); ++layer) {
    vectors.clear();
    for (const Mention& m : samples.random->mentions) {
      vectors.push_back(
          store.at(m.mention_id).layers.row(layer).transpose().cast<double>());
    }
    rows.row(layer) = aggregate_mentions(vectors).transpose();
  }
  return rows;
}

VariantPca pca_reduce_variant(const VariantMatrix& matrix,
                              std::size_t target_dim) {
  std::vector<std::pair<std::size_t, Eigen::Index>> slots;
  for (std::size_t w = 0; w < matrix.size(); ++w) {
    for (Eigen::Index r = 0; r < matrix.vectors[w].rows(); ++r) {
      if (!is_zero_row(matrix.vectors[w], r)) slots.emplace_back(w, r);
    }
  }
  RowMatrix data(static_cast<Eigen::Index>(slots.size()), matrix.dim);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    data.row(static_cast<Eigen::Index>(i)) =
        matrix.vectors[slots[i].first].row(slots[i].second);
  }
  VariantPca out;
  out.model = fit_pca(data, target_dim);
  const RowMatrix projected = out.model.project(data);

  VariantMatrix& reduced = out.reduced;
  reduced.name = matrix.name + "-PCA";
  reduced.layout = matrix.layout;
  reduced.mode = matrix.mode;
  reduced.dim = static_cast<std::uint32_t>(target_dim);
  std::vector<RowMatrix> rows;
  rows.reserve(matrix.size());
  for (const RowMatrix& m : matrix.vectors) {
    rows.push_back(RowMatrix::Zero(m.rows(), reduced.dim));
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    rows[slots[i].first].row(slots[i].second) =
        projected.row(static_cast<Eigen::Index>(i));
  }
  for (std::size_t w = 0; w < matrix.size(); ++w) {
    reduced.add(matrix.words[w], std::move(rows[w]),
                matrix.layout == VectorLayout::kTopics
                    ? matrix.relevant_topics[w]
                    : std::vector<TopicId>{});
  }
  return out;
}

RowMatrix collapse_rows(const VariantMatrix& matrix) {
  RowMatrix out(static_cast<Eigen::Index>(matrix.size()), matrix.dim);
  for (std::size_t w = 0; w < matrix.size(); ++w) {
    const RowMatrix& m = matrix.vectors[w];
    const auto row = static_cast<Eigen::Index>(w);
    if (matrix.layout == VectorLayout::kSingle) {
      out.row(row) = m.row(0);
    } else {
      const Eigen::RowVectorXd sum = m.colwise().sum();
      const double norm = sum.norm();
      if (!(norm > 0.0)) {
        throw DataError("cannot collapse zero vectors of '" + matrix.words[w] +
                        "'");
      }
      out.row(row) = sum / norm;
    }
  }
  return out;
}

std::vector<Neighbor> nearest_neighbors(const Eigen::VectorXd& query,
                                        std::string_view exclude_word,
                                        std::span<const std::string> words,
                                        const RowMatrix& rows, std::size_t k) {
  if (k < 1) throw UsageError("k must be >= 1");
  if (rows.rows() == 0) throw DataError("nearest neighbors over an empty matrix");
  if (static_cast<std::size_t>(rows.rows()) != words.size() ||
      rows.cols() != query.size()) {
    throw DataError("neighbor matrix shape does not match words/query");
  }
  const double qn = query.norm();
  std::vector<Neighbor> all;
  all.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i] == exclude_word) continue;
    const auto r = rows.row(static_cast<Eigen::Index>(i));
    const double denom = qn * r.norm();
    const double cosine = denom > 0.0 ? r.dot(query) / denom : 0.0;
    all.push_back({words[i], cosine});
  }
  const std::size_t top = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(top),
                    all.end(), [](const Neighbor& a, const Neighbor& b) {
                      return a.cosine != b.cosine ? a.cosine > b.cosine
                                                  : a.word < b.word;
                    });
  all.resize(top);
  return all;
}

void write_variant(const VariantMatrix& matrix, std::ostream& store_out,
                   std::ostream& sidecar_out) {
  VectorStore store(matrix.dim, 1, matrix.mode);
  MentionId record = 0;
  for (std::size_t w = 0; w < matrix.size(); ++w) {
    const RowMatrix& m = matrix.vectors[w];
    auto emit = [&](Eigen::Index r, nlohmann::json topic, nlohmann::json layer) {
      store.add(LayerVectors{record, matrix.mode, m.row(r).cast<float>()});
      sidecar_out << nlohmann::ordered_json{{"word", matrix.words[w]},
                                    {"variant", matrix.name},
                                    {"topic_id", std::move(topic)},
                                    {"layer_index", std::move(layer)},
                                    {"record_id", record}}
                         .dump()
                  << '\n';
      ++record;
    };
    switch (matrix.layout) {
      case VectorLayout::kSingle:
        emit(0, nullptr, nullptr);
        break;
      case VectorLayout::kLayers:
        for (Eigen::Index r = 0; r < m.rows(); ++r) emit(r, nullptr, r);
        break;
      case VectorLayout::kTopics:
        for (TopicId t : matrix.relevant_topics[w]) emit(t, t, nullptr);
        break;
    }
  }
  write_store(store, store_out);
}

VariantMatrix read_variant(std::istream& store_in, std::istream& sidecar_in,
                           std::uint32_t num_topics) {
  const VectorStore store = read_store(store_in);
  if (store.layer_count() != 1) {
    throw FormatError("variant stores hold one vector per record");
  }

  struct Row {
    std::string word;
    std::optional<TopicId> topic;
    std::optional<Eigen::Index> layer;
    MentionId record;
  };
  std::vector<Row> rows;
  std::string name;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(sidecar_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto variant = j.at("variant").get<std::string>();
      if (name.empty()) name = variant;
      if (variant != name) {
        throw FormatError("sidecar mixes variants " + name + " and " + variant);
      }
      Row r{j.at("word").get<std::string>(), std::nullopt, std::nullopt,
            j.at("record_id").get<MentionId>()};
      if (!j.at("topic_id").is_null()) r.topic = j["topic_id"].get<TopicId>();
      if (!j.at("layer_index").is_null()) {
        r.layer = j["layer_index"].get<Eigen::Index>();
      }
      rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("variant sidecar line " + std::to_string(line_no) +
                        ": " + e.what());
    }
  }
  if (rows.empty()) throw FormatError("empty variant sidecar");

  VariantMatrix matrix;
  matrix.name = name;
  const Variant base = base_variant(name);
  matrix.layout = layout_of(base);
  matrix.mode = store.mode();
  matrix.dim = store.dim();
  Eigen::Index row_count = 1;
  if (matrix.layout == VectorLayout::kTopics) {
    row_count = num_topics;
  } else if (matrix.layout == VectorLayout::kLayers) {
    row_count = 0;
    for (const Row& r : rows) {
      if (!r.layer) throw FormatError("layered variant row without layer_index");
      row_count = std::max(row_count, *r.layer + 1);
    }
  }

  std::size_t i = 0;
  while (i < rows.size()) {
    const std::string& word = rows[i].word;
    RowMatrix m = RowMatrix::Zero(row_count, matrix.dim);
    std::vector<TopicId> relevant;
    for (; i < rows.size() && rows[i].word == word; ++i) {
      const Row& r = rows[i];
      Eigen::Index slot = 0;
      if (matrix.layout == VectorLayout::kTopics) {
        if (!r.topic || *r.topic >= num_topics) {
          throw FormatError("topic row for '" + word + "' lacks a valid topic_id");
        }
        slot = *r.topic;
        relevant.push_back(*r.topic);
      } else if (matrix.layout == VectorLayout::kLayers) {
        slot = *r.layer;
      }
      m.row(slot) = store.at(r.record).layers.row(0).cast<double>();
    }
    matrix.add(word, std::move(m), std::move(relevant));
  }
  return matrix;
}

void write_coordinates_tsv(const VariantMatrix& matrix, std::ostream& out) {
  const VariantPca pca = pca_reduce_variant(matrix, 2);
  out << "word\ttopic_id\tlayer_index\tx\ty\n";
  for (std::size_t w = 0; w < matrix.size(); ++w) {
    const RowMatrix& m = matrix.vectors[w];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (is_zero_row(m, r)) continue;
      const auto& xy = pca.reduced.vectors[w].row(r);
      out << matrix.words[w] << '\t';
      if (matrix.layout == VectorLayout::kTopics) out << r;
      out << '\t';
      if (matrix.layout == VectorLayout::kLayers) out << r;
      out << '\t' << xy[0] << '\t' << xy[1] << '\n';
    }
  }
}

void write_neighbors_tsv(const VariantMatrix& matrix,
                         std::span<const std::string> query_words,
                         std::size_t k, std::ostream& out) {
  const RowMatrix collapsed = collapse_rows(matrix);
  out << "query\ttopic_id\tlayer_index\trank\tneighbor\tcosine\n";
  for (const std::string& q : query_words) {
    const auto w = matrix.find(q);
    if (!w) throw DataError("query word '" + q + "' not in " + matrix.name);
    const RowMatrix& m = matrix.vectors[*w];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (is_zero_row(m, r)) continue;
      const auto ranked =
          nearest_neighbors(m.row(r).transpose(), q, matrix.words, collapsed, k);
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        out << q << '\t';
        if (matrix.layout == VectorLayout::kTopics) out << r;
        out << '\t';
        if (matrix.layout == VectorLayout::kLayers) out << r;
        out << '\t' << i + 1 << '\t' << ranked[i].word << '\t'
            << ranked[i].cosine << '\n';
      }
    }
  }
}

}  // namespace topicvec

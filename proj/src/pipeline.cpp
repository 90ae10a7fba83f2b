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

#include "topicvec/pipeline.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "topicvec/error.hpp"
#include "topicvec/probe.hpp"

namespace topicvec {
namespace {

namespace fs = std::filesystem;

constexpr std::array<std::string_view, 11> kStageNames = {
    "ingest", "lda",   "topics", "select", "manifest", "encode",
    "aggregate", "pca", "train",  "eval",   "neighbors"};

std::ifstream open_in(const fs::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw DataError("cannot read " + path.string());
  return in;
}

std::string variant_file(std::string_view variant, std::string_view ext) {
  return "variants/" + std::string(variant) + std::string(ext);
}

std::string mode_slug(EncodeMode mode) {
  return mode == EncodeMode::kMasked ? "masked" : "unmasked";
}

std::string store_file(EncodeMode mode) {
  return "store_" + mode_slug(mode) + ".cvs";
}

std::string manifest_file(EncodeMode mode) {
  return "manifest_" + mode_slug(mode) + ".jsonl";
}

struct SampleNeeds {
  bool random = false;
  bool topics = false;
};

SampleNeeds sample_needs(const std::vector<std::string>& variants,
                         std::optional<EncodeMode> mode) {
  SampleNeeds needs;
  for (const auto& name : variants) {
    const Variant v = parse_variant(name);
    if (mode && mode_of(v) != *mode) continue;
    (uses_topic_samples(v) ? needs.topics : needs.random) = true;
  }
  return needs;
}

std::vector<EncodeMode> needed_modes(const std::vector<std::string>& variants) {
  std::vector<EncodeMode> modes;
  for (EncodeMode m : {EncodeMode::kUnmasked, EncodeMode::kMasked}) {
    const SampleNeeds n = sample_needs(variants, m);
    if (n.random || n.topics) modes.push_back(m);
  }
  return modes;
}

std::vector<RelevantTopics> only_relevant(
    std::vector<std::pair<WordTopicImportance, RelevantTopics>> rows) {
  std::vector<RelevantTopics> out;
  out.reserve(rows.size());
  for (auto& [tau, rel] : rows) out.push_back(std::move(rel));
  return out;
}

}  // namespace

std::string_view to_string(Stage stage) {
  return kStageNames[static_cast<std::size_t>(stage)];
}

Stage parse_stage(std::string_view name) {
  for (std::size_t i = 0; i < kStageNames.size(); ++i) {
    if (kStageNames[i] == name) return static_cast<Stage>(i);
  }
  throw UsageError("unknown stage '" + std::string(name) + "'");
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = {
      Stage::kIngest,    Stage::kLda, Stage::kTopics, Stage::kSelect,
      Stage::kManifest,  Stage::kEncode, Stage::kAggregate, Stage::kPca,
      Stage::kTrain,     Stage::kEval, Stage::kNeighbors};
  return stages;
}

std::uint64_t word_seed(std::uint64_t seed, std::string_view word) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : word) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<MentionSample> draw_samples(
    const MentionIndex& index, const TopicModel* model,
    const std::vector<RelevantTopics>& relevant, bool random_samples,
    bool topic_samples, std::size_t n_random, std::size_t n_per_topic,
    std::uint64_t seed) {
  if (topic_samples && model == nullptr) {
    throw DataError("topic samples need a topic model");
  }
  std::vector<MentionSample> out;
  for (const RelevantTopics& rel : relevant) {
    if (random_samples) {
      out.push_back(select_random_mentions(index, rel.word, n_random,
                                           word_seed(seed, rel.word)));
    }
    if (topic_samples) {
      for (TopicId t : rel.topics) {
        out.push_back(
            select_topic_mentions(index, *model, rel.word, t, n_per_topic));
      }
    }
  }
  return out;
}

VectorStore encode_manifest(const std::vector<ManifestEntry>& entries,
                            EncodeMode mode, const ContextEncoder& encoder) {
  VectorStore store(encoder.dim(), encoder.layer_count(mode), mode);
  for (const ManifestEntry& e : entries) {
    if (e.mode != mode) {
      throw DataError("manifest entry " + std::to_string(e.mention_id) +
                      " has mode " + std::string(to_string(e.mode)));
    }
    if (store.contains(e.mention_id)) continue;
    store.add(encoder.encode(e.request()));
  }
  return store;
}

VariantMatrix build_variant_matrix(
    Variant variant, const std::vector<std::string>& words,
    const std::vector<MentionSample>& samples,
    const std::vector<RelevantTopics>& relevant, std::uint32_t num_topics,
    const VectorStore& store) {
  auto grouped = group_samples(samples);
  std::map<std::string, const RelevantTopics*, std::less<>> rel_by_word;
  for (const RelevantTopics& r : relevant) rel_by_word.emplace(r.word, &r);

  VariantMatrix matrix;
  matrix.name = std::string(to_string(variant));
  matrix.layout = layout_of(variant);
  matrix.mode = mode_of(variant);
  matrix.dim = store.dim();
  for (const std::string& word : words) {
    auto it = grouped.find(word);
    if (it == grouped.end()) {
      throw DataError("no samples for '" + word + "'");
    }
    WordSamples ws = it->second;
    if (auto r = rel_by_word.find(word); r != rel_by_word.end()) {
      ws.relevant = r->second;
    }
    RowMatrix rows = build_variant(variant, ws, num_topics, store);
    std::vector<TopicId> topics;
    if (matrix.layout == VectorLayout::kTopics) topics = ws.relevant->topics;
    matrix.add(word, std::move(rows), std::move(topics));
  }
  return matrix;
}

void write_atomic(const fs::path& path,
                  const std::function<void(std::ostream&)>& writer) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    writer(out);
    out.flush();
    if (!out) {
      fs::remove(tmp);
      throw DataError("failed writing " + path.string());
    }
  }
  fs::rename(tmp, path);
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
  config_.validate();
  hash_ = config_.hash();
  run_dir_ = config_.output_dir / hash_.substr(0, 16);
  fs::create_directories(run_dir_);

  nlohmann::json inputs{{"corpus", sha256_file(config_.corpus)}};
  if (!config_.dataset.empty()) inputs["dataset"] = sha256_file(config_.dataset);
  if (!config_.split_file.empty()) {
    inputs["split_file"] = sha256_file(config_.split_file);
  }
  if (!config_.store_masked.empty()) {
    inputs["store_masked"] = sha256_file(config_.store_masked);
  }
  if (!config_.store_unmasked.empty()) {
    inputs["store_unmasked"] = sha256_file(config_.store_unmasked);
  }

  const fs::path manifest_path = run_dir_ / "run_manifest.json";
  nlohmann::json manifest;
  if (fs::exists(manifest_path)) {
    auto in = open_in(manifest_path);
    try {
      manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("run manifest: " + std::string(e.what()));
    }
    if (manifest.value("config_hash", "") != hash_) {
      throw UsageError("refusing to overwrite artifacts in " + run_dir_.string() +
                       " produced under config hash " +
                       manifest.value("config_hash", "?"));
    }
    if (manifest.value("inputs", nlohmann::json::object()) != inputs) {
      throw DataError("input files changed since the artifacts in " +
                      run_dir_.string() +
                      " were produced; use a fresh output_dir");
    }
  } else {
    manifest = {{"config_hash", hash_},
                {"config", config_.canonical()},
                {"inputs", inputs},
                {"stages", nlohmann::json::object()}};
    write_atomic(manifest_path,
                 [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
  }
}

fs::path Pipeline::artifact(std::string_view name) const {
  return run_dir_ / fs::path(std::string(name));
}

void Pipeline::require(std::string_view artifact_name,
                       std::string_view description, Stage producer) const {
  if (!fs::exists(artifact(artifact_name))) {
    throw DependencyError("requires artifact: " + std::string(description) +
                          " (run `" + std::string(to_string(producer)) +
                          "` first)");
  }
}

void Pipeline::record_stage(Stage stage,
                            const std::vector<std::string>& outputs) {
  const fs::path path = run_dir_ / "run_manifest.json";
  nlohmann::json manifest;
  {
    auto in = open_in(path);
    manifest = nlohmann::json::parse(in);
  }
  nlohmann::json files = nlohmann::json::object();
  for (const std::string& o : outputs) files[o] = sha256_file(artifact(o));
  manifest["stages"][std::string(to_string(stage))] = {{"outputs", files}};
  write_atomic(path, [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

std::vector<std::string> Pipeline::target_words(const MentionIndex& index) const {
  std::vector<std::string> words;
  if (config_.dataset.empty()) {
    for (const auto& [word, list] : index.postings()) words.push_back(word);
    return words;
  }
  auto in = open_in(config_.dataset);
  std::set<std::string> unique;
  std::string line;
  std::size_t missing = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string word = line.substr(0, line.find('\t'));
    if (!index.contains(word)) {
      ++missing;
      continue;
    }
    unique.insert(std::move(word));
  }
  if (missing > 0) {
    spdlog::warn("{} dataset words are below min_count or absent from the corpus",
                 missing);
  }
  if (unique.empty()) throw DataError("no dataset word occurs in the vocabulary");
  return {unique.begin(), unique.end()};
}

void Pipeline::run(Stage stage) {
  spdlog::info("stage {} -> {}", to_string(stage), run_dir_.string());
  switch (stage) {
    case Stage::kIngest: return ingest();
    case Stage::kLda: return lda();
    case Stage::kTopics: return topics();
    case Stage::kSelect: return select();
    case Stage::kManifest: return manifest();
    case Stage::kEncode: return encode();
    case Stage::kAggregate: return aggregate();
    case Stage::kPca: return pca();
    case Stage::kTrain: return train();
    case Stage::kEval: return eval();
    case Stage::kNeighbors: return neighbors();
  }
}

void Pipeline::ingest() {
  const CorpusStore store = ingest_corpus(config_.corpus);
  const Vocabulary vocab = build_vocabulary(store, config_.min_count);
  const MentionIndex index = build_mention_index(store, vocab);
  spdlog::info("{} documents, {} tokens, {} vocabulary words, {} mentions",
               store.size(), store.token_count(), vocab.entries.size(),
               index.mention_count());
  write_atomic(artifact("corpus.jsonl"),
               [&](std::ostream& out) { write_corpus_jsonl(store, out); });
  write_atomic(artifact("vocabulary.tsv"), [&](std::ostream& out) {
    for (const auto& [word, n] : vocab.entries) out << word << '\t' << n << '\n';
  });
  write_atomic(artifact("mention_index.jsonl"),
               [&](std::ostream& out) { write_mention_index_jsonl(index, out); });
  record_stage(Stage::kIngest,
               {"corpus.jsonl", "vocabulary.tsv", "mention_index.jsonl"});
}

void Pipeline::lda() {
  require("corpus.jsonl", "tokenized corpus", Stage::kIngest);
  auto in = open_in(artifact("corpus.jsonl"));
  const CorpusStore store = read_corpus_jsonl(in);
  LdaOptions options;
  options.num_topics = config_.lda_topics;
  options.alpha = config_.lda_alpha;
  options.beta = config_.lda_beta;
  options.iterations = config_.lda_iterations;
  options.seed = config_.lda_seed;
  options.drop_most_frequent = config_.lda_drop_top;
  options.min_token_count = config_.lda_min_token_count;
  const TopicModel model = fit_lda(store, options);
  spdlog::info("LDA: K={}, V={}, {} sweeps", model.num_topics,
               model.vocab.size(), model.iterations);
  write_atomic(artifact("topic_model.bin"),
               [&](std::ostream& out) { write_topic_model(model, out); });
  write_atomic(artifact("topic_summaries.json"), [&](std::ostream& out) {
    out << topic_summaries(model).dump(2) << '\n';
  });
  record_stage(Stage::kLda, {"topic_model.bin", "topic_summaries.json"});
}

void Pipeline::topics() {
  require("mention_index.jsonl", "mention index", Stage::kIngest);
  require("topic_model.bin", "topic model", Stage::kLda);
  auto index_in = open_in(artifact("mention_index.jsonl"));
  const MentionIndex index = read_mention_index_jsonl(index_in);
  auto model_in = open_in(artifact("topic_model.bin"), true);
  const TopicModel model = read_topic_model(model_in);

  std::vector<std::pair<WordTopicImportance, RelevantTopics>> rows;
  for (const std::string& word : target_words(index)) {
    WordTopicImportance tau = word_topic_importance(model, index, word);
    RelevantTopics rel =
        select_relevant_topics(tau, config_.threshold, config_.max_topics);
    rows.emplace_back(std::move(tau), std::move(rel));
  }
  write_atomic(artifact("relevant_topics.jsonl"), [&](std::ostream& out) {
    write_relevant_topics_jsonl(rows, out);
  });
  record_stage(Stage::kTopics, {"relevant_topics.jsonl"});
}

void Pipeline::select() {
  require("mention_index.jsonl", "mention index", Stage::kIngest);
  require("topic_model.bin", "topic model", Stage::kLda);
  require("relevant_topics.jsonl", "relevant topics", Stage::kTopics);
  auto index_in = open_in(artifact("mention_index.jsonl"));
  const MentionIndex index = read_mention_index_jsonl(index_in);
  auto model_in = open_in(artifact("topic_model.bin"), true);
  const TopicModel model = read_topic_model(model_in);
  auto rel_in = open_in(artifact("relevant_topics.jsonl"));
  const auto relevant = only_relevant(read_relevant_topics_jsonl(rel_in));

  const SampleNeeds needs = sample_needs(config_.variants, std::nullopt);
  const auto samples =
      draw_samples(index, &model, relevant, needs.random, needs.topics,
                   config_.n_random, config_.n_per_topic, config_.sample_seed);
  write_atomic(artifact("samples.jsonl"),
               [&](std::ostream& out) { write_samples_jsonl(samples, out); });
  record_stage(Stage::kSelect, {"samples.jsonl"});
}

void Pipeline::manifest() {
  require("corpus.jsonl", "tokenized corpus", Stage::kIngest);
  require("mention_index.jsonl", "mention index", Stage::kIngest);
  require("samples.jsonl", "mention samples", Stage::kSelect);
  auto corpus_in = open_in(artifact("corpus.jsonl"));
  const CorpusStore store = read_corpus_jsonl(corpus_in);
  auto index_in = open_in(artifact("mention_index.jsonl"));
  const MentionIndex index = read_mention_index_jsonl(index_in);
  auto samples_in = open_in(artifact("samples.jsonl"));
  const auto samples = read_samples_jsonl(samples_in, index);

  std::vector<std::string> outputs;
  for (EncodeMode mode : needed_modes(config_.variants)) {
    const SampleNeeds needs = sample_needs(config_.variants, mode);
    std::vector<MentionSample> chosen;
    for (const MentionSample& s : samples) {
      if (s.is_random() ? needs.random : needs.topics) chosen.push_back(s);
    }
    const std::string name = manifest_file(mode);
    write_atomic(artifact(name), [&](std::ostream& out) {
      const std::size_t lines = emit_manifest(chosen, store, mode, out);
      spdlog::info("{}: {} lines", name, lines);
    });
    outputs.push_back(name);
  }
  record_stage(Stage::kManifest, outputs);
}

void Pipeline::encode() {
  std::vector<std::string> outputs;
  for (EncodeMode mode : needed_modes(config_.variants)) {
    require(manifest_file(mode),
            std::string(to_string(mode)) + " mention manifest", Stage::kManifest);
    auto in = open_in(artifact(manifest_file(mode)));
    const auto entries = read_manifest(in);

    VectorStore store(1, 1, mode);
    if (config_.encoder == "reference") {
      const ReferenceEncoder encoder(config_.encoder_seed,
                                     config_.encoder_layers, config_.encoder_dim);
      store = encode_manifest(entries, mode, encoder);
    } else {
      const fs::path& source = mode == EncodeMode::kMasked
                                   ? config_.store_masked
                                   : config_.store_unmasked;
      if (source.empty()) {
        throw UsageError("encoder=store needs store_" +
                         std::string(to_string(mode)));
      }
      auto store_in = open_in(source, true);
      const VectorStore external = read_store(store_in);
      if (external.mode() != mode) {
        throw DataError(source.string() + " is not a " +
                        std::string(to_string(mode)) + " store");
      }
      store = VectorStore(external.dim(), external.layer_count(), mode);
      for (const ManifestEntry& e : entries) {
        if (!store.contains(e.mention_id)) store.add(external.at(e.mention_id));
      }
    }
    spdlog::info("{} store: {} records, {} layers x {} dims",
                 to_string(mode), store.size(), store.layer_count(), store.dim());
    write_atomic(artifact(store_file(mode)),
                 [&](std::ostream& out) { write_store(store, out); });
    outputs.push_back(store_file(mode));
  }
  record_stage(Stage::kEncode, outputs);
}

void Pipeline::aggregate() {
  require("mention_index.jsonl", "mention index", Stage::kIngest);
  require("topic_model.bin", "topic model", Stage::kLda);
  require("relevant_topics.jsonl", "relevant topics", Stage::kTopics);
  require("samples.jsonl", "mention samples", Stage::kSelect);
  for (EncodeMode mode : needed_modes(config_.variants)) {
    require(store_file(mode), std::string(to_string(mode)) + " vector store",
            Stage::kEncode);
  }
  auto index_in = open_in(artifact("mention_index.jsonl"));
  const MentionIndex index = read_mention_index_jsonl(index_in);
  auto model_in = open_in(artifact("topic_model.bin"), true);
  const TopicModel model = read_topic_model(model_in);
  auto rel_in = open_in(artifact("relevant_topics.jsonl"));
  const auto relevant = only_relevant(read_relevant_topics_jsonl(rel_in));
  auto samples_in = open_in(artifact("samples.jsonl"));
  const auto samples = read_samples_jsonl(samples_in, index);

  std::vector<std::string> words;
  for (const RelevantTopics& r : relevant) words.push_back(r.word);

  std::map<EncodeMode, VectorStore> stores;
  for (EncodeMode mode : needed_modes(config_.variants)) {
    auto in = open_in(artifact(store_file(mode)), true);
    stores.emplace(mode, read_store(in));
  }

  std::vector<std::string> outputs;
  for (const std::string& name : config_.variants) {
    const Variant v = parse_variant(name);
    const VariantMatrix matrix =
        build_variant_matrix(v, words, samples, relevant, model.num_topics,
                             stores.at(mode_of(v)));
    const std::string cvs = variant_file(name, ".cvs");
    const std::string sidecar = variant_file(name, ".jsonl");
    std::ostringstream sidecar_text;
    write_atomic(artifact(cvs), [&](std::ostream& out) {
      write_variant(matrix, out, sidecar_text);
    });
    write_atomic(artifact(sidecar),
                 [&](std::ostream& out) { out << sidecar_text.str(); });
    outputs.push_back(cvs);
    outputs.push_back(sidecar);
  }
  record_stage(Stage::kAggregate, outputs);
}

void Pipeline::pca() {
  require("topic_model.bin", "topic model", Stage::kLda);
  auto model_in = open_in(artifact("topic_model.bin"), true);
  const TopicModel model = read_topic_model(model_in);
  std::vector<std::string> outputs;
  for (const std::string& name : config_.pca_variants) {
    require(variant_file(name, ".cvs"), name + " vectors", Stage::kAggregate);
    auto store_in = open_in(artifact(variant_file(name, ".cvs")), true);
    auto sidecar_in = open_in(artifact(variant_file(name, ".jsonl")));
    const VariantMatrix matrix =
        read_variant(store_in, sidecar_in, model.num_topics);
    const VariantPca reduced = pca_reduce_variant(matrix, config_.pca_dim);

    const std::string reduced_name = name + "-PCA";
    std::ostringstream sidecar_text;
    write_atomic(artifact(variant_file(reduced_name, ".cvs")),
                 [&](std::ostream& out) {
                   write_variant(reduced.reduced, out, sidecar_text);
                 });
    write_atomic(artifact(variant_file(reduced_name, ".jsonl")),
                 [&](std::ostream& out) { out << sidecar_text.str(); });
    const PcaModel& pm = reduced.model;
    write_atomic(artifact("pca/" + name + ".json"), [&](std::ostream& out) {
      out << nlohmann::json{{"variant", name},
                            {"input_dim", pm.input_dim()},
                            {"output_dim", pm.output_dim()},
                            {"eigenvalues", std::vector<double>(
                                                pm.eigenvalues.begin(),
                                                pm.eigenvalues.end())},
                            {"explained_variance", pm.explained_variance()}}
                 .dump(2)
          << '\n';
    });
    outputs.push_back(variant_file(reduced_name, ".cvs"));
    outputs.push_back(variant_file(reduced_name, ".jsonl"));
    outputs.push_back("pca/" + name + ".json");
  }
  record_stage(Stage::kPca, outputs);
}

void Pipeline::train() {
  if (config_.dataset.empty()) {
    throw UsageError("the train stage needs a dataset");
  }
  require("topic_model.bin", "topic model", Stage::kLda);
  for (const std::string& name : config_.probe_variants()) {
    require(variant_file(name, ".cvs"), name + " vectors",
            name.ends_with("-PCA") ? Stage::kPca : Stage::kAggregate);
  }
  auto model_in = open_in(artifact("topic_model.bin"), true);
  const TopicModel model = read_topic_model(model_in);

  Grid grid{config_.grid_batch, config_.grid_lr};
  TrainConfig base;
  base.max_epochs = config_.max_epochs;
  base.patience = config_.patience;
  base.weight_decay = config_.weight_decay;
  base.seed = config_.probe_seed;

  std::vector<std::string> outputs;
  for (const std::string& name : config_.probe_variants()) {
    auto store_in = open_in(artifact(variant_file(name, ".cvs")), true);
    auto sidecar_in = open_in(artifact(variant_file(name, ".jsonl")));
    const VariantMatrix vectors =
        read_variant(store_in, sidecar_in, model.num_topics);

    auto tsv = open_in(config_.dataset);
    std::ifstream split;
    if (!config_.split_file.empty()) split = open_in(config_.split_file);
    PropertyDataset dataset = load_property_dataset(
        tsv, config_.min_positives, SplitSpec{}, config_.split_seed,
        config_.split_file.empty() ? nullptr : &split);
    dataset.restrict_to(vectors);

    const EvaluationReport report =
        tune_and_evaluate(dataset, vectors, grid, base);
    spdlog::info("{}: test macro-F1 {:.4f}", name, report.macro_f1);

    nlohmann::json probes = nlohmann::json::array();
    for (const auto& [property, result] : report.per_property) {
      probes.push_back(probe_to_json(property, result));
    }
    const std::string probe_path = "probes/" + name + ".json";
    const std::string pred_path = "predictions/" + name + ".jsonl";
    write_atomic(artifact(probe_path), [&](std::ostream& out) {
      out << nlohmann::json{{"variant", name},
                            {"layout", static_cast<int>(vectors.layout)},
                            {"probes", probes}}
                 .dump()
          << '\n';
    });
    write_atomic(artifact(pred_path), [&](std::ostream& out) {
      write_predictions_jsonl(report.predictions, out);
    });
    outputs.push_back(probe_path);
    outputs.push_back(pred_path);
  }
  record_stage(Stage::kTrain, outputs);
}

void Pipeline::eval() {
  std::vector<std::string> outputs;
  for (const std::string& name : config_.probe_variants()) {
    const std::string probe_path = "probes/" + name + ".json";
    const std::string pred_path = "predictions/" + name + ".jsonl";
    require(probe_path, name + " probes", Stage::kTrain);
    require(pred_path, name + " test predictions", Stage::kTrain);
    auto probe_in = open_in(artifact(probe_path));
    const auto probes = nlohmann::json::parse(probe_in);
    auto pred_in = open_in(artifact(pred_path));
    const auto predictions = read_predictions_jsonl(pred_in);

    EvaluationReport report;
    report.variant = name;
    std::map<std::string, std::vector<Prediction>> by_property;
    for (const Prediction& p : predictions) by_property[p.property].push_back(p);
    for (const auto& probe : probes.at("probes")) {
      const auto property = probe.at("property").get<std::string>();
      PropertyResult r;
      r.best_lr = probe.at("best_lr").get<double>();
      r.best_batch = probe.at("best_batch").get<std::size_t>();
      r.dev_f1 = probe.at("dev_f1").get<double>();
      r.f1 = macro_f1_from_predictions(by_property[property]);
      report.per_property.emplace(property, std::move(r));
    }
    report.macro_f1 = macro_f1_from_predictions(predictions);
    const std::string report_path = "reports/" + name + ".json";
    write_atomic(artifact(report_path), [&](std::ostream& out) {
      out << report_to_json(report).dump(2) << '\n';
    });
    spdlog::info("{}: macro-F1 {:.4f}", name, report.macro_f1);
    outputs.push_back(report_path);
  }
  record_stage(Stage::kEval, outputs);
}

void Pipeline::neighbors() {
  require("topic_model.bin", "topic model", Stage::kLda);
  auto model_in = open_in(artifact("topic_model.bin"), true);
  const TopicModel model = read_topic_model(model_in);
  std::vector<std::string> outputs;
  for (const std::string& name : config_.probe_variants()) {
    require(variant_file(name, ".cvs"), name + " vectors",
            name.ends_with("-PCA") ? Stage::kPca : Stage::kAggregate);
    auto store_in = open_in(artifact(variant_file(name, ".cvs")), true);
    auto sidecar_in = open_in(artifact(variant_file(name, ".jsonl")));
    const VariantMatrix matrix =
        read_variant(store_in, sidecar_in, model.num_topics);
    std::vector<std::string> queries = config_.neighbor_words;
    if (queries.empty()) queries = matrix.words;

    const std::string nn_path = "neighbors/" + name + ".tsv";
    const std::string xy_path = "coords/" + name + ".tsv";
    write_atomic(artifact(nn_path), [&](std::ostream& out) {
      write_neighbors_tsv(matrix, queries, config_.neighbor_k, out);
    });
    write_atomic(artifact(xy_path),
                 [&](std::ostream& out) { write_coordinates_tsv(matrix, out); });
    outputs.push_back(nn_path);
    outputs.push_back(xy_path);
  }
  record_stage(Stage::kNeighbors, outputs);
}

}  // namespace topicvec

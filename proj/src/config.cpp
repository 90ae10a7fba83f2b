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

#include "topicvec/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "topicvec/aggregate.hpp"
#include "topicvec/error.hpp"

namespace topicvec {
namespace {

std::string_view trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw UsageError("invalid value for " + std::string(key) + ": '" +
                     std::string(value) + "'");
  }
  return out;
}

template <typename T>
std::string format_number(T value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    const auto item = trim(value.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
std::string join_list(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ',';
    if constexpr (std::is_same_v<T, std::string>) {
      out += item;
    } else {
      out += format_number(item);
    }
  }
  return out;
}

std::filesystem::path resolve(std::string_view value,
                              const std::filesystem::path& base_dir) {
  if (value.empty()) return {};
  std::filesystem::path p{std::string(value)};
  if (p.is_relative()) p = base_dir / p;
  return p.lexically_normal();
}

struct Field {
  std::function<void(PipelineConfig&, std::string_view,
                     const std::filesystem::path&)>
      set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <typename T>
Field number_field(T PipelineConfig::*member, std::string_view key) {
  return {[member, key](PipelineConfig& c, std::string_view v,
                        const std::filesystem::path&) {
            c.*member = parse_number<T>(key, v);
          },
          [member](const PipelineConfig& c) { return format_number(c.*member); }};
}

Field path_field(std::filesystem::path PipelineConfig::*member) {
  return {[member](PipelineConfig& c, std::string_view v,
                   const std::filesystem::path& base) {
            c.*member = resolve(v, base);
          },
          [member](const PipelineConfig& c) { return (c.*member).string(); }};
}

Field list_field(std::vector<std::string> PipelineConfig::*member) {
  return {[member](PipelineConfig& c, std::string_view v,
                   const std::filesystem::path&) { c.*member = split_list(v); },
          [member](const PipelineConfig& c) { return join_list(c.*member); }};
}

template <typename T>
Field number_list_field(std::vector<T> PipelineConfig::*member,
                        std::string_view key) {
  return {[member, key](PipelineConfig& c, std::string_view v,
                        const std::filesystem::path&) {
            std::vector<T> out;
            for (const auto& item : split_list(v)) {
              out.push_back(parse_number<T>(key, item));
            }
            c.*member = std::move(out);
          },
          [member](const PipelineConfig& c) { return join_list(c.*member); }};
}

const std::map<std::string, Field, std::less<>>& fields() {
  using C = PipelineConfig;
  static const std::map<std::string, Field, std::less<>> table = {
      {"corpus", path_field(&C::corpus)},
      {"dataset", path_field(&C::dataset)},
      {"split_file", path_field(&C::split_file)},
      {"output_dir", path_field(&C::output_dir)},
      {"min_count", number_field(&C::min_count, "min_count")},
      {"lda_topics", number_field(&C::lda_topics, "lda_topics")},
      {"lda_alpha", number_field(&C::lda_alpha, "lda_alpha")},
      {"lda_beta", number_field(&C::lda_beta, "lda_beta")},
      {"lda_iterations", number_field(&C::lda_iterations, "lda_iterations")},
      {"lda_drop_top", number_field(&C::lda_drop_top, "lda_drop_top")},
      {"lda_min_token_count",
       number_field(&C::lda_min_token_count, "lda_min_token_count")},
      {"lda_seed", number_field(&C::lda_seed, "lda_seed")},
      {"threshold", number_field(&C::threshold, "threshold")},
      {"max_topics", number_field(&C::max_topics, "max_topics")},
      {"n_random", number_field(&C::n_random, "n_random")},
      {"n_per_topic", number_field(&C::n_per_topic, "n_per_topic")},
      {"sample_seed", number_field(&C::sample_seed, "sample_seed")},
      {"encoder",
       {[](C& c, std::string_view v, const std::filesystem::path&) {
          c.encoder = std::string(v);
        },
        [](const C& c) { return c.encoder; }}},
      {"store_masked", path_field(&C::store_masked)},
      {"store_unmasked", path_field(&C::store_unmasked)},
      {"encoder_layers", number_field(&C::encoder_layers, "encoder_layers")},
      {"encoder_dim", number_field(&C::encoder_dim, "encoder_dim")},
      {"encoder_seed", number_field(&C::encoder_seed, "encoder_seed")},
      {"variants", list_field(&C::variants)},
      {"pca_variants", list_field(&C::pca_variants)},
      {"pca_dim", number_field(&C::pca_dim, "pca_dim")},
      {"min_positives", number_field(&C::min_positives, "min_positives")},
      {"split_seed", number_field(&C::split_seed, "split_seed")},
      {"grid_batch", number_list_field(&C::grid_batch, "grid_batch")},
      {"grid_lr", number_list_field(&C::grid_lr, "grid_lr")},
      {"max_epochs", number_field(&C::max_epochs, "max_epochs")},
      {"patience", number_field(&C::patience, "patience")},
      {"weight_decay", number_field(&C::weight_decay, "weight_decay")},
      {"probe_seed", number_field(&C::probe_seed, "probe_seed")},
      {"neighbor_k", number_field(&C::neighbor_k, "neighbor_k")},
      {"neighbor_words", list_field(&C::neighbor_words)},
  };
  return table;
}

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view value,
                         const std::filesystem::path& base_dir) {
  auto it = fields().find(trim(key));
  if (it == fields().end()) {
    throw UsageError("unknown config key '" + std::string(key) + "'");
  }
  it->second.set(*this, trim(value), base_dir);
}

std::map<std::string, std::string> PipelineConfig::canonical() const {
  std::map<std::string, std::string> out;
  for (const auto& [key, field] : fields()) out.emplace(key, field.get(*this));
  return out;
}

std::string PipelineConfig::hash() const {
  std::string text;
  for (const auto& [key, value] : canonical()) {
    text += key;
    text += '=';
    text += value;
    text += '\n';
  }
  return sha256_hex(text);
}

void PipelineConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError("config: " + what);
  };
  require(!corpus.empty(), "corpus is required");
  require(std::filesystem::is_regular_file(corpus),
          "corpus file not found: " + corpus.string());
  require(dataset.empty() || std::filesystem::is_regular_file(dataset),
          "dataset file not found: " + dataset.string());
  require(split_file.empty() || std::filesystem::is_regular_file(split_file),
          "split file not found: " + split_file.string());
  require(!output_dir.empty(), "output_dir is required");
  require(min_count >= 1, "min_count must be >= 1");
  require(lda_topics >= 2, "lda_topics must be >= 2");
  require(lda_alpha > 0.0, "lda_alpha must be > 0");
  require(lda_beta >= 0.0, "lda_beta must be >= 0 (0 selects 1/K)");
  require(lda_iterations >= 1, "lda_iterations must be >= 1");
  require(threshold > 0.0 && threshold <= 1.0, "threshold must lie in (0, 1]");
  require(max_topics >= 1, "max_topics must be >= 1");
  require(n_random >= 1 && n_per_topic >= 1, "sample sizes must be >= 1");
  require(encoder == "reference" || encoder == "store",
          "encoder must be 'reference' or 'store'");
  if (encoder == "store") {
    require(!store_masked.empty() || !store_unmasked.empty(),
            "encoder=store needs store_masked and/or store_unmasked");
    for (const auto* p : {&store_masked, &store_unmasked}) {
      require(p->empty() || std::filesystem::is_regular_file(*p),
              "vector store not found: " + p->string());
    }
  }
  require(encoder_layers >= 1 && encoder_dim >= 1,
          "encoder_layers and encoder_dim must be >= 1");
  require(!variants.empty(), "variants must not be empty");
  for (const auto& v : variants) parse_variant(v);
  for (const auto& v : pca_variants) {
    parse_variant(v);
    require(std::find(variants.begin(), variants.end(), v) != variants.end(),
            "pca variant " + v + " is not listed in variants");
  }
  require(pca_dim >= 1, "pca_dim must be >= 1");
  require(!grid_batch.empty() && !grid_lr.empty(), "grid must not be empty");
  for (auto b : grid_batch) require(b >= 1, "grid batch sizes must be >= 1");
  for (auto lr : grid_lr) require(lr > 0.0, "grid learning rates must be > 0");
  require(max_epochs >= 1 && patience >= 1, "max_epochs and patience >= 1");
  require(weight_decay >= 0.0, "weight_decay must be >= 0");
  require(neighbor_k >= 1, "neighbor_k must be >= 1");
}

std::vector<std::string> PipelineConfig::probe_variants() const {
  std::vector<std::string> out = variants;
  for (const auto& v : pca_variants) out.push_back(v + "-PCA");
  return out;
}

PipelineConfig parse_config(std::string_view text,
                            const std::filesystem::path& base_dir) {
  PipelineConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_no) +
                       ": expected key=value");
    }
    config.set(line.substr(0, eq), line.substr(eq + 1), base_dir);
  }
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto base = std::filesystem::absolute(path).parent_path();
  return parse_config(buffer.str(), base);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw DataError("sha256 failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0')
        << static_cast<int>(digest[i]);
  }
  return out.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return sha256_hex(buffer.str());
}

}  // namespace topicvec

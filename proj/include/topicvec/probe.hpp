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
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "topicvec/aggregate.hpp"

namespace topicvec {

// lambda = softmax(a) over all k inputs.
struct LayerCombiner {
  Eigen::VectorXd a;

  Eigen::VectorXd weights() const;
};

// mu^w = softmax(b) restricted to the word's relevant topics; exactly zero
// elsewhere. b is shared by every word of a probe.
struct TopicCombiner {
  Eigen::VectorXd b;

  Eigen::VectorXd weights(std::span<const TopicId> relevant) const;
};

// Normalized weighted sums. Both throw DataError on a zero weighted sum.
Eigen::VectorXd combine_layers(const RowMatrix& vectors,
                               const LayerCombiner& combiner);
Eigen::VectorXd combine_topics(const RowMatrix& topic_vectors,
                               std::span<const TopicId> relevant,
                               const TopicCombiner& combiner);

// One word as seen by a probe: its rows plus, for topic layouts, the active
// topic set.
struct ProbeInput {
  RowMatrix rows;
  std::vector<TopicId> relevant;
};

struct ProbeParameters {
  Eigen::VectorXd weights;
  double bias = 0.0;
  Eigen::VectorXd scalars;  // a (layers) or b (topics); empty for kSingle

  static ProbeParameters zeros(std::size_t dim, std::size_t scalar_count);
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
};

// Sigmoid classifier over a (combined) word vector. kSingle inputs are fed
// as-is; kLayers and kTopics go through the matching combiner.
class ProbeModel {
 public:
  ProbeModel(VectorLayout layout, ProbeParameters params);

  VectorLayout layout() const noexcept { return layout_; }
  const ProbeParameters& parameters() const noexcept { return params_; }
  ProbeParameters& parameters() noexcept { return params_; }

  Eigen::VectorXd features(const ProbeInput& input) const;
  double probability(const ProbeInput& input) const;

  // Mean binary cross-entropy over the batch and its exact gradient,
  // including backpropagation through the softmax and the normalization.
  double loss_and_gradient(std::span<const ProbeInput* const> inputs,
                           std::span<const int> labels,
                           ProbeParameters* gradient) const;

 private:
  VectorLayout layout_;
  ProbeParameters params_;
};

struct TrainConfig {
  std::size_t batch_size = 8;
  double learning_rate = 0.001;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double threshold = 0.5;
  std::uint64_t seed = 1;
};

struct LabeledSet {
  std::vector<const ProbeInput*> inputs;
  std::vector<int> labels;

  std::size_t size() const noexcept { return inputs.size(); }
};

struct TrainedProbe {
  ProbeModel model;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double dev_f1 = 0.0;
};

// AdamW on mean binary cross-entropy; all parameters start at zero. With a
// dev set, keeps the parameters of the best dev-F1 epoch and stops after
// `patience` epochs without improvement.
TrainedProbe train_probe(VectorLayout layout, const LabeledSet& train,
                         const LabeledSet* dev, const TrainConfig& config);

std::vector<int> predict(const ProbeModel& model, const LabeledSet& set,
                         double threshold = 0.5);

// Positive-class F1; 0 when there are no true positives.
double f1_score(std::span<const int> labels, std::span<const int> predicted);

struct PropertyDataset {
  std::vector<std::string> words;
  std::vector<std::string> properties;
  std::map<std::string, std::set<std::string>> positives;
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;

  int label(const std::string& property, const std::string& word) const;
  // Drops words without vectors from the word list and every split.
  std::vector<std::string> restrict_to(const VariantMatrix& vectors);
};

struct SplitSpec {
  double train_fraction = 0.6;
  double dev_fraction = 0.2;
};

// TSV rows "word<TAB>label,label,...". Properties with fewer than
// min_positives positives are dropped. A predefined split (JSON
// {train, dev, test}) overrides the seeded random split.
PropertyDataset load_property_dataset(std::istream& tsv,
                                      std::size_t min_positives,
                                      const SplitSpec& split,
                                      std::uint64_t seed,
                                      std::istream* split_json = nullptr);

struct Grid {
  std::vector<std::size_t> batch_sizes{4, 8, 16};
  std::vector<double> learning_rates{0.01, 0.005, 0.001, 0.0001};
};

struct Prediction {
  std::string property;
  std::string word;
  int label = 0;
  int predicted = 0;
  double probability = 0.0;
};

struct PropertyResult {
  double f1 = 0.0;
  double dev_f1 = 0.0;
  double best_lr = 0.0;
  std::size_t best_batch = 0;
  std::optional<ProbeModel> probe;
};

struct EvaluationReport {
  std::string variant;
  std::map<std::string, PropertyResult> per_property;
  double macro_f1 = 0.0;
  std::vector<Prediction> predictions;  // test split
};

ProbeInput make_probe_input(const VariantMatrix& vectors, std::size_t word);

// Per property: trains every grid point, keeps the best dev F1 (ties: lower
// learning rate, then smaller batch) and scores it on the test split.
EvaluationReport tune_and_evaluate(const PropertyDataset& dataset,
                                   const VariantMatrix& vectors,
                                   const Grid& grid, const TrainConfig& base);

double macro_f1_from_predictions(std::span<const Prediction> predictions);

nlohmann::json report_to_json(const EvaluationReport& report);
nlohmann::json probe_to_json(const std::string& property,
                             const PropertyResult& result);
void write_predictions_jsonl(std::span<const Prediction> predictions,
                             std::ostream& out);
std::vector<Prediction> read_predictions_jsonl(std::istream& in);

}  // namespace topicvec

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

#include "topicvec/probe.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <tuple>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "topicvec/error.hpp"

namespace topicvec {
namespace {

// Softmax over `active` entries of `scalars`; zero elsewhere.
Eigen::VectorXd masked_softmax(const Eigen::VectorXd& scalars,
                               std::span<const TopicId> active) {
  if (active.empty()) throw DataError("softmax over an empty index set");
  double peak = -std::numeric_limits<double>::infinity();
  for (TopicId i : active) {
    if (i >= scalars.size()) {
      throw DataError("combiner index " + std::to_string(i) + " out of range");
    }
    peak = std::max(peak, scalars[i]);
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(scalars.size());
  double total = 0.0;
  for (TopicId i : active) {
    out[i] = std::exp(scalars[i] - peak);
    total += out[i];
  }
  return out / total;
}

std::vector<TopicId> all_indices(Eigen::Index n) {
  std::vector<TopicId> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

Eigen::VectorXd normalized_weighted_sum(const RowMatrix& rows,
                                        const Eigen::VectorXd& weights,
                                        double* norm_out = nullptr) {
  if (weights.size() != rows.rows()) {
    throw DataError("combiner has " + std::to_string(weights.size()) +
                    " scalars for " + std::to_string(rows.rows()) + " vectors");
  }
  const Eigen::VectorXd sum = rows.transpose() * weights;
  const double norm = sum.norm();
  if (!(norm > 0.0)) throw DataError("degenerate combination: zero weighted sum");
  if (norm_out) *norm_out = norm;
  return sum / norm;
}

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Eigen::VectorXd LayerCombiner::weights() const {
  return masked_softmax(a, all_indices(a.size()));
}

Eigen::VectorXd TopicCombiner::weights(std::span<const TopicId> relevant) const {
  return masked_softmax(b, relevant);
}

Eigen::VectorXd combine_layers(const RowMatrix& vectors,
                               const LayerCombiner& combiner) {
  return normalized_weighted_sum(vectors, combiner.weights());
}

Eigen::VectorXd combine_topics(const RowMatrix& topic_vectors,
                               std::span<const TopicId> relevant,
                               const TopicCombiner& combiner) {
  if (relevant.empty()) throw DataError("combine_topics: empty relevant set");
  return normalized_weighted_sum(topic_vectors, combiner.weights(relevant));
}

ProbeParameters ProbeParameters::zeros(std::size_t dim,
                                       std::size_t scalar_count) {
  return ProbeParameters{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)),
                         0.0,
                         Eigen::VectorXd::Zero(
                             static_cast<Eigen::Index>(scalar_count))};
}

Eigen::VectorXd ProbeParameters::flatten() const {
  Eigen::VectorXd flat(weights.size() + 1 + scalars.size());
  flat << weights, bias, scalars;
  return flat;
}

void ProbeParameters::assign(const Eigen::VectorXd& flat) {
  const Eigen::Index d = weights.size();
  weights = flat.head(d);
  bias = flat[d];
  scalars = flat.tail(scalars.size());
}

ProbeModel::ProbeModel(VectorLayout layout, ProbeParameters params)
    : layout_(layout), params_(std::move(params)) {}

Eigen::VectorXd ProbeModel::features(const ProbeInput& input) const {
  switch (layout_) {
    case VectorLayout::kSingle:
      return input.rows.row(0).transpose();
    case VectorLayout::kLayers:
      return combine_layers(input.rows, LayerCombiner{params_.scalars});
    case VectorLayout::kTopics:
      return combine_topics(input.rows, input.relevant,
                            TopicCombiner{params_.scalars});
  }
  return {};
}

double ProbeModel::probability(const ProbeInput& input) const {
  return sigmoid(params_.weights.dot(features(input)) + params_.bias);
}

double ProbeModel::loss_and_gradient(std::span<const ProbeInput* const> inputs,
                                     std::span<const int> labels,
                                     ProbeParameters* gradient) const {
  if (inputs.size() != labels.size() || inputs.empty()) {
    throw DataError("loss needs a non-empty batch with one label per input");
  }
  if (gradient) {
    *gradient = ProbeParameters::zeros(
        static_cast<std::size_t>(params_.weights.size()),
        static_cast<std::size_t>(params_.scalars.size()));
  }
  const double scale = 1.0 / static_cast<double>(inputs.size());
  double loss = 0.0;
  for (std::size_t n = 0; n < inputs.size(); ++n) {
    const ProbeInput& in = *inputs[n];
    const double y = labels[n];

    Eigen::VectorXd mix;
    std::vector<TopicId> active;
    double norm = 1.0;
    Eigen::VectorXd x;
    if (layout_ == VectorLayout::kSingle) {
      x = in.rows.row(0).transpose();
    } else {
      active = layout_ == VectorLayout::kLayers ? all_indices(in.rows.rows())
                                                : in.relevant;
      mix = masked_softmax(params_.scalars, active);
      x = normalized_weighted_sum(in.rows, mix, &norm);
    }
    const double z = params_.weights.dot(x) + params_.bias;
    loss += scale * (softplus(z) - y * z);
    if (!gradient) continue;

    const double dz = scale * (sigmoid(z) - y);
    gradient->weights += dz * x;
    gradient->bias += dz;
    if (layout_ == VectorLayout::kSingle) continue;

    // d/ds of s/|s| is (I - x x^T)/|s|.
    const Eigen::VectorXd dx = dz * params_.weights;
    const Eigen::VectorXd ds = (dx - x * x.dot(dx)) / norm;
    double mean_g = 0.0;
    std::vector<double> g(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
      g[i] = in.rows.row(active[i]).dot(ds);
      mean_g += mix[active[i]] * g[i];
    }
    for (std::size_t i = 0; i < active.size(); ++i) {
      gradient->scalars[active[i]] += mix[active[i]] * (g[i] - mean_g);
    }
  }
  return loss;
}

std::vector<int> predict(const ProbeModel& model, const LabeledSet& set,
                         double threshold) {
  std::vector<int> out;
  out.reserve(set.size());
  for (const ProbeInput* in : set.inputs) {
    out.push_back(model.probability(*in) > threshold ? 1 : 0);
  }
  return out;
}

double f1_score(std::span<const int> labels, std::span<const int> predicted) {
  if (labels.size() != predicted.size()) {
    throw DataError("f1: label/prediction length mismatch");
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predicted[i] && labels[i]) ++tp;
    else if (predicted[i]) ++fp;
    else if (labels[i]) ++fn;
  }
  if (tp == 0) return 0.0;
  return 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
}

TrainedProbe train_probe(VectorLayout layout, const LabeledSet& train,
                         const LabeledSet* dev, const TrainConfig& config) {
  if (train.size() == 0) throw DataError("empty training split");
  if (config.batch_size < 1) throw UsageError("batch size must be >= 1");
  const ProbeInput& first = *train.inputs.front();
  const auto dim = static_cast<std::size_t>(first.rows.cols());
  std::size_t scalar_count = 0;
  if (layout != VectorLayout::kSingle) {
    scalar_count = static_cast<std::size_t>(first.rows.rows());
  }
  ProbeModel model(layout, ProbeParameters::zeros(dim, scalar_count));

  Eigen::VectorXd theta = model.parameters().flatten();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
  double beta1_t = 1.0;
  double beta2_t = 1.0;

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<const ProbeInput*> batch_inputs;
  std::vector<int> batch_labels;
  ProbeParameters grad;

  TrainedProbe result{model, 0, 0, -1.0};
  std::size_t since_best = 0;
  const bool early_stopping = dev != nullptr && dev->size() > 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch_inputs.clear();
      batch_labels.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch_inputs.push_back(train.inputs[order[i]]);
        batch_labels.push_back(train.labels[order[i]]);
      }
      model.loss_and_gradient(batch_inputs, batch_labels, &grad);
      const Eigen::VectorXd g = grad.flatten();

      beta1_t *= config.beta1;
      beta2_t *= config.beta2;
      theta *= 1.0 - config.learning_rate * config.weight_decay;
      m = config.beta1 * m + (1.0 - config.beta1) * g;
      v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
      const Eigen::VectorXd m_hat = m / (1.0 - beta1_t);
      const Eigen::VectorXd v_hat = v / (1.0 - beta2_t);
      theta.array() -= config.learning_rate * m_hat.array() /
                       (v_hat.array().sqrt() + config.epsilon);
      model.parameters().assign(theta);
    }
    result.epochs_run = epoch;

    if (!early_stopping) continue;
    const double f1 = f1_score(dev->labels, predict(model, *dev, config.threshold));
    if (f1 > result.dev_f1) {
      result.dev_f1 = f1;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  if (!early_stopping) {
    result.model = model;
    result.best_epoch = result.epochs_run;
    result.dev_f1 = 0.0;
  }
  return result;
}

int PropertyDataset::label(const std::string& property,
                           const std::string& word) const {
  auto it = positives.find(property);
  if (it == positives.end()) throw DataError("unknown property " + property);
  return it->second.count(word) ? 1 : 0;
}

std::vector<std::string> PropertyDataset::restrict_to(
    const VariantMatrix& vectors) {
  std::vector<std::string> dropped;
  auto keep = [&](std::vector<std::string>& list) {
    std::erase_if(list, [&](const std::string& w) {
      return !vectors.find(w).has_value();
    });
  };
  for (const std::string& w : words) {
    if (!vectors.find(w)) dropped.push_back(w);
  }
  keep(words);
  keep(train);
  keep(dev);
  keep(test);
  if (!dropped.empty()) {
    spdlog::warn("{} dataset words have no {} vectors and were dropped",
                 dropped.size(), vectors.name);
  }
  return dropped;
}

PropertyDataset load_property_dataset(std::istream& tsv,
                                      std::size_t min_positives,
                                      const SplitSpec& split,
                                      std::uint64_t seed,
                                      std::istream* split_json) {
  PropertyDataset ds;
  std::map<std::string, std::set<std::string>> positives;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(tsv, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw DataError("malformed dataset row at line " + std::to_string(line_no));
    }
    std::string word = line.substr(0, tab);
    if (!seen.insert(word).second) {
      throw DataError("duplicate word '" + word + "' at line " +
                      std::to_string(line_no));
    }
    ds.words.push_back(word);
    std::string_view labels(line);
    labels.remove_prefix(tab + 1);
    while (!labels.empty()) {
      const auto comma = labels.find(',');
      std::string label(labels.substr(0, comma));
      if (label.empty()) {
        throw DataError("empty property label at line " +
                        std::to_string(line_no));
      }
      positives[label].insert(word);
      if (comma == std::string_view::npos) break;
      labels.remove_prefix(comma + 1);
    }
  }
  for (auto& [property, words] : positives) {
    if (words.size() >= min_positives) {
      ds.properties.push_back(property);
      ds.positives.emplace(property, std::move(words));
    }
  }
  if (ds.words.empty() || ds.properties.empty()) {
    throw DataError("empty dataset after filtering properties with fewer than " +
                    std::to_string(min_positives) + " positives");
  }

  if (split_json) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(*split_json);
      ds.train = j.at("train").get<std::vector<std::string>>();
      ds.dev = j.at("dev").get<std::vector<std::string>>();
      ds.test = j.at("test").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("split file: ") + e.what());
    }
    std::set<std::string> assigned;
    for (const auto* part : {&ds.train, &ds.dev, &ds.test}) {
      for (const std::string& w : *part) {
        if (!seen.count(w)) {
          throw DataError("split file names unknown word '" + w + "'");
        }
        if (!assigned.insert(w).second) {
          throw DataError("split file lists '" + w + "' more than once");
        }
      }
    }
    return ds;
  }

  std::vector<std::string> shuffled = ds.words;
  std::sort(shuffled.begin(), shuffled.end());
  std::mt19937_64 rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto n = static_cast<double>(shuffled.size());
  const auto n_train = static_cast<std::size_t>(std::lround(split.train_fraction * n));
  const auto n_dev = std::min(
      shuffled.size() - n_train,
      static_cast<std::size_t>(std::lround(split.dev_fraction * n)));
  ds.train.assign(shuffled.begin(), shuffled.begin() + n_train);
  ds.dev.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_dev);
  ds.test.assign(shuffled.begin() + n_train + n_dev, shuffled.end());
  return ds;
}

ProbeInput make_probe_input(const VariantMatrix& vectors, std::size_t word) {
  ProbeInput in{vectors.vectors.at(word), {}};
  if (vectors.layout == VectorLayout::kTopics) {
    in.relevant = vectors.relevant_topics.at(word);
  }
  return in;
}

EvaluationReport tune_and_evaluate(const PropertyDataset& dataset,
                                   const VariantMatrix& vectors,
                                   const Grid& grid, const TrainConfig& base) {
  if (dataset.dev.empty()) throw DataError("tuning needs a non-empty dev split");
  std::map<std::string, ProbeInput> inputs;
  for (const std::string& w : dataset.words) {
    const auto idx = vectors.find(w);
    if (!idx) throw DataError("no " + vectors.name + " vectors for '" + w + "'");
    inputs.emplace(w, make_probe_input(vectors, *idx));
  }
  auto make_set = [&](const std::vector<std::string>& words,
                      const std::string& property) {
    LabeledSet set;
    for (const std::string& w : words) {
      set.inputs.push_back(&inputs.at(w));
      set.labels.push_back(dataset.label(property, w));
    }
    return set;
  };

  // Ties go to the first point in (lr ascending, batch ascending) order.
  std::vector<std::pair<double, std::size_t>> points;
  for (double lr : grid.learning_rates) {
    for (std::size_t b : grid.batch_sizes) points.emplace_back(lr, b);
  }
  std::sort(points.begin(), points.end());

  EvaluationReport report;
  report.variant = vectors.name;
  double total = 0.0;
  for (const std::string& property : dataset.properties) {
    const LabeledSet train = make_set(dataset.train, property);
    const LabeledSet dev = make_set(dataset.dev, property);
    const LabeledSet test = make_set(dataset.test, property);

    PropertyResult best;
    best.dev_f1 = -1.0;
    for (const auto& [lr, batch] : points) {
      TrainConfig config = base;
      config.learning_rate = lr;
      config.batch_size = batch;
      TrainedProbe trained = train_probe(vectors.layout, train, &dev, config);
      const double f1 =
          f1_score(dev.labels, predict(trained.model, dev, config.threshold));
      if (f1 > best.dev_f1) {
        best.dev_f1 = f1;
        best.best_lr = lr;
        best.best_batch = batch;
        best.probe = trained.model;
      }
    }
    const std::vector<int> predicted = predict(*best.probe, test, base.threshold);
    best.f1 = f1_score(test.labels, predicted);
    for (std::size_t i = 0; i < dataset.test.size(); ++i) {
      report.predictions.push_back(Prediction{
          property, dataset.test[i], test.labels[i], predicted[i],
          best.probe->probability(*test.inputs[i])});
    }
    total += best.f1;
    report.per_property.emplace(property, std::move(best));
  }
  report.macro_f1 = total / static_cast<double>(dataset.properties.size());
  return report;
}

double macro_f1_from_predictions(std::span<const Prediction> predictions) {
  std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> grouped;
  for (const Prediction& p : predictions) {
    auto& [labels, predicted] = grouped[p.property];
    labels.push_back(p.label);
    predicted.push_back(p.predicted);
  }
  if (grouped.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [property, lp] : grouped) {
    total += f1_score(lp.first, lp.second);
  }
  return total / static_cast<double>(grouped.size());
}

nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json per_property = nlohmann::json::object();
  for (const auto& [name, r] : report.per_property) {
    per_property[name] = {{"f1", r.f1},
                          {"best_lr", r.best_lr},
                          {"best_batch", r.best_batch}};
  }
  return {{"variant", report.variant},
          {"per_property", per_property},
          {"macro_f1", report.macro_f1}};
}

nlohmann::json probe_to_json(const std::string& property,
                             const PropertyResult& result) {
  nlohmann::json j{{"property", property},
                   {"best_lr", result.best_lr},
                   {"best_batch", result.best_batch},
                   {"dev_f1", result.dev_f1}};
  if (result.probe) {
    const ProbeParameters& p = result.probe->parameters();
    j["weights"] = std::vector<double>(p.weights.begin(), p.weights.end());
    j["bias"] = p.bias;
    j["scalars"] = std::vector<double>(p.scalars.begin(), p.scalars.end());
  }
  return j;
}

void write_predictions_jsonl(std::span<const Prediction> predictions,
                             std::ostream& out) {
  for (const Prediction& p : predictions) {
    out << nlohmann::ordered_json{{"property", p.property},
                          {"word", p.word},
                          {"label", p.label},
                          {"predicted", p.predicted},
                          {"probability", p.probability}}
               .dump()
        << '\n';
  }
}

std::vector<Prediction> read_predictions_jsonl(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back(Prediction{j.at("property").get<std::string>(),
                               j.at("word").get<std::string>(),
                               j.at("label").get<int>(),
                               j.at("predicted").get<int>(),
                               j.at("probability").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("predictions line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return out;
}

}  // namespace topicvec

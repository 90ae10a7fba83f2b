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

#include <cmath>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "topicvec/error.hpp"
#include "topicvec/probe.hpp"

using namespace topicvec;

namespace {

RowMatrix random_rows(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RowMatrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

Eigen::VectorXd random_vec(Eigen::Index n, std::mt19937_64& rng) {
  return random_rows(n, 1, rng).col(0);
}

// Max relative error between the analytic gradient and central differences.
double gradient_error(VectorLayout layout, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::Index d = 5, k = 4;
  std::vector<ProbeInput> inputs;
  std::vector<int> labels;
  for (int i = 0; i < 6; ++i) {
    ProbeInput in;
    if (layout == VectorLayout::kSingle) {
      in.rows = random_rows(1, d, rng);
    } else if (layout == VectorLayout::kLayers) {
      in.rows = random_rows(k, d, rng);
    } else {
      in.rows = RowMatrix::Zero(k, d);
      in.relevant = {static_cast<TopicId>(i % k), static_cast<TopicId>((i + 2) % k)};
      if (i % 3 == 0) in.relevant.push_back(static_cast<TopicId>((i + 1) % k));
      for (TopicId t : in.relevant) in.rows.row(t) = random_rows(1, d, rng);
    }
    inputs.push_back(std::move(in));
    labels.push_back(i % 2);
  }
  std::vector<const ProbeInput*> ptrs;
  for (const auto& in : inputs) ptrs.push_back(&in);

  ProbeParameters p = ProbeParameters::zeros(d, layout == VectorLayout::kSingle ? 0 : k);
  Eigen::VectorXd flat = random_vec(p.flatten().size(), rng);
  p.assign(flat);
  ProbeModel model(layout, p);
  ProbeParameters grad = ProbeParameters::zeros(d, p.scalars.size());
  model.loss_and_gradient(ptrs, labels, &grad);
  const Eigen::VectorXd analytic = grad.flatten();

  double worst = 0.0;
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    Eigen::VectorXd up = flat, down = flat;
    up(i) += h;
    down(i) -= h;
    model.parameters().assign(up);
    const double lu = model.loss_and_gradient(ptrs, labels, nullptr);
    model.parameters().assign(down);
    const double ld = model.loss_and_gradient(ptrs, labels, nullptr);
    const double numeric = (lu - ld) / (2 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic(i)), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic(i)) / denom);
  }
  return worst;
}

PropertyDataset toy_dataset(std::size_t n_words) {
  std::ostringstream tsv;
  for (std::size_t i = 0; i < n_words; ++i) {
    tsv << "w" << i << "\t" << (i % 2 ? "odd" : "even");
    if (i % 10 == 0) tsv << ",rare";
    tsv << "\n";
  }
  std::istringstream in(tsv.str());
  return load_property_dataset(in, 10, {}, 4);
}

}  // namespace

TEST_CASE("topic combiner hand example") {
  const TopicCombiner c{(Eigen::VectorXd(3) << 1, 2, 3).finished()};
  const std::vector<TopicId> rel{0, 2};
  const Eigen::VectorXd mu = c.weights(rel);
  CHECK(mu(0) == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + std::exp(3.0))).epsilon(1e-12));
  CHECK(mu(0) == doctest::Approx(0.1192).epsilon(1e-3));
  CHECK(mu(1) == 0.0);
  CHECK(mu(2) == doctest::Approx(0.8808).epsilon(1e-3));

  RowMatrix rows = RowMatrix::Zero(3, 3);
  rows(0, 0) = 1.0;
  rows(2, 2) = 1.0;
  const Eigen::VectorXd out = combine_topics(rows, rel, c);
  Eigen::Vector3d expected(mu(0), 0.0, mu(2));
  expected.normalize();
  CHECK((out - expected).norm() < 1e-9);

  const std::vector<TopicId> one{2};
  CHECK((combine_topics(rows, one, c) - rows.row(2).transpose()).norm() < 1e-12);
  CHECK_THROWS_AS(combine_topics(rows, {}, c), DataError);
}

TEST_CASE("layer combiner") {
  RowMatrix uv = RowMatrix::Zero(2, 3);
  uv(0, 0) = 1.0;
  uv(1, 1) = 1.0;
  const LayerCombiner sharp{(Eigen::VectorXd(2) << 10, -10).finished()};
  CHECK((combine_layers(uv, sharp) - uv.row(0).transpose()).norm() < 1e-3);
  CHECK(std::abs(sharp.weights().sum() - 1.0) < 1e-12);

  const RowMatrix single = (RowMatrix(1, 2) << 3, 4).finished();
  const LayerCombiner any{Eigen::VectorXd::Constant(1, 7.0)};
  CHECK(combine_layers(single, any).isApprox(Eigen::Vector2d(0.6, 0.8), 1e-12));

  std::mt19937_64 rng(3);
  const RowMatrix rows = random_rows(5, 4, rng);
  Eigen::VectorXd mean = rows.colwise().mean().transpose();
  mean.normalize();
  CHECK((combine_layers(rows, LayerCombiner{Eigen::VectorXd::Zero(5)}) - mean).norm() < 1e-9);

  RowMatrix cancel(2, 2);
  cancel << 1, 0, -1, 0;
  CHECK_THROWS_AS(combine_layers(cancel, LayerCombiner{Eigen::VectorXd::Zero(2)}), DataError);
}

TEST_CASE("combiners are shift invariant") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const RowMatrix rows = random_rows(4, 6, rng);
    const Eigen::VectorXd a = random_vec(4, rng);
    const Eigen::VectorXd shifted = (a.array() + 3.7).matrix();
    CHECK((combine_layers(rows, {a}) - combine_layers(rows, {shifted})).norm() < 1e-9);
    const std::vector<TopicId> rel{1, 3};
    CHECK((combine_topics(rows, rel, {a}) - combine_topics(rows, rel, {shifted})).norm() < 1e-9);
    const auto mu = TopicCombiner{a}.weights(rel);
    CHECK(mu(0) == 0.0);
    CHECK(mu(2) == 0.0);
    CHECK(std::abs(mu.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("analytic gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CHECK(gradient_error(VectorLayout::kSingle, seed) < 1e-4);
    CHECK(gradient_error(VectorLayout::kLayers, seed) < 1e-4);
    CHECK(gradient_error(VectorLayout::kTopics, seed) < 1e-4);
  }
}

TEST_CASE("separable toy set is learned") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<ProbeInput> inputs;
  LabeledSet set;
  for (int i = 0; i < 40; ++i) {
    double x = u(rng), y = u(rng);
    const int label = x + y > 0 ? 1 : 0;
    x += label ? 0.3 : -0.3;
    inputs.push_back({(RowMatrix(1, 2) << x, y).finished(), {}});
    set.labels.push_back(label);
  }
  for (const auto& in : inputs) set.inputs.push_back(&in);
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.max_epochs = 200;
  const TrainedProbe trained = train_probe(VectorLayout::kSingle, set, nullptr, cfg);
  CHECK(trained.epochs_run <= 200);
  CHECK(f1_score(set.labels, predict(trained.model, set)) == 1.0);
}

TEST_CASE("all-negative labels give zero F1") {
  std::mt19937_64 rng(5);
  std::vector<ProbeInput> inputs;
  LabeledSet set;
  for (int i = 0; i < 12; ++i) {
    inputs.push_back({random_rows(1, 3, rng), {}});
    set.labels.push_back(0);
  }
  for (const auto& in : inputs) set.inputs.push_back(&in);
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  const TrainedProbe trained = train_probe(VectorLayout::kSingle, set, nullptr, cfg);
  const auto pred = predict(trained.model, set);
  CHECK(std::count(pred.begin(), pred.end(), 1) == 0);
  CHECK(f1_score(set.labels, pred) == 0.0);
}

TEST_CASE("f1 score") {
  const std::vector<int> labels{1, 1, 0, 0};
  CHECK(f1_score(labels, std::vector<int>{1, 0, 1, 0}) == doctest::Approx(0.5));
  CHECK(f1_score(labels, std::vector<int>{1, 1, 0, 0}) == 1.0);
  CHECK(f1_score(labels, std::vector<int>{0, 0, 0, 0}) == 0.0);
  CHECK_THROWS_AS(f1_score(labels, std::vector<int>{1}), DataError);
}

TEST_CASE("training is deterministic and zero initialized") {
  std::mt19937_64 rng(6);
  std::vector<ProbeInput> inputs;
  LabeledSet set;
  for (int i = 0; i < 16; ++i) {
    inputs.push_back({random_rows(3, 4, rng), {}});
    set.labels.push_back(i % 3 == 0);
  }
  for (const auto& in : inputs) set.inputs.push_back(&in);
  TrainConfig cfg;
  cfg.max_epochs = 5;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.01;
  const auto a = train_probe(VectorLayout::kLayers, set, &set, cfg);
  const auto b = train_probe(VectorLayout::kLayers, set, &set, cfg);
  CHECK(a.model.parameters().flatten() == b.model.parameters().flatten());

  const ProbeModel fresh(VectorLayout::kLayers, ProbeParameters::zeros(4, 3));
  CHECK(fresh.probability(inputs[0]) == 0.5);
  CHECK(predict(fresh, set) == std::vector<int>(16, 0));
}

TEST_CASE("dataset loading") {
  const PropertyDataset ds = toy_dataset(100);
  CHECK(ds.properties == std::vector<std::string>{"even", "odd", "rare"});
  CHECK(ds.train.size() == 60);
  CHECK(ds.dev.size() == 20);
  CHECK(ds.test.size() == 20);
  std::set<std::string> all(ds.train.begin(), ds.train.end());
  all.insert(ds.dev.begin(), ds.dev.end());
  all.insert(ds.test.begin(), ds.test.end());
  CHECK(all.size() == 100);
  CHECK(ds.label("odd", "w3") == 1);
  CHECK(ds.label("odd", "w4") == 0);

  const PropertyDataset again = toy_dataset(100);
  CHECK(again.train == ds.train);
  CHECK(again.test == ds.test);

  // 90 words: "rare" has 9 positives and is dropped.
  const PropertyDataset small = toy_dataset(90);
  CHECK(small.properties == std::vector<std::string>{"even", "odd"});

  std::istringstream bad("no tab here\n");
  CHECK_THROWS_AS(load_property_dataset(bad, 1, {}, 1), DataError);
  std::istringstream sparse("a\tx\nb\ty\n");
  CHECK_THROWS_AS(load_property_dataset(sparse, 10, {}, 1), DataError);

  std::istringstream rows("a\tx\nb\tx\nc\ty\n");
  std::istringstream split(R"({"train":["a"],"dev":["b"],"test":["c"]})");
  const auto fixed = load_property_dataset(rows, 1, {}, 1, &split);
  CHECK(fixed.train == std::vector<std::string>{"a"});
  CHECK(fixed.test == std::vector<std::string>{"c"});
  std::istringstream rows2("a\tx\n");
  std::istringstream unknown(R"({"train":["z"],"dev":[],"test":[]})");
  CHECK_THROWS_AS(load_property_dataset(rows2, 1, {}, 1, &unknown), DataError);
}

TEST_CASE("grid ties pick the lowest learning rate and smallest batch") {
  // Every dev label is negative, so dev F1 is 0 at every grid point.
  std::ostringstream tsv;
  for (int i = 0; i < 30; ++i) tsv << "w" << i << "\t" << (i < 20 ? "p" : "other") << "\n";
  std::istringstream in(tsv.str());
  std::istringstream split([] {
    nlohmann::json j;
    std::vector<std::string> train, dev, test;
    for (int i = 0; i < 30; ++i) {
      const std::string w = "w" + std::to_string(i);
      (i < 16 || (i >= 20 && i < 24) ? train : i < 20 ? test : dev).push_back(w);
    }
    j["train"] = train;
    j["dev"] = dev;
    j["test"] = test;
    return j.dump();
  }());
  const PropertyDataset ds = load_property_dataset(in, 10, {}, 1, &split);
  REQUIRE(ds.properties == std::vector<std::string>{"other", "p"});

  std::mt19937_64 rng(1);
  VariantMatrix vm;
  vm.name = "C_mask";
  for (const auto& w : ds.words) vm.add(w, random_rows(1, 3, rng));
  TrainConfig cfg;
  cfg.max_epochs = 3;
  const EvaluationReport r = tune_and_evaluate(ds, vm, Grid{}, cfg);
  const PropertyResult& p = r.per_property.at("p");
  CHECK(p.dev_f1 == 0.0);
  CHECK(p.best_lr == 0.0001);
  CHECK(p.best_batch == 4);

  double mean = 0.0;
  for (const auto& [name, res] : r.per_property) mean += res.f1;
  CHECK(r.macro_f1 == doctest::Approx(mean / 2.0).epsilon(1e-12));
  CHECK(macro_f1_from_predictions(r.predictions) == r.macro_f1);

  std::stringstream io;
  write_predictions_jsonl(r.predictions, io);
  const auto back = read_predictions_jsonl(io);
  REQUIRE(back.size() == r.predictions.size());
  CHECK(macro_f1_from_predictions(back) == r.macro_f1);
  const auto j = report_to_json(r);
  CHECK(j["variant"] == "C_mask");
  CHECK(j["per_property"]["p"]["best_batch"] == 4);
}

TEST_CASE("macro F1 is the unweighted mean over properties") {
  std::vector<Prediction> preds;
  // a: tp 1, fp 2, fn 1 -> 0.4; b: tp 3, fp 1, fn 3 -> 0.6
  auto add = [&](const char* prop, int label, int predicted, int times) {
    for (int i = 0; i < times; ++i) preds.push_back({prop, "w", label, predicted, 0.5});
  };
  add("a", 1, 1, 1);
  add("a", 0, 1, 2);
  add("a", 1, 0, 1);
  add("b", 1, 1, 3);
  add("b", 0, 1, 1);
  add("b", 1, 0, 3);
  CHECK(macro_f1_from_predictions(preds) == doctest::Approx(0.5).epsilon(1e-12));
}

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

// Writes the synthetic property corpus used by the end-to-end fixture.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "topicvec/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic property-probing corpus"};
  std::string corpus_path = "corpus.txt";
  std::string dataset_path = "properties.tsv";
  std::uint64_t seed = 1;
  std::uint32_t targets = 120;
  app.add_option("--corpus", corpus_path, "corpus output path");
  app.add_option("--dataset", dataset_path, "property TSV output path");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--targets", targets, "number of target words");
  CLI11_PARSE(app, argc, argv);

  topicvec::synthetic::PropertyCorpusOptions options;
  options.num_targets = targets;
  const auto fixture = topicvec::synthetic::make_property_corpus(options, seed);

  std::ofstream corpus(corpus_path);
  for (const auto& line : fixture.records) corpus << line << '\n';
  std::ofstream dataset(dataset_path);
  for (const auto& line : fixture.dataset) dataset << line << '\n';
  if (!corpus || !dataset) {
    std::cerr << "failed writing fixture files\n";
    return 3;
  }
  std::cerr << fixture.records.size() << " documents, " << fixture.targets.size()
            << " target words, " << fixture.num_topics << " topics\n";
  return 0;
}

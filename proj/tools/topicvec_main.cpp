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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "topicvec/config.hpp"
#include "topicvec/error.hpp"
#include "topicvec/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDependency = 2;
constexpr int kExitData = 3;

int exit_code(topicvec::ErrorKind kind) {
  switch (kind) {
    case topicvec::ErrorKind::kUsage: return kExitUsage;
    case topicvec::ErrorKind::kDependency: return kExitDependency;
    case topicvec::ErrorKind::kData:
    case topicvec::ErrorKind::kFormat: return kExitData;
  }
  return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("topicvec"));

  CLI::App app{"Topic-specific static word vectors from contextual encoders"};
  std::string stage;
  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("stage", stage,
                 "ingest|lda|topics|select|manifest|encode|aggregate|pca|"
                 "train|eval|neighbors")
      ->required();
  app.add_option("--config", config_path, "key=value config file")->required();
  app.add_option("--set", overrides, "override a config key (key=value)")
      ->take_all();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const topicvec::Stage which = topicvec::parse_stage(stage);
    topicvec::PipelineConfig config = topicvec::load_config(config_path);
    const auto cwd = std::filesystem::current_path();
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw topicvec::UsageError("--set expects key=value, got '" + kv + "'");
      }
      config.set(kv.substr(0, eq), kv.substr(eq + 1), cwd);
    }
    topicvec::Pipeline pipeline(std::move(config));
    pipeline.run(which);
    std::cout << pipeline.run_dir().string() << '\n';
  } catch (const topicvec::Error& e) {
    spdlog::error("{}", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  }
  return kExitOk;
}

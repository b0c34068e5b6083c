// Copyright 2026 The Bagforge Authors.
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

// bagforge: distant-supervision relation extraction pipeline driver.
//
//   bagforge <stage> --config cfg.json [--set key.path=value]...
//            [--scheme s-tag|s-tag+exprels|k-tag] [--agg avg|attn]
//            [--seed N] [--workers N]

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bagforge/error.hpp"
#include "bagforge/pipeline.hpp"
#include "bagforge/records.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"Distant-supervision relation extraction pipeline"};
  std::string stage;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string scheme, agg;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool print_config = false;

  app.add_option("stage", stage,
                 "kb, corpus, match, link, tag, bags, split, train, eval, synth, all")
      ->required()
      ->check(CLI::IsMember({"kb", "corpus", "match", "link", "tag", "bags", "split",
                             "train", "eval", "synth", "all"}));
  app.add_option("-c,--config", config_path, "JSON config file (defaults if omitted)");
  app.add_option("--set", overrides, "Override a config key: key.path=value");
  app.add_option("--scheme", scheme, "Tagging scheme");
  app.add_option("--agg", agg, "Bag aggregation");
  app.add_option("--seed", seed, "Global seed (beats BAGFORGE_SEED and the config)");
  app.add_option("--workers", workers, "Worker threads (<= 0: all processors)");
  app.add_flag("--print-config", print_config, "Print the effective config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  nlohmann::json doc = config_path.empty()
                           ? nlohmann::json::object()
                           : bagforge::records::read_json(config_path);
  if (const char* env = std::getenv("BAGFORGE_SEED"); env && *env) {
    bagforge::apply_override(doc, std::string("seed=") + env);
  }
  for (const auto& o : overrides) bagforge::apply_override(doc, o);
  if (!scheme.empty()) doc["tagging"]["scheme"] = scheme;
  if (!agg.empty()) doc["model"]["agg"] = agg;
  if (seed) doc["seed"] = *seed;
  if (workers) doc["workers"] = *workers;

  const auto config = bagforge::PipelineConfig::from_json(doc);
  if (print_config) {
    std::cout << config.to_json().dump(2) << '\n';
    return 0;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto stats = bagforge::run_stage(bagforge::parse_stage(stage), config);
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  std::cout << stats.dump(2) << '\n';
  std::cerr << "bagforge " << stage << ": done in " << dt.count() << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const bagforge::Error& e) {
    std::cerr << "bagforge: " << e.what() << '\n';
    return bagforge::is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "bagforge: " << e.what() << '\n';
    return 2;
  }
}

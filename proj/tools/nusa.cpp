// Copyright 2026 The Nusa Toolkit Authors.
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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nusa/pipeline.hpp"

namespace {

struct Common {
  std::string config;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  bool quiet = false;
};

nusa::pipeline::PipelineConfig build_config(const Common& c) {
  namespace pl = nusa::pipeline;
  auto cfg = c.config.empty() ? pl::config_from_json(nlohmann::json::object(), std::filesystem::current_path())
                              : pl::load_config(c.config);
  for (const auto& o : c.overrides) pl::apply_override(cfg, o);
  if (!c.output_dir.empty()) cfg.doc["output_dir"] = std::filesystem::absolute(c.output_dir).string();
  if (c.seed) cfg.doc["seed"] = *c.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nusa: corpus preparation, vocabulary extension and evaluation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nusa 0.1.0");

  Common common;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"preprocess", "Quality-filter and deduplicate a corpus"},
      {"vocab", "Extend a tokenizer vocabulary and report fertility"},
      {"embed", "Extend an embedding matrix and export 2-D projections"},
      {"parallel", "Build alternating bilingual training documents"},
      {"eval", "Score task files and write a scoreboard"},
      {"report", "Aggregate precomputed task scores into a scoreboard"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", common.config, "Pipeline config (JSON)");
    sub->add_option("-o,--output-dir", common.output_dir, "Output directory (overrides output_dir)");
    sub->add_option("--seed", common.seed, "Seed (overrides seed)");
    sub->add_option("--set", common.overrides, "Override a config value: dotted.key=value");
    sub->add_flag("-q,--quiet", common.quiet, "Print nothing on success");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const auto* sub = app.get_subcommands().front();
  try {
    const auto cfg = build_config(common);
    const auto result = nusa::pipeline::run_command(sub->get_name(), cfg);
    if (!common.quiet) {
      std::cout << result.summary.dump(2) << '\n';
      std::cerr << "nusa " << sub->get_name() << ": wrote " << result.files.size() << " files to "
                << result.dir.string() << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "nusa " << sub->get_name() << ": error: " << e.what() << '\n';
    return nusa::pipeline::exit_code_for(e);
  }
}

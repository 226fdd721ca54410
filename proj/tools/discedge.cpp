// Copyright 2026 The DisCEdge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "discedge/errors.hpp"
#include "discedge/harness.hpp"
#include "discedge/node.hpp"
#include "discedge/report.hpp"
#include "discedge/scenario.hpp"
#include "discedge/vocab_builder.hpp"

namespace {

using namespace discedge;

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_run(const std::filesystem::path& scenario_path, bool live,
            const std::filesystem::path& out_dir) {
  const ScenarioConfig config = load_scenario(scenario_path);
  HarnessOptions options;
  options.transport = live ? TransportKind::kLive : TransportKind::kSim;
  options.work_dir = out_dir / "live";
  const MetricsReport report = run_scenario(config, options);
  report.write(out_dir);
  if (report.modes().size() >= 2) {
    const ComparisonTable table = compare_modes(report);
    table.write_csv(out_dir / "comparison.csv");
    std::cout << table.to_markdown();
  }
  std::cout << fmt::format("report: {} ({} turns, {} failed)\n", out_dir.string(),
                           report.turns.size(), report.failed_turns());
  if (config.policy.mode == ConsistencyPolicy::Mode::kStrong && report.failed_turns() > 0) {
    return 2;
  }
  return 0;
}

int cmd_compare(const std::filesystem::path& dir, const std::string& baseline) {
  const MetricsReport report = MetricsReport::load(dir);
  const ComparisonTable table =
      compare_modes(report, baseline.empty() ? std::nullopt : std::optional(baseline));
  table.write_csv(dir / "comparison.csv");
  std::cout << table.to_markdown();
  return 0;
}

int cmd_vocab_build(const std::vector<std::filesystem::path>& corpus,
                    const std::filesystem::path& out, std::size_t max_words) {
  std::string text;
  for (const auto& path : corpus) {
    text += slurp(path);
    text += '\n';
  }
  VocabBuildOptions options;
  options.max_words = max_words;
  const auto entries = build_vocab_entries(text, options);
  write_vocab_file(out, entries);
  std::cout << fmt::format("wrote {} entries to {}\n", entries.size(), out.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DisCEdge edge context management"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")
      ->capture_default_str();

  std::filesystem::path node_config;
  auto* node = app.add_subcommand("node", "Serve one edge node over TCP");
  node->add_option("--config", node_config, "Node YAML config")->required()->check(CLI::ExistingFile);

  std::filesystem::path scenario;
  std::filesystem::path out_dir = "report";
  bool sim = false;
  bool live = false;
  auto* run = app.add_subcommand("run", "Run a scenario and write a metrics report");
  run->add_option("--scenario", scenario, "Scenario YAML")->required()->check(CLI::ExistingFile);
  auto* sim_flag = run->add_flag("--sim", sim, "Simulated network and clock (default)");
  run->add_flag("--live", live, "Spawn node processes and use TCP")->excludes(sim_flag);
  run->add_option("--out", out_dir, "Report directory")->capture_default_str();

  std::filesystem::path report_dir;
  std::string baseline;
  auto* compare = app.add_subcommand("compare", "Compare modes in a report directory");
  compare->add_option("report", report_dir, "Report directory")->required()->check(CLI::ExistingDirectory);
  compare->add_option("--baseline", baseline, "Baseline mode (default: first mode)");

  std::vector<std::filesystem::path> corpus;
  std::filesystem::path vocab_out;
  std::size_t max_words = VocabBuildOptions{}.max_words;
  auto* vocab = app.add_subcommand("vocab", "Vocabulary tools");
  vocab->require_subcommand(1);
  auto* build = vocab->add_subcommand("build", "Build a vocab file from corpus text");
  build->add_option("corpus", corpus, "Corpus files")->required()->check(CLI::ExistingFile);
  build->add_option("-o,--output", vocab_out, "Output vocab file")->required();
  build->add_option("--max-words", max_words, "Distinct words to keep")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*node) {
      spdlog::set_level(std::min(spdlog::get_level(), spdlog::level::info));
      return run_node_server(load_node_config(node_config));
    }
    if (*run) return cmd_run(scenario, live, out_dir);
    if (*compare) return cmd_compare(report_dir, baseline);
    if (*build) return cmd_vocab_build(corpus, vocab_out, max_words);
  } catch (const discedge::Error& e) {
    std::cerr << "discedge: " << e.code() << ": " << e.what() << "\n";
    return 1;
  }
  return 1;
}

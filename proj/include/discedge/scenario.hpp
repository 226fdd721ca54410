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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "discedge/context_manager.hpp"
#include "discedge/llm_stub.hpp"
#include "discedge/transport.hpp"
#include "discedge/wire.hpp"

namespace discedge {

// Crash-stop fault: `node` dies right after the client receives the reply
// for message `after_message` (1-based). Frames it has not yet sent are lost.
struct KillFault {
  std::string node;
  std::size_t after_message = 0;
};

struct ScenarioConfig {
  std::string name;
  std::string model_name;
  std::string user_id;
  std::vector<std::string> messages;
  std::optional<std::string> system_prompt;

  std::vector<RequestMode> modes = {RequestMode::kTokenized, RequestMode::kRaw};
  std::uint32_t repeats = 3;
  std::uint64_t seed = 42;
  // Node ids in declaration order, with their hardware profiles.
  std::vector<std::string> nodes = {"A"};
  std::map<std::string, HardwareProfile> profiles;
  // Node per message; empty means every message goes to the first node.
  std::vector<std::string> mobility;
  double node_latency_ms = 5.0;
  double client_latency_ms = 5.0;
  double jitter_ms = 0.0;
  // Per-link overrides applied after the uniform latencies.
  std::vector<LinkSpec> links;
  ConsistencyPolicy policy;
  GenerationParams params;
  double ttl_s = 3600;
  std::filesystem::path vocab;
  std::optional<KillFault> kill;
  // Live mode: nodes listen on consecutive ports from base_port (0: any
  // free ports).
  std::string live_host = "127.0.0.1";
  std::uint16_t base_port = 0;

  const HardwareProfile& profile_of(const std::string& node) const;
  // Throws ConfigError.
  void validate() const;
};

// Scenario YAML (name, model_name, user_id, messages) with harness
// keys under `harness:`. `messages` may be a YAML list or the numbered
// block form (`1. "..."` per line). Relative paths resolve against the
// scenario file's directory.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(const std::string& yaml_text,
                              const std::filesystem::path& base_dir = {});

// The shipped 9-turn robotics scenario with the default vocab.
ScenarioConfig default_scenario();
std::filesystem::path default_data_dir();
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Applies DISCEDGE_SEED when set; throws ConfigError on a malformed value.
void apply_seed_override(ScenarioConfig& config);

}  // namespace discedge

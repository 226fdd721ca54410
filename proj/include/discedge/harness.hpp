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

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "discedge/client.hpp"
#include "discedge/node.hpp"
#include "discedge/report.hpp"
#include "discedge/scenario.hpp"
#include "discedge/sim_network.hpp"
#include "discedge/simulator.hpp"

namespace discedge {

inline constexpr const char* kClientEndpoint = "client";

// A scenario's nodes and client wired over a SimNetwork on one virtual
// clock. Every node is in the model's keygroup.
class SimCluster {
 public:
  SimCluster(const ScenarioConfig& config, const Vocab& vocab, std::uint64_t network_seed);

  Simulator& sim() { return sim_; }
  SimNetwork& net() { return net_; }
  Node& node(const std::string& id);
  LlmClient& client() { return client_; }
  const std::vector<std::string>& node_ids() const { return ids_; }

  // Crash-stop: the node stops receiving and everything it sends is lost.
  void kill(const std::string& id);
  // Sync bytes sent from -> to (frames + length prefixes).
  std::map<std::pair<std::string, std::string>, PeerCounters> sync_counters() const;

 private:
  Simulator sim_;
  SimNetwork net_;
  std::vector<std::string> ids_;
  std::map<std::string, std::unique_ptr<Node>> nodes_;
  LlmClient client_;
};

// Deterministic session identity for a scenario run, so request bytes do
// not depend on server-assigned ids.
ClientSession make_session(const ScenarioConfig& config, RequestMode mode);

enum class TransportKind { kSim, kLive };

struct HarnessOptions {
  TransportKind transport = TransportKind::kSim;
  // Live mode: the discedge executable and a scratch dir for node configs.
  std::filesystem::path node_binary;
  std::filesystem::path work_dir;
};

// For each mode x repeat: fresh cluster, replay the messages along the
// mobility schedule, collect metrics. Failed turns are recorded, not
// thrown; the next message is sent with the same turn counter.
MetricsReport run_scenario(const ScenarioConfig& config, const HarnessOptions& options = {});

}  // namespace discedge

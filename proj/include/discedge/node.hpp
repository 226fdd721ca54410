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
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "discedge/context_manager.hpp"
#include "discedge/llm_stub.hpp"
#include "discedge/replicated_store.hpp"
#include "discedge/tokenizer.hpp"
#include "discedge/transport.hpp"
#include "discedge/wire.hpp"

namespace discedge {

struct ModelConfig {
  std::string name;  // as sent by clients, e.g. "Qwen/Qwen1.5-0.5B-Chat"
  std::filesystem::path vocab;
};

struct NodeConfig {
  std::string node_id;
  std::vector<ModelConfig> models;
  // Model name -> member node ids. Must be identical on every node.
  std::map<std::string, std::set<std::string>> keygroups;
  ConsistencyPolicy policy;
  HardwareProfile profile = HardwareProfile::m2();
  double ttl_s = 3600;
  // Socket mode only.
  std::string listen;
  std::map<std::string, std::string> peers;  // node id -> host:port
  double sync_delay_ms = 0;                  // emulated inter-node latency
  std::uint64_t seed = 0;

  // Throws ConfigError (e.g. a served model whose keygroup omits the node).
  void validate() const;
};

// YAML:
//   node_id: A
//   listen: 127.0.0.1:7001
//   profile: m2            # or a map with the four rates
//   ttl_s: 3600
//   sync_delay_ms: 15
//   policy: {mode: strong, max_retries: 3, backoff_ms: 10}
//   models: [{name: Qwen/Qwen1.5-0.5B-Chat, vocab: data/vocab/default.vocab}]
//   keygroups: {Qwen/Qwen1.5-0.5B-Chat: [A, B]}
//   peers: {B: 127.0.0.1:7002}
NodeConfig load_node_config(const std::filesystem::path& path);
void write_node_config(const std::filesystem::path& path, const NodeConfig& config);
HardwareProfile profile_from_yaml_text(const std::string& text);

// One edge node: replica, inference engine and context manager behind a
// single frame handler. Sync frames ("DCE1") go to the store; everything else
// is a JSON node API message answered with a JSON reply.
class Node {
 public:
  // Vocabs for configured models are loaded from disk unless supplied in
  // `vocabs` (keyed by model name).
  Node(NodeConfig config, Runtime& runtime, Transport& transport,
       const std::map<std::string, Vocab>& vocabs = {});

  const std::string& id() const { return config_.node_id; }
  const NodeConfig& config() const { return config_; }

  std::optional<Bytes> on_frame(ByteView frame);
  Json handle_message(const Json& message);
  // Binds on_frame to this node's endpoint.
  void attach();

  ReplicatedStore& store() { return *store_; }
  InferenceEngine& engine() { return *engine_; }
  ContextManager& manager() { return *manager_; }

 private:
  NodeConfig config_;
  Runtime& runtime_;
  Transport& transport_;
  std::unique_ptr<ReplicatedStore> store_;
  std::unique_ptr<InferenceEngine> engine_;
  std::unique_ptr<ContextManager> manager_;
};

// Serves `config` over TCP until SIGINT/SIGTERM. Returns the exit code.
int run_node_server(const NodeConfig& config);

}  // namespace discedge

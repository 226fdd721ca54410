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

#include "discedge/node.hpp"

#include <yaml-cpp/yaml.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <thread>

#include "discedge/errors.hpp"
#include "discedge/system_runtime.hpp"
#include "discedge/tcp_transport.hpp"

namespace discedge {

void NodeConfig::validate() const {
  if (node_id.empty()) throw ConfigError("node_id is required");
  if (ttl_s <= 0) throw ConfigError("ttl_s must be positive");
  policy.validate();
  profile.validate();
  for (const auto& m : models) {
    auto kg = keygroups.find(m.name);
    if (kg == keygroups.end() || !kg->second.contains(node_id)) {
      throw ConfigError("node " + node_id + " serves " + m.name +
                        " but is not in its keygroup");
    }
  }
}

namespace {

HardwareProfile profile_from_yaml(const YAML::Node& n) {
  if (!n) return HardwareProfile::m2();
  if (n.IsScalar()) return HardwareProfile::named(n.as<std::string>());
  HardwareProfile p;
  p.name = n["name"].as<std::string>("custom");
  p.tokenize_us_per_char = n["tokenize_us_per_char"].as<double>(0);
  p.prefill_us_per_token = n["prefill_us_per_token"].as<double>(0);
  p.decode_base_us_per_token = n["decode_base_us_per_token"].as<double>(0);
  p.decode_us_per_context_token = n["decode_us_per_context_token"].as<double>(0);
  p.validate();
  return p;
}

}  // namespace

HardwareProfile profile_from_yaml_text(const std::string& text) {
  return profile_from_yaml(YAML::Load(text));
}

NodeConfig load_node_config(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot read node config " + path.string() + ": " + e.what());
  }
  try {
    NodeConfig c;
    c.node_id = root["node_id"].as<std::string>();
    c.listen = root["listen"].as<std::string>("");
    c.profile = profile_from_yaml(root["profile"]);
    c.ttl_s = root["ttl_s"].as<double>(3600);
    c.sync_delay_ms = root["sync_delay_ms"].as<double>(0);
    c.seed = root["seed"].as<std::uint64_t>(0);
    if (auto p = root["policy"]) {
      c.policy.mode = parse_policy_mode(p["mode"].as<std::string>("strong"));
      c.policy.max_retries = p["max_retries"].as<std::uint32_t>(3);
      c.policy.backoff_ms = p["backoff_ms"].as<double>(10);
    }
    const auto base = path.parent_path();
    for (const auto& m : root["models"]) {
      std::filesystem::path vocab = m["vocab"].as<std::string>();
      if (vocab.is_relative()) vocab = base / vocab;
      c.models.push_back({m["name"].as<std::string>(), vocab});
    }
    for (const auto& kg : root["keygroups"]) {
      auto& members = c.keygroups[kg.first.as<std::string>()];
      for (const auto& member : kg.second) members.insert(member.as<std::string>());
    }
    for (const auto& peer : root["peers"]) {
      c.peers[peer.first.as<std::string>()] = peer.second.as<std::string>();
    }
    c.validate();
    return c;
  } catch (const YAML::Exception& e) {
    throw ConfigError("invalid node config " + path.string() + ": " + e.what());
  }
}

void write_node_config(const std::filesystem::path& path, const NodeConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "node_id" << YAML::Value << c.node_id;
  out << YAML::Key << "listen" << YAML::Value << c.listen;
  out << YAML::Key << "profile" << YAML::Value << YAML::BeginMap
      << YAML::Key << "name" << YAML::Value << c.profile.name
      << YAML::Key << "tokenize_us_per_char" << YAML::Value << c.profile.tokenize_us_per_char
      << YAML::Key << "prefill_us_per_token" << YAML::Value << c.profile.prefill_us_per_token
      << YAML::Key << "decode_base_us_per_token" << YAML::Value
      << c.profile.decode_base_us_per_token << YAML::Key << "decode_us_per_context_token"
      << YAML::Value << c.profile.decode_us_per_context_token << YAML::EndMap;
  out << YAML::Key << "ttl_s" << YAML::Value << c.ttl_s;
  out << YAML::Key << "sync_delay_ms" << YAML::Value << c.sync_delay_ms;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "policy" << YAML::Value << YAML::BeginMap
      << YAML::Key << "mode" << YAML::Value << std::string(policy_mode_name(c.policy.mode))
      << YAML::Key << "max_retries" << YAML::Value << c.policy.max_retries
      << YAML::Key << "backoff_ms" << YAML::Value << c.policy.backoff_ms << YAML::EndMap;
  out << YAML::Key << "models" << YAML::Value << YAML::BeginSeq;
  for (const auto& m : c.models) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << m.name << YAML::Key
        << "vocab" << YAML::Value << std::filesystem::absolute(m.vocab).string()
        << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "keygroups" << YAML::Value << YAML::BeginMap;
  for (const auto& [model, members] : c.keygroups) {
    out << YAML::Key << model << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& m : members) out << m;
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
  out << YAML::Key << "peers" << YAML::Value << YAML::BeginMap;
  for (const auto& [id, addr] : c.peers) out << YAML::Key << id << YAML::Value << addr;
  out << YAML::EndMap;
  out << YAML::EndMap;
  std::ofstream file(path);
  if (!file) throw ConfigError("cannot write " + path.string());
  file << out.c_str() << "\n";
}

Node::Node(NodeConfig config, Runtime& runtime, Transport& transport,
           const std::map<std::string, Vocab>& vocabs)
    : config_(std::move(config)), runtime_(runtime), transport_(transport) {
  config_.validate();
  store_ = std::make_unique<ReplicatedStore>(
      config_.node_id, runtime_, transport_,
      from_ms(config_.ttl_s * 1000.0));
  for (const auto& [model, members] : config_.keygroups) {
    store_->create_keygroup(model_id_from_name(model), members);
  }
  engine_ = std::make_unique<InferenceEngine>(config_.profile, runtime_);
  ContextManagerOptions options;
  options.node_id = config_.node_id;
  options.policy = config_.policy;
  options.ttl = from_ms(config_.ttl_s * 1000.0);
  options.id_seed = config_.seed;
  for (const auto& m : config_.models) {
    const std::string model_id = model_id_from_name(m.name);
    auto it = vocabs.find(m.name);
    if (it != vocabs.end()) {
      engine_->load_model(Vocab::from_entries(model_id, it->second.entries()));
    } else {
      engine_->load_model(Vocab::load(m.vocab, model_id));
    }
    options.served_models.insert(model_id);
  }
  manager_ = std::make_unique<ContextManager>(std::move(options), *store_, *engine_, runtime_);
}

void Node::attach() {
  transport_.bind(config_.node_id,
                  [this](const std::string&, ByteView frame) { return on_frame(frame); });
}

std::optional<Bytes> Node::on_frame(ByteView frame) {
  if (is_sync_frame(frame)) {
    try {
      store_->on_frame(frame);
    } catch (const std::exception& e) {
      spdlog::warn("[{}] dropping bad sync frame: {}", config_.node_id, e.what());
    }
    return std::nullopt;
  }
  Json reply;
  try {
    reply = handle_message(decode_json(frame));
  } catch (const std::exception& e) {
    reply = error_to_json(e);
  }
  return encode_json(reply);
}

Json Node::handle_message(const Json& message) {
  const std::string type = message.value("type", std::string{});
  if (type == "completion") {
    return response_to_json(manager_->handle_completion(request_from_json(message)));
  }
  if (type == "delete_session") {
    ContextKey key{model_id_from_name(message.value("model", std::string{})),
                   message.value("user_id", std::string{}),
                   message.value("session_id", std::string{})};
    manager_->delete_session(key);
    return Json{{"type", "delete_ok"}};
  }
  if (type == "health") {
    Json models = Json::array();
    for (const auto& m : config_.models) models.push_back(m.name);
    return Json{{"type", "health_ok"}, {"node_id", config_.node_id}, {"models", models}};
  }
  if (type == "stats") {
    Json sync = Json::object();
    for (const auto& [peer, c] : store_->sync_counters()) {
      sync[peer] = {{"frames_sent", c.frames_sent},
                    {"bytes_sent", c.bytes_sent},
                    {"frames_received", c.frames_received},
                    {"bytes_received", c.bytes_received}};
    }
    const auto s = manager_->stats();
    return Json{{"type", "stats_ok"},
                {"node_id", config_.node_id},
                {"sync", sync},
                {"write_backs", s.write_backs},
                {"write_back_failures", s.write_back_failures}};
  }
  if (type == "reset") {
    store_->clear();
    store_->reset_counters();
    return Json{{"type", "reset_ok"}};
  }
  throw BadRequestError("unknown message type '" + type + "'");
}

namespace {
std::atomic<bool> g_stop{false};
extern "C" void handle_stop_signal(int) { g_stop = true; }
}  // namespace

int run_node_server(const NodeConfig& config) {
  if (config.listen.empty()) throw ConfigError("node " + config.node_id + " has no listen address");
  std::map<std::string, std::string> addresses = config.peers;
  addresses[config.node_id] = config.listen;
  TcpTransport::Options options;
  options.send_delay = std::chrono::milliseconds(std::llround(config.sync_delay_ms));
  SystemRuntime runtime;
  TcpTransport transport(std::move(addresses), options);
  Node node(config, runtime, transport);
  node.attach();
  spdlog::info("[{}] listening on {}", config.node_id, config.listen);

  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  spdlog::info("[{}] shutting down", config.node_id);
  transport.stop();
  return 0;
}

}  // namespace discedge

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

#include "discedge/scenario.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "discedge/errors.hpp"
#include "discedge/node.hpp"

namespace discedge {
namespace {

template <typename T>
T scalar(const YAML::Node& n, const char* what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(std::string("scenario: bad value for ") + what);
  }
}

std::vector<std::string> parse_messages(const YAML::Node& n) {
  std::vector<std::string> out;
  if (n.IsSequence()) {
    for (const auto& m : n) out.push_back(scalar<std::string>(m, "messages"));
    return out;
  }
  if (!n.IsScalar()) throw ConfigError("scenario: messages must be a list");
  // A numbered block folds into one plain scalar: 1. "a" 2. "b" ...
  static const std::regex item(R"re((\d+)\.\s+"((?:[^"\\]|\\.)*)")re");
  const std::string text = n.Scalar();
  std::size_t expected = 1;
  for (std::sregex_iterator it(text.begin(), text.end(), item), end; it != end; ++it) {
    if (std::stoul((*it)[1].str()) != expected++) {
      throw ConfigError("scenario: messages are not numbered 1, 2, 3, ...");
    }
    out.push_back((*it)[2].str());
  }
  if (out.empty()) throw ConfigError("scenario: no messages found");
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

HardwareProfile parse_profile(const YAML::Node& n) {
  if (n.IsScalar()) return HardwareProfile::named(n.Scalar());
  return profile_from_yaml_text(YAML::Dump(n));
}

void parse_harness(const YAML::Node& h, const std::filesystem::path& base,
                   ScenarioConfig& c) {
  if (auto n = h["modes"]) {
    c.modes.clear();
    for (const auto& m : n) {
      try {
        c.modes.push_back(parse_request_mode(scalar<std::string>(m, "modes")));
      } catch (const BadRequestError& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
      }
    }
  }
  if (auto n = h["repeats"]) c.repeats = scalar<std::uint32_t>(n, "repeats");
  if (auto n = h["seed"]) c.seed = scalar<std::uint64_t>(n, "seed");
  if (auto n = h["nodes"]) {
    c.nodes.clear();
    c.profiles.clear();
    if (n.IsMap()) {
      for (const auto& kv : n) {
        const auto id = scalar<std::string>(kv.first, "nodes");
        c.nodes.push_back(id);
        c.profiles[id] = parse_profile(kv.second);
      }
    } else {
      for (const auto& id : n) c.nodes.push_back(scalar<std::string>(id, "nodes"));
    }
  }
  if (auto n = h["mobility"]) {
    c.mobility.clear();
    for (const auto& id : n) c.mobility.push_back(scalar<std::string>(id, "mobility"));
  }
  if (auto n = h["links"]) {
    if (auto v = n["node_latency_ms"]) c.node_latency_ms = scalar<double>(v, "node_latency_ms");
    if (auto v = n["client_latency_ms"]) {
      c.client_latency_ms = scalar<double>(v, "client_latency_ms");
    }
    if (auto v = n["jitter_ms"]) c.jitter_ms = scalar<double>(v, "jitter_ms");
    if (auto v = n["overrides"]) {
      for (const auto& l : v) {
        LinkSpec spec;
        spec.from = scalar<std::string>(l["from"], "links.from");
        spec.to = scalar<std::string>(l["to"], "links.to");
        spec.latency_ms = l["latency_ms"] ? scalar<double>(l["latency_ms"], "latency_ms")
                                          : c.node_latency_ms;
        if (l["jitter_ms"]) spec.jitter_ms = scalar<double>(l["jitter_ms"], "jitter_ms");
        if (l["partitioned"]) spec.partitioned = scalar<bool>(l["partitioned"], "partitioned");
        c.links.push_back(spec);
      }
    }
  }
  if (auto n = h["policy"]) {
    if (auto v = n["mode"]) c.policy.mode = parse_policy_mode(scalar<std::string>(v, "policy.mode"));
    if (auto v = n["max_retries"]) c.policy.max_retries = scalar<std::uint32_t>(v, "max_retries");
    if (auto v = n["backoff_ms"]) c.policy.backoff_ms = scalar<double>(v, "backoff_ms");
  }
  if (auto n = h["params"]) {
    if (auto v = n["seed"]) c.params.seed = scalar<std::int64_t>(v, "params.seed");
    if (auto v = n["temperature"]) c.params.temperature = scalar<double>(v, "temperature");
    if (auto v = n["max_tokens"]) c.params.max_tokens = scalar<std::uint32_t>(v, "max_tokens");
  }
  if (auto n = h["ttl_s"]) c.ttl_s = scalar<double>(n, "ttl_s");
  if (auto n = h["vocab"]) c.vocab = resolve(base, scalar<std::string>(n, "vocab"));
  if (auto n = h["system_prompt"]) c.system_prompt = scalar<std::string>(n, "system_prompt");
  if (auto n = h["fault"]) {
    KillFault f;
    f.node = scalar<std::string>(n["kill"], "fault.kill");
    f.after_message = scalar<std::size_t>(n["after_message"], "fault.after_message");
    c.kill = f;
  }
  if (auto n = h["live"]) {
    if (auto v = n["host"]) c.live_host = scalar<std::string>(v, "live.host");
    if (auto v = n["base_port"]) c.base_port = scalar<std::uint16_t>(v, "live.base_port");
  }
}

}  // namespace

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("DISCEDGE_DATA_DIR")) return env;
  return DISCEDGE_DATA_DIR;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

const HardwareProfile& ScenarioConfig::profile_of(const std::string& node) const {
  static const HardwareProfile fallback = HardwareProfile::m2();
  auto it = profiles.find(node);
  return it == profiles.end() ? fallback : it->second;
}

void ScenarioConfig::validate() const {
  if (messages.empty()) throw ConfigError("scenario has no messages");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (modes.empty()) throw ConfigError("scenario has no modes");
  if (model_name.empty()) throw ConfigError("scenario has no model_name");
  if (nodes.empty()) throw ConfigError("scenario has no nodes");
  const std::set<std::string> ids(nodes.begin(), nodes.end());
  if (ids.size() != nodes.size()) throw ConfigError("duplicate node id");
  for (const auto& id : nodes) {
    if (id.empty() || id == "client") throw ConfigError("bad node id '" + id + "'");
  }
  for (const auto& id : mobility) {
    if (!ids.contains(id)) throw ConfigError("mobility names unknown node " + id);
  }
  for (const auto& l : links) {
    if ((l.from != "client" && !ids.contains(l.from)) ||
        (l.to != "client" && !ids.contains(l.to))) {
      throw ConfigError("link override names unknown endpoint");
    }
  }
  if (kill && !ids.contains(kill->node)) throw ConfigError("fault names unknown node");
  if (node_latency_ms < 0 || client_latency_ms < 0 || jitter_ms < 0) {
    throw ConfigError("latencies must be non-negative");
  }
  if (ttl_s <= 0) throw ConfigError("ttl_s must be positive");
  if (params.max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  policy.validate();
  for (const auto& [_, p] : profiles) p.validate();
}

ScenarioConfig parse_scenario(const std::string& yaml_text,
                              const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("scenario: top level must be a map");
  ScenarioConfig c;
  c.vocab = default_data_dir() / "vocab" / "default.vocab";
  try {
    if (auto n = root["name"]) c.name = scalar<std::string>(n, "name");
    if (auto n = root["model_name"]) c.model_name = scalar<std::string>(n, "model_name");
    if (auto n = root["user_id"]) c.user_id = scalar<std::string>(n, "user_id");
    if (auto n = root["messages"]) c.messages = parse_messages(n);
    if (auto h = root["harness"]) parse_harness(h, base_dir, c);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

ScenarioConfig default_scenario() {
  ScenarioConfig c;
  c.name = "Robotics and Autonomous Systems Test";
  c.model_name = "Qwen/Qwen1.5-0.5B-Chat";
  c.user_id = "robotics_dev";
  c.messages = read_lines(default_data_dir() / "corpus" / "robotics_messages.txt");
  c.vocab = default_data_dir() / "vocab" / "default.vocab";
  return c;
}

void apply_seed_override(ScenarioConfig& config) {
  const char* env = std::getenv("DISCEDGE_SEED");
  if (env == nullptr || *env == '\0') return;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string_view(env).size()) throw std::invalid_argument(env);
    config.seed = v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("DISCEDGE_SEED is not an integer: ") + env);
  }
}

}  // namespace discedge

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

#include "discedge/harness.hpp"

#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "discedge/errors.hpp"
#include "discedge/live_cluster.hpp"
#include "discedge/system_runtime.hpp"
#include "discedge/tcp_transport.hpp"

namespace discedge {

SimCluster::SimCluster(const ScenarioConfig& config, const Vocab& vocab,
                       std::uint64_t network_seed)
    : net_(sim_, network_seed), ids_(config.nodes), client_(kClientEndpoint, net_, sim_) {
  for (const auto& id : ids_) {
    net_.add_link({kClientEndpoint, id, config.client_latency_ms, config.jitter_ms, false});
    net_.add_link({id, kClientEndpoint, config.client_latency_ms, config.jitter_ms, false});
  }
  for (const auto& a : ids_) {
    for (const auto& b : ids_) {
      if (a != b) net_.add_link({a, b, config.node_latency_ms, config.jitter_ms, false});
    }
  }
  for (const auto& l : config.links) net_.add_link(l);

  const std::set<std::string> members(ids_.begin(), ids_.end());
  for (const auto& id : ids_) {
    NodeConfig nc;
    nc.node_id = id;
    nc.models = {{config.model_name, config.vocab}};
    nc.keygroups = {{config.model_name, members}};
    nc.policy = config.policy;
    nc.profile = config.profile_of(id);
    nc.ttl_s = config.ttl_s;
    nc.seed = network_seed;
    auto node = std::make_unique<Node>(std::move(nc), sim_, net_,
                                       std::map<std::string, Vocab>{{config.model_name, vocab}});
    node->attach();
    nodes_.emplace(id, std::move(node));
  }
}

Node& SimCluster::node(const std::string& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw HarnessError("no node " + id);
  return *it->second;
}

void SimCluster::kill(const std::string& id) {
  node(id);
  net_.unbind(id);
  std::vector<std::string> others = ids_;
  others.push_back(kClientEndpoint);
  for (const auto& other : others) {
    if (other == id) continue;
    net_.set_partitioned(id, other, true);
    net_.set_partitioned(other, id, true);
  }
}

std::map<std::pair<std::string, std::string>, PeerCounters> SimCluster::sync_counters() const {
  std::map<std::pair<std::string, std::string>, PeerCounters> out;
  for (const auto& [id, node] : nodes_) {
    for (const auto& [peer, c] : node->store().sync_counters()) out[{id, peer}] = c;
  }
  return out;
}

ClientSession make_session(const ScenarioConfig& config, RequestMode mode) {
  ClientSession s;
  s.model = config.model_name;
  s.user_id = config.user_id.empty() ? "user" : config.user_id;
  s.session_id = fmt::format("{:016x}{:016x}", mix64(config.seed), mix64(~config.seed));
  s.mode = mode;
  s.system_prompt = config.system_prompt;
  s.params = config.params;
  return s;
}

namespace {

// Runs one mode x repeat against any transport. `sync_of` reads current
// per-link sync counters; `kill` injects the configured fault.
struct RunHooks {
  Runtime& runtime;
  LlmClient& client;
  std::function<std::map<std::pair<std::string, std::string>, PeerCounters>()> sync_of;
  std::function<void(const std::string&)> kill;
};

void replay(const ScenarioConfig& config, RequestMode mode, std::uint32_t repeat,
            RunHooks& hooks, MetricsReport& report) {
  const MobilitySchedule schedule =
      config.mobility.empty() ? MobilitySchedule::fixed(config.nodes.front())
                              : MobilitySchedule(config.mobility);
  ClientSession session = make_session(config, mode);
  const std::string mode_name(request_mode_name(mode));

  for (std::size_t i = 1; i <= config.messages.size(); ++i) {
    TurnRecord rec;
    rec.mode = mode_name;
    rec.repeat = repeat;
    rec.message = i;
    rec.turn = session.turn;
    rec.node = schedule.node_for(i);
    const Nanos start = hooks.runtime.now();
    try {
      AskResult r = hooks.client.ask(session, rec.node, config.messages[i - 1]);
      const auto& m = r.metrics;
      rec.response_time_ms = m.response_time_ms;
      rec.tokens_per_second = m.tokens_per_second;
      rec.request_bytes = m.request_bytes;
      rec.tokens_generated = m.tokens_generated;
      rec.consistency = std::string(consistency_name(m.consistency));
      rec.retries = m.retries;
      rec.tokenize_ms = m.timings.tokenize_ms;
      rec.inference_ms = m.timings.inference_ms;
      rec.input_tokens = m.input_tokens;
      rec.input_fingerprint = m.input_fingerprint;
      rec.output_hash = hash64(0, "", m.token_ids);
      rec.token_ids = m.token_ids;
    } catch (const Error& e) {
      rec.ok = false;
      rec.error = e.code();
      rec.response_time_ms = to_ms(hooks.runtime.now() - start);
      spdlog::warn("{} repeat {} message {} at {}: {}", mode_name, repeat, i, rec.node,
                   e.what());
    }
    report.turns.push_back(std::move(rec));

    const auto counters = hooks.sync_of();
    for (const auto& from : config.nodes) {
      for (const auto& to : config.nodes) {
        if (from == to) continue;
        auto it = counters.find({from, to});
        report.sync.push_back({mode_name, repeat, i, from, to,
                               it == counters.end() ? 0 : it->second.bytes_sent});
      }
    }
    if (config.kill && config.kill->after_message == i) hooks.kill(config.kill->node);
  }
}

void record_totals(const ScenarioConfig& config, RequestMode mode, std::uint32_t repeat,
                   const std::map<std::pair<std::string, std::string>, PeerCounters>& counters,
                   MetricsReport& report) {
  for (const auto& from : config.nodes) {
    for (const auto& to : config.nodes) {
      if (from == to) continue;
      auto it = counters.find({from, to});
      const PeerCounters c = it == counters.end() ? PeerCounters{} : it->second;
      report.sync_totals.push_back({std::string(request_mode_name(mode)), repeat, from, to,
                                    c.frames_sent, c.bytes_sent});
    }
  }
}

void run_sim(const ScenarioConfig& config, const Vocab& vocab, RequestMode mode,
             std::uint32_t repeat, MetricsReport& report) {
  SimCluster cluster(config, vocab, mix64(config.seed) + repeat);
  RunHooks hooks{cluster.sim(), cluster.client(), [&] { return cluster.sync_counters(); },
                 [&](const std::string& id) { cluster.kill(id); }};
  replay(config, mode, repeat, hooks, report);
  cluster.sim().run_all();
  record_totals(config, mode, repeat, cluster.sync_counters(), report);
}

std::map<std::pair<std::string, std::string>, PeerCounters> live_counters(
    LlmClient& client, const LiveCluster& cluster, const ScenarioConfig& config,
    std::map<std::pair<std::string, std::string>, PeerCounters>& last) {
  for (const auto& id : config.nodes) {
    if (!cluster.running(id)) continue;
    try {
      const Json stats = client.call(id, Json{{"type", "stats"}});
      for (const auto& [peer, c] : stats.at("sync").items()) {
        PeerCounters& pc = last[{id, peer}];
        pc.frames_sent = c.at("frames_sent").get<std::uint64_t>();
        pc.bytes_sent = c.at("bytes_sent").get<std::uint64_t>();
        pc.frames_received = c.at("frames_received").get<std::uint64_t>();
        pc.bytes_received = c.at("bytes_received").get<std::uint64_t>();
      }
    } catch (const Error& e) {
      spdlog::warn("stats from {} failed: {}", id, e.what());
    }
  }
  return last;
}

void run_live(const ScenarioConfig& config, RequestMode mode, std::uint32_t repeat,
              const HarnessOptions& options, MetricsReport& report) {
  const auto binary = options.node_binary.empty() ? locate_node_binary() : options.node_binary;
  if (binary.empty()) throw HarnessError("cannot find the discedge executable for live mode");
  const auto base = options.work_dir.empty()
                        ? std::filesystem::temp_directory_path() / "discedge-live"
                        : options.work_dir;
  LiveCluster cluster(config, binary,
                      base / fmt::format("{}-{}", request_mode_name(mode), repeat));
  cluster.start();

  SystemRuntime runtime;
  TcpTransport net(cluster.addresses());
  LlmClient client(kClientEndpoint, net, runtime);
  std::map<std::pair<std::string, std::string>, PeerCounters> last;
  RunHooks hooks{runtime, client, [&] { return live_counters(client, cluster, config, last); },
                 [&](const std::string& id) { cluster.kill(id); }};
  replay(config, mode, repeat, hooks, report);
  // Let delayed replication frames land before reading the totals.
  std::this_thread::sleep_for(std::chrono::milliseconds(200) +
                              std::chrono::milliseconds(std::llround(2 * config.node_latency_ms)));
  record_totals(config, mode, repeat, live_counters(client, cluster, config, last), report);
  net.stop();
  cluster.stop();
}

}  // namespace

MetricsReport run_scenario(const ScenarioConfig& input, const HarnessOptions& options) {
  ScenarioConfig config = input;
  apply_seed_override(config);
  config.validate();

  MetricsReport report;
  report.scenario = config.name;
  report.seed = config.seed;
  report.transport = options.transport == TransportKind::kSim ? "sim" : "live";

  std::optional<Vocab> vocab;
  if (options.transport == TransportKind::kSim) {
    vocab = Vocab::load(config.vocab, model_id_from_name(config.model_name));
  }
  for (const RequestMode mode : config.modes) {
    for (std::uint32_t repeat = 0; repeat < config.repeats; ++repeat) {
      if (options.transport == TransportKind::kSim) {
        run_sim(config, *vocab, mode, repeat, report);
      } else {
        run_live(config, mode, repeat, options, report);
      }
    }
  }
  return report;
}

}  // namespace discedge

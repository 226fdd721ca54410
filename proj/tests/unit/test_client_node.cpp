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

#include <gtest/gtest.h>

#include <fstream>
#include <unistd.h>

#include "discedge/client.hpp"
#include "discedge/errors.hpp"
#include "edge.hpp"

namespace discedge {
namespace {

using testutil::Edge;
using testutil::EdgeOptions;
using testutil::kClient;
using testutil::kModel;

ClientSession session(RequestMode mode) {
  ClientSession s;
  s.model = kModel;
  s.mode = mode;
  s.params.max_tokens = 16;
  return s;
}

TEST(Mobility, Schedules) {
  const auto alt = MobilitySchedule::alternating("A", "B");
  const std::vector<std::string> expected = {"A", "A", "B", "B", "A", "A", "B", "B", "B"};
  for (std::uint64_t t = 1; t <= 9; ++t) EXPECT_EQ(alt.node_for(t), expected[t - 1]);
  EXPECT_EQ(alt.node_for(2), "A");
  EXPECT_EQ(alt.node_for(3), "B");
  EXPECT_EQ(alt.node_for(10), "B");
  EXPECT_EQ(roam(alt, 5), "A");
  EXPECT_THROW(alt.node_for(0), BadRequestError);
  EXPECT_EQ(MobilitySchedule::fixed("C").node_for(42), "C");
  EXPECT_THROW(MobilitySchedule({}), ConfigError);
}

TEST(Client, BuildRequestPerMode) {
  Edge e;
  LlmClient client(kClient, e.net, e.sim);
  auto s = session(RequestMode::kClientSide);
  s.system_prompt = "sys";
  s.turn = 5;
  for (int i = 0; i < 4; ++i) {
    s.local_history.push_back({Role::kUser, "q"});
    s.local_history.push_back({Role::kAssistant, "a"});
  }
  auto req = client.build_request(s, "p");
  ASSERT_TRUE(req.history);
  EXPECT_EQ(req.history->size(), 8u);
  EXPECT_EQ(req.system_prompt, "sys");
  EXPECT_NO_THROW(req.validate());

  s.mode = RequestMode::kTokenized;
  req = client.build_request(s, "p");
  EXPECT_FALSE(req.history);
  EXPECT_FALSE(req.system_prompt);
  s.turn = 1;
  EXPECT_EQ(client.build_request(s, "p").system_prompt, "sys");
}

TEST(Client, AskAdvancesSession) {
  Edge e;
  LlmClient client(kClient, e.net, e.sim);
  auto s = session(RequestMode::kTokenized);
  for (std::uint64_t t = 1; t <= 3; ++t) {
    const auto before = e.net.link_stats(kClient, "A").bytes_sent;
    const auto r = client.ask(s, "A", "message " + std::to_string(t));
    EXPECT_EQ(r.metrics.turn, t);
    EXPECT_EQ(s.turn, t + 1);
    EXPECT_EQ(s.local_history.size(), 2 * t);
    EXPECT_EQ(s.local_history.back().text, r.text);
    EXPECT_EQ(r.metrics.request_bytes, e.net.link_stats(kClient, "A").bytes_sent - before);
    EXPECT_EQ(r.metrics.tokens_generated, 16u);
    EXPECT_NEAR(r.metrics.response_time_ms, 10.0 + r.metrics.timings.total_ms, 1e-6);
    EXPECT_NEAR(r.metrics.tokens_per_second,
                16 / (r.metrics.timings.inference_ms / 1000.0), 1e-9);
    e.sim.run_all();
  }
  EXPECT_EQ(s.user_id.size(), 32u);
}

TEST(Client, ClientSideCarriesGrowingHistory) {
  Edge e;
  LlmClient client(kClient, e.net, e.sim);
  auto s = session(RequestMode::kClientSide);
  std::size_t prev = 0;
  for (int t = 1; t <= 5; ++t) {
    const auto r = client.ask(s, t % 2 ? "A" : "B", "same prompt");
    EXPECT_EQ(r.metrics.consistency, Consistency::kFresh);
    EXPECT_GT(r.metrics.request_bytes, prev);
    prev = r.metrics.request_bytes;
  }
  EXPECT_EQ(s.local_history.size(), 10u);
}

TEST(Client, FailedTurnLeavesSessionUntouched) {
  EdgeOptions o;
  o.node_latency_ms = 50;
  Edge e(o);
  LlmClient client(kClient, e.net, e.sim);
  auto s = session(RequestMode::kTokenized);
  client.ask(s, "A", "first");
  const auto snapshot = s.local_history;
  EXPECT_THROW(client.ask(s, "B", "second"), StaleContextError);
  EXPECT_EQ(s.turn, 2u);
  EXPECT_EQ(s.local_history, snapshot);
  e.sim.run_all();
  EXPECT_EQ(client.ask(s, "B", "second").metrics.consistency, Consistency::kFresh);
}

TEST(Client, DeleteSession) {
  Edge e;
  LlmClient client(kClient, e.net, e.sim);
  auto s = session(RequestMode::kRaw);
  client.ask(s, "A", "hi");
  e.sim.run_all();
  client.delete_session(s, "B");
  e.sim.run_all();
  const ContextKey k{model_id_from_name(kModel), s.user_id, s.session_id};
  EXPECT_FALSE(e.at("A").store().get(k.storage_key()));
  EXPECT_FALSE(e.at("B").store().get(k.storage_key()));
}

TEST(NodeApi, HealthStatsReset) {
  Edge e;
  LlmClient client(kClient, e.net, e.sim);
  const auto health = client.call("A", Json{{"type", "health"}});
  EXPECT_EQ(health["type"], "health_ok");
  EXPECT_EQ(health["node_id"], "A");
  EXPECT_EQ(health["models"][0], kModel);

  auto s = session(RequestMode::kTokenized);
  client.ask(s, "A", "hi");
  e.sim.run_all();
  const auto stats = client.call("A", Json{{"type", "stats"}});
  EXPECT_EQ(stats["write_backs"], 1);
  EXPECT_EQ(stats["sync"]["B"]["bytes_sent"].get<std::uint64_t>(),
            e.net.link_stats("A", "B").bytes_sent);

  EXPECT_EQ(client.call("A", Json{{"type", "reset"}})["type"], "reset_ok");
  EXPECT_TRUE(e.at("A").store().snapshot().empty());
  EXPECT_EQ(e.at("A").store().sync_bytes_sent(), 0u);

  try {
    client.call("A", Json{{"type", "bogus"}});
    FAIL() << "expected an error reply";
  } catch (const BadRequestError& err) {
    EXPECT_EQ(err.code(), "bad_request");
  }
  const Bytes garbage = {'{', 'x'};
  const auto reply = decode_json(e.net.request(kClient, "A", garbage));
  EXPECT_EQ(reply["type"], "error");
  EXPECT_EQ(reply["code"], "decode_error");
}

TEST(NodeConfig, YamlRoundTrip) {
  NodeConfig c;
  c.node_id = "A";
  c.listen = "127.0.0.1:7001";
  c.models = {{kModel, default_data_dir() / "vocab" / "default.vocab"}};
  c.keygroups[kModel] = {"A", "B"};
  c.policy = {ConsistencyPolicy::Mode::kAvailable, 5, 2.5};
  c.profile = HardwareProfile::tx2();
  c.ttl_s = 60;
  c.peers["B"] = "127.0.0.1:7002";
  c.sync_delay_ms = 15;
  c.seed = 9;
  const auto path = std::filesystem::temp_directory_path() /
                    ("discedge_node_" + std::to_string(::getpid()) + ".yaml");
  write_node_config(path, c);
  const auto back = load_node_config(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.node_id, c.node_id);
  EXPECT_EQ(back.listen, c.listen);
  ASSERT_EQ(back.models.size(), 1u);
  EXPECT_EQ(back.models[0].name, kModel);
  EXPECT_EQ(back.keygroups, c.keygroups);
  EXPECT_EQ(back.policy.mode, c.policy.mode);
  EXPECT_EQ(back.policy.max_retries, 5u);
  EXPECT_EQ(back.policy.backoff_ms, 2.5);
  EXPECT_EQ(back.profile.decode_base_us_per_token, 7000);
  EXPECT_EQ(back.ttl_s, 60);
  EXPECT_EQ(back.peers, c.peers);
  EXPECT_EQ(back.sync_delay_ms, 15);
  EXPECT_EQ(back.seed, 9u);
}

TEST(NodeConfig, Validation) {
  NodeConfig c;
  EXPECT_THROW(c.validate(), ConfigError);
  c.node_id = "A";
  c.models = {{kModel, {}}};
  EXPECT_THROW(c.validate(), ConfigError);
  c.keygroups[kModel] = {"B"};
  EXPECT_THROW(c.validate(), ConfigError);
  c.keygroups[kModel] = {"A", "B"};
  EXPECT_NO_THROW(c.validate());
  c.ttl_s = 0;
  EXPECT_THROW(c.validate(), ConfigError);

  const auto path = std::filesystem::temp_directory_path() /
                    ("discedge_bad_" + std::to_string(::getpid()) + ".yaml");
  std::ofstream(path) << "node_id: A\npolicy: {mode: eventually}\n";
  EXPECT_THROW(load_node_config(path), ConfigError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_node_config(path), ConfigError);
  EXPECT_THROW(profile_from_yaml_text("gpu"), ConfigError);
  EXPECT_EQ(profile_from_yaml_text("{decode_base_us_per_token: 9}").decode_base_us_per_token, 9);
}

}  // namespace
}  // namespace discedge

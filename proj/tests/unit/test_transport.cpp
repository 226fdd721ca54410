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

#include <atomic>
#include <random>
#include <thread>

#include "discedge/errors.hpp"
#include "discedge/sim_network.hpp"
#include "discedge/system_runtime.hpp"
#include "discedge/tcp_transport.hpp"

namespace discedge {
namespace {

using namespace std::chrono_literals;

Bytes frame_of(std::size_t n, std::uint8_t fill = 0) { return Bytes(n, fill); }

struct Recorder {
  std::vector<std::tuple<Nanos, std::string, Bytes>> got;
  FrameHandler handler(Simulator& sim) {
    return [this, &sim](const std::string& from, ByteView f) {
      got.emplace_back(sim.now(), from, Bytes(f.begin(), f.end()));
      return std::optional<Bytes>{};
    };
  }
};

TEST(Simulator, OrdersByTimeThenLaneThenSequence) {
  Simulator sim;
  std::vector<int> order;
  sim.schedule_at(Nanos{10}, 2, [&] { order.push_back(3); });
  sim.schedule_at(Nanos{10}, 1, [&] { order.push_back(2); });
  sim.schedule_at(Nanos{5}, 9, [&] { order.push_back(1); });
  sim.schedule_at(Nanos{10}, 1, [&] { order.push_back(4); });
  sim.run_all();
  EXPECT_EQ(order, (std::vector<int>{1, 2, 4, 3}));
  EXPECT_EQ(sim.now(), Nanos{10});
}

TEST(Simulator, SleepRunsNestedEvents) {
  Simulator sim;
  bool fired = false;
  sim.schedule(3ms, [&] { fired = true; });
  sim.sleep_for(5ms);
  EXPECT_TRUE(fired);
  EXPECT_EQ(sim.now(), Nanos{5ms});
}

TEST(SimNetwork, DeliversAfterLatencyAndCountsPrefix) {
  Simulator sim;
  SimNetwork net(sim, 0);
  net.add_link({"a", "b", 5.0, 0.0, false});
  Recorder r;
  net.bind("b", r.handler(sim));
  net.send("a", "b", frame_of(100));
  EXPECT_EQ(net.link_stats("a", "b").bytes_sent, 104u);
  EXPECT_EQ(net.advance_clock(4ms), 0u);
  EXPECT_EQ(net.advance_clock(1ms), 1u);
  ASSERT_EQ(r.got.size(), 1u);
  EXPECT_EQ(std::get<0>(r.got[0]), Nanos{5ms});
  EXPECT_EQ(std::get<1>(r.got[0]), "a");
  EXPECT_TRUE(sim.idle());
}

TEST(SimNetwork, UnknownLinkIsRoutingError) {
  Simulator sim;
  SimNetwork net(sim, 0);
  EXPECT_THROW(net.send("a", "b", frame_of(1)), RoutingError);
  EXPECT_THROW(net.link_stats("a", "b"), RoutingError);
  EXPECT_THROW(net.add_link({"a", "b", -1.0, 0.0, false}), ConfigError);
}

TEST(SimNetwork, PartitionDropsAndCounts) {
  Simulator sim;
  SimNetwork net(sim, 0);
  net.add_link({"a", "b", 5.0, 0.0, true});
  Recorder r;
  net.bind("b", r.handler(sim));
  net.send("a", "b", frame_of(10));
  sim.run_all();
  EXPECT_TRUE(r.got.empty());
  EXPECT_EQ(net.link_stats("a", "b").frames_dropped, 1u);
  EXPECT_EQ(net.link_stats("a", "b").bytes_delivered, 0u);
}

TEST(SimNetwork, PartitionCutsFramesInFlight) {
  Simulator sim;
  SimNetwork net(sim, 0);
  net.add_link({"a", "b", 5.0, 0.0, false});
  Recorder r;
  net.bind("b", r.handler(sim));
  net.send("a", "b", frame_of(10));
  net.set_partitioned("a", "b", true);
  sim.run_all();
  EXPECT_TRUE(r.got.empty());
  EXPECT_EQ(net.link_stats("a", "b").frames_dropped, 1u);
}

TEST(SimNetwork, RequestReply) {
  Simulator sim;
  SimNetwork net(sim, 0);
  net.add_link({"c", "n", 5.0, 0.0, false});
  net.add_link({"n", "c", 5.0, 0.0, false});
  net.bind("n", [](const std::string&, ByteView f) {
    Bytes reply(f.begin(), f.end());
    reply.push_back('!');
    return std::optional<Bytes>(reply);
  });
  const Bytes reply = net.request("c", "n", Bytes{'h', 'i'});
  EXPECT_EQ(reply, (Bytes{'h', 'i', '!'}));
  EXPECT_EQ(sim.now(), Nanos{10ms});
  net.unbind("n");
  EXPECT_THROW(net.request("c", "n", Bytes{'x'}), TransportError);
}

// Random schedules: FIFO per link holds under any jitter seed, and the
// same seed reproduces the same timeline.
TEST(SimNetwork, FifoUnderJitterAndDeterministicPerSeed) {
  auto run = [](std::uint64_t seed) {
    Simulator sim;
    SimNetwork net(sim, seed);
    const std::vector<std::string> ids = {"a", "b", "c"};
    for (const auto& x : ids) {
      for (const auto& y : ids) {
        if (x != y) net.add_link({x, y, 3.0, 2.5, false});
      }
    }
    std::vector<std::tuple<Nanos, std::string, std::string, std::uint32_t>> timeline;
    for (const auto& id : ids) {
      net.bind(id, [&timeline, &sim, id](const std::string& from, ByteView f) {
        timeline.emplace_back(sim.now(), from, id, read_u32_be(f));
        return std::optional<Bytes>{};
      });
    }
    std::mt19937_64 rng(seed * 31 + 1);
    for (std::uint32_t i = 0; i < 300; ++i) {
      const auto& from = ids[rng() % 3];
      const auto& to = ids[(std::find(ids.begin(), ids.end(), from) - ids.begin() + 1 + rng() % 2) % 3];
      Bytes f;
      put_u32_be(f, i);
      net.send(from, to, f);
      if (rng() % 3 == 0) net.advance_clock(Nanos{static_cast<std::int64_t>(rng() % 2'000'000)});
    }
    sim.run_all();
    return timeline;
  };
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto t = run(seed);
    ASSERT_EQ(t.size(), 300u);
    std::map<std::pair<std::string, std::string>, std::uint32_t> last;
    Nanos prev{0};
    for (const auto& [at, from, to, seq] : t) {
      ASSERT_GE(at, prev);
      prev = at;
      auto key = std::make_pair(from, to);
      if (last.contains(key)) ASSERT_GT(seq, last[key]);
      last[key] = seq;
    }
    ASSERT_EQ(t, run(seed));
  }
}

TEST(SimNetwork, ConservationWhenNeverPartitioned) {
  Simulator sim;
  SimNetwork net(sim, 4);
  net.add_link({"a", "b", 1.0, 0.5, false});
  net.bind("b", [](const std::string&, ByteView) { return std::optional<Bytes>{}; });
  for (int i = 0; i < 50; ++i) net.send("a", "b", frame_of(static_cast<std::size_t>(i)));
  net.advance_clock(500us);
  const LinkStats mid = net.link_stats("a", "b");
  EXPECT_LE(mid.bytes_delivered, mid.bytes_sent);
  sim.run_all();
  const LinkStats end = net.link_stats("a", "b");
  EXPECT_EQ(end.bytes_delivered, end.bytes_sent);
  net.reset_stats();
  EXPECT_EQ(net.link_stats("a", "b").bytes_sent, 0u);
}

TEST(HostPort, Parse) {
  const HostPort hp = HostPort::parse("127.0.0.1:7001");
  EXPECT_EQ(hp.host, "127.0.0.1");
  EXPECT_EQ(hp.port, 7001);
  EXPECT_THROW(HostPort::parse("nohost"), ConfigError);
  EXPECT_THROW(HostPort::parse("h:99999"), ConfigError);
}

TEST(TcpTransport, RequestAndSendOverLoopback) {
  TcpTransport server(std::map<std::string, std::string>{{"n", "127.0.0.1:0"}});
  std::atomic<int> sends{0};
  server.bind("n", [&](const std::string&, ByteView f) -> std::optional<Bytes> {
    if (!f.empty() && f[0] == 'S') {
      sends++;
      return std::nullopt;
    }
    Bytes r(f.begin(), f.end());
    std::reverse(r.begin(), r.end());
    return r;
  });
  const std::string addr = "127.0.0.1:" + std::to_string(server.bound_port("n"));
  TcpTransport client({{"n", addr}});
  EXPECT_EQ(client.request("c", "n", Bytes{1, 2, 3}), (Bytes{3, 2, 1}));
  EXPECT_EQ(client.link_stats("c", "n").bytes_sent, 7u);
  EXPECT_EQ(client.link_stats("n", "c").bytes_delivered, 7u);
  for (int i = 0; i < 5; ++i) client.send("c", "n", Bytes{'S', static_cast<std::uint8_t>(i)});
  for (int i = 0; i < 200 && sends < 5; ++i) std::this_thread::sleep_for(5ms);
  EXPECT_EQ(sends.load(), 5);
  EXPECT_THROW(client.advance_clock(1ms), ModeError);
  EXPECT_THROW(client.send("c", "zz", Bytes{1}), RoutingError);
  client.stop();
  server.stop();
}

TEST(TcpTransport, UnreachablePeerIsTransportError) {
  std::uint16_t port;
  {
    Socket s = listen_on({"127.0.0.1", 0});
    port = local_port(s);
  }
  TcpTransport::Options o;
  o.connect_timeout = 200ms;
  TcpTransport client({{"n", "127.0.0.1:" + std::to_string(port)}}, o);
  EXPECT_THROW(client.request("c", "n", Bytes{1}), TransportError);
}

TEST(TcpTransport, SendDelayHoldsFrames) {
  TcpTransport server(std::map<std::string, std::string>{{"n", "127.0.0.1:0"}});
  std::atomic<bool> got{false};
  server.bind("n", [&](const std::string&, ByteView) {
    got = true;
    return std::optional<Bytes>{};
  });
  TcpTransport::Options o;
  o.send_delay = 100ms;
  TcpTransport client({{"n", "127.0.0.1:" + std::to_string(server.bound_port("n"))}}, o);
  const auto start = std::chrono::steady_clock::now();
  client.send("c", "n", Bytes{1});
  while (!got && std::chrono::steady_clock::now() - start < 2s) std::this_thread::sleep_for(1ms);
  EXPECT_TRUE(got);
  EXPECT_GE(std::chrono::steady_clock::now() - start, 95ms);
}

TEST(SystemRuntime, ScheduleRunsTasksInOrder) {
  SystemRuntime rt;
  std::mutex mu;
  std::vector<int> order;
  rt.schedule(20ms, [&] { std::lock_guard l(mu); order.push_back(2); });
  rt.schedule(5ms, [&] { std::lock_guard l(mu); order.push_back(1); });
  rt.sleep_for(40ms);
  rt.drain();
  std::lock_guard l(mu);
  EXPECT_EQ(order, (std::vector<int>{1, 2}));
}

}  // namespace
}  // namespace discedge

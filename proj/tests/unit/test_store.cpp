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

#include <memory>

#include "discedge/errors.hpp"
#include "discedge/replicated_store.hpp"
#include "discedge/sim_network.hpp"

namespace discedge {
namespace {

using namespace std::chrono_literals;

VersionedValue value(std::uint64_t version, std::string origin, std::string bytes = "x",
                     std::uint64_t expires_at_ms = 1'000'000) {
  return VersionedValue{Bytes(bytes.begin(), bytes.end()), version, std::move(origin),
                        expires_at_ms};
}

// Nodes A, B, C fully linked at 15 ms; keygroup "m" = {A, B}.
class StoreTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (const char* a : {"A", "B", "C"}) {
      for (const char* b : {"A", "B", "C"}) {
        if (std::string(a) != b) net.add_link({a, b, 15.0, 0.0, false});
      }
    }
    for (const char* id : {"A", "B", "C"}) {
      stores[id] = std::make_unique<ReplicatedStore>(id, sim, net);
      ReplicatedStore* s = stores[id].get();
      net.bind(id, [s](const std::string&, ByteView f) {
        s->on_frame(f);
        return std::optional<Bytes>{};
      });
    }
    stores["A"]->create_keygroup("m", {"A", "B"});
    stores["B"]->create_keygroup("m", {"A", "B"});
    stores["C"]->create_keygroup("m", {"A", "B"});
  }

  ReplicatedStore& at(const std::string& id) { return *stores.at(id); }

  Simulator sim;
  SimNetwork net{sim, 1};
  std::map<std::string, std::unique_ptr<ReplicatedStore>> stores;
};

TEST_F(StoreTest, PutReplicatesToKeygroupMembersAfterLatency) {
  EXPECT_FALSE(at("A").get("k").has_value());
  EXPECT_TRUE(at("A").put("m", "k", value(1, "A")));
  EXPECT_EQ(at("A").get("k")->version, 1u);
  sim.advance(14ms);
  EXPECT_FALSE(at("B").get("k").has_value());
  sim.advance(1ms);
  ASSERT_TRUE(at("B").get("k").has_value());
  EXPECT_EQ(at("B").get("k")->version, 1u);
  // Isolation: C is not a member and is never sent the key.
  sim.run_all();
  EXPECT_TRUE(at("C").snapshot().empty());
  EXPECT_EQ(net.link_stats("A", "C").frames_sent, 0u);
}

TEST_F(StoreTest, SingletonKeygroupReplicatesNowhere) {
  at("A").create_keygroup("solo", {"A"});
  at("A").put("solo", "k", value(1, "A"));
  sim.run_all();
  EXPECT_EQ(at("A").sync_bytes_sent(), 0u);
  EXPECT_EQ(net.link_stats("A", "B").frames_sent, 0u);
}

TEST_F(StoreTest, UnknownKeygroupOrNonMemberThrows) {
  EXPECT_THROW(at("A").put("nope", "k", value(1, "A")), NoKeygroupError);
  EXPECT_THROW(at("C").put("m", "k", value(1, "C")), NoKeygroupError);
  EXPECT_THROW(at("A").remove("nope", "k"), NoKeygroupError);
}

TEST_F(StoreTest, RedeclaringKeygroupWithOtherMembersThrows) {
  EXPECT_NO_THROW(at("A").create_keygroup("m", {"A", "B"}));
  EXPECT_THROW(at("A").create_keygroup("m", {"A", "C"}), ConfigError);
}

TEST_F(StoreTest, HigherVersionWinsAndLowerIsIgnored) {
  at("A").put("m", "k", value(1, "A"));
  at("B").apply_remote({"m", "k", value(1, "A"), UpdateOp::kPut});
  EXPECT_TRUE(at("B").apply_remote({"m", "k", value(2, "A", "y"), UpdateOp::kPut}));
  EXPECT_EQ(at("B").get("k")->version, 2u);
  EXPECT_FALSE(at("B").apply_remote({"m", "k", value(1, "A"), UpdateOp::kPut}));
  EXPECT_EQ(at("B").get("k")->version, 2u);
}

TEST_F(StoreTest, EqualVersionsGoToGreaterOriginEverywhere) {
  // Node ids here are "a"/"b" per the tie-break example; reuse A and B as
  // the hosts and put the origin in the value.
  at("A").put("m", "k", value(3, "a", "from-a"));
  at("B").put("m", "k", value(3, "b", "from-b"));
  sim.run_all();
  for (const char* id : {"A", "B"}) {
    const auto v = at(id).get("k");
    ASSERT_TRUE(v.has_value());
    EXPECT_EQ(v->origin_node, "b");
    EXPECT_EQ(to_string(v->bytes), "from-b");
  }
}

TEST_F(StoreTest, DeleteTombstonesEverywhere) {
  at("A").put("m", "k", value(4, "A"));
  sim.run_all();
  at("B").remove("m", "k");
  EXPECT_EQ(at("B").latest_version("k"), 5u);
  sim.run_all();
  EXPECT_FALSE(at("A").get("k").has_value());
  EXPECT_FALSE(at("B").get("k").has_value());
  EXPECT_EQ(at("A").latest_version("k"), 5u);
}

TEST_F(StoreTest, DeleteOfAbsentKeyIsTombstoneAtVersionOne) {
  at("A").remove("m", "k");
  EXPECT_EQ(at("A").latest_version("k"), 1u);
  EXPECT_FALSE(at("A").get("k").has_value());
}

TEST_F(StoreTest, ConcurrentPutAndDeleteAtSameVersionConverge) {
  at("A").put("m", "k", value(2, "A"));
  sim.run_all();
  at("A").put("m", "k", value(3, "A"));
  at("B").remove("m", "k");  // tombstone v3 from B
  sim.run_all();
  const auto a = at("A").snapshot();
  const auto b = at("B").snapshot();
  EXPECT_EQ(a, b);
  EXPECT_TRUE(a.at("k").tombstone);  // "B" > "A"
}

TEST_F(StoreTest, ExpiredValuesReadAsAbsent) {
  at("A").put("m", "k", value(1, "A", "x", 100));
  sim.advance(99ms);
  EXPECT_TRUE(at("A").get("k").has_value());
  sim.advance(1ms);
  EXPECT_FALSE(at("A").get("k").has_value());
  EXPECT_EQ(at("A").latest_version("k"), 0u);
}

TEST_F(StoreTest, SyncCountersCountFramePlusPrefix) {
  EXPECT_EQ(at("A").sync_bytes_sent(), 0u);
  const VersionedValue v = value(1, "A", "payload");
  const std::size_t frame = encode_update({"m", "k", v, UpdateOp::kPut}).size();
  at("A").put("m", "k", v);
  EXPECT_EQ(at("A").sync_counters().at("B").bytes_sent, frame + 4);
  EXPECT_EQ(at("A").sync_counters().at("B").frames_sent, 1u);
  sim.run_all();
  EXPECT_EQ(at("B").sync_counters().at("A").bytes_received, frame + 4);
  EXPECT_EQ(net.link_stats("A", "B").bytes_delivered, frame + 4);
  at("A").reset_counters();
  EXPECT_EQ(at("A").sync_bytes_sent(), 0u);
}

TEST(SyncFrame, ByteLayout) {
  const ReplicaUpdate u{"m", "k/u/s", VersionedValue{Bytes{9, 8}, 300, "A", 5}, UpdateOp::kPut};
  const Bytes f = encode_update(u);
  const Bytes expected = {'D', 'C', 'E', '1', 1,    1,   'm', 5,   'k', '/', 'u', '/',
                          's', 0xAC, 0x02, 1,   'A', 5,   2,   9,   8};
  EXPECT_EQ(f, expected);
  EXPECT_TRUE(is_sync_frame(f));
  EXPECT_EQ(decode_update(f), u);
}

TEST(SyncFrame, DecodeErrors) {
  EXPECT_THROW(decode_update(Bytes{'D', 'C', 'E', '2', 1}), DecodeError);
  EXPECT_THROW(decode_update(Bytes{'D', 'C', 'E', '1', 7, 0, 0, 0, 0, 0, 0}), DecodeError);
  const ReplicaUpdate u{"m", "k", VersionedValue{Bytes{1}, 1, "A", 1}, UpdateOp::kDelete};
  Bytes f = encode_update(u);
  f.pop_back();
  EXPECT_THROW(decode_update(f), DecodeError);
  EXPECT_FALSE(is_sync_frame(Bytes{'{'}));
}

TEST(Supersedes, Rule) {
  EXPECT_TRUE(supersedes(value(2, "A"), value(1, "Z")));
  EXPECT_FALSE(supersedes(value(1, "Z"), value(2, "A")));
  EXPECT_TRUE(supersedes(value(2, "b"), value(2, "a")));
  EXPECT_FALSE(supersedes(value(2, "a"), value(2, "b")));
  EXPECT_FALSE(supersedes(value(2, "a"), value(2, "a")));
}

}  // namespace
}  // namespace discedge

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

#include <random>

#include "discedge/context.hpp"
#include "discedge/errors.hpp"
#include "oracles.hpp"
#include "random_text.hpp"

namespace discedge {
namespace {

const ContextKey kKey{"qwen", "u1", "s1"};

Vocab test_vocab() {
  return Vocab::from_entries("qwen", {"<|system|>", "<|user|>", "<|assistant|>", "the", " the",
                                      "robot", " robot", "What", " is", " SLAM", "?"});
}

TEST(ContextKey, StorageKeyRoundTrip) {
  EXPECT_EQ(kKey.storage_key(), "qwen/u1/s1");
  EXPECT_EQ(ContextKey::parse("qwen/u1/s1"), kKey);
  EXPECT_THROW(ContextKey::parse("qwen/u1"), BadRequestError);
  EXPECT_THROW((ContextKey{"a/b", "u", "s"}).validate(), BadRequestError);
  EXPECT_THROW((ContextKey{"m", "", "s"}).validate(), BadRequestError);
}

TEST(ModelId, ReplacesSlashes) {
  EXPECT_EQ(model_id_from_name("Qwen/Qwen1.5-0.5B-Chat"), "Qwen--Qwen1.5-0.5B-Chat");
  EXPECT_EQ(model_id_from_name("plain"), "plain");
}

TEST(AppendTurn, IncrementsVersionAndKeepsInput) {
  const SessionContext empty = make_context(kKey, ContextMode::kRaw, 1000, "A");
  const SessionContext one = append_turn(empty, std::string("Q"), std::string("A"));
  EXPECT_EQ(empty.version, 0u);
  EXPECT_TRUE(empty.turns.empty());
  EXPECT_EQ(one.version, 1u);
  EXPECT_EQ(one.turns.size(), 2u);
  SessionContext ctx = one;
  for (int i = 0; i < 3; ++i) ctx = append_turn(ctx, std::string("q"), std::string("a"));
  EXPECT_EQ(ctx.version, 4u);
  ctx = append_turn(ctx, std::string("q"), std::string("a"));
  EXPECT_EQ(ctx.version, 5u);
  EXPECT_EQ(ctx.turns.size(), 10u);
}

TEST(AppendTurn, ModeMismatchThrows) {
  const SessionContext tok = make_context(kKey, ContextMode::kTokenized, 1000, "A");
  EXPECT_THROW(append_turn(tok, std::string("q"), std::string("a")), ModeError);
  const SessionContext raw = make_context(kKey, ContextMode::kRaw, 1000, "A");
  EXPECT_THROW(append_turn(raw, TokenSequence{1}, TokenSequence{2}), ModeError);
}

TEST(Render, RawTemplate) {
  const SessionContext empty = make_context(kKey, ContextMode::kRaw, 1000, "A");
  EXPECT_EQ(render_history_text(empty), "");
  const SessionContext one = append_turn(empty, std::string("Q"), std::string("A"));
  EXPECT_EQ(render_history_text(one), "<|user|>\nQ\n<|assistant|>\nA\n");
  EXPECT_EQ(render_prompt_text("P"), "<|user|>\nP\n<|assistant|>\n");
  EXPECT_THROW(render_history_tokens(one, test_vocab()), ModeError);
}

TEST(Render, TokenizedEqualsTokenizeOfRawRender) {
  const Vocab v = test_vocab();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const bool with_system = trial % 3 == 0;
    const std::string sys = testutil::random_utf8(rng, 10);
    SessionContext raw = make_context(kKey, ContextMode::kRaw, 1, "A",
                                      with_system ? std::optional<Payload>(sys) : std::nullopt);
    SessionContext tok =
        make_context(kKey, ContextMode::kTokenized, 1, "A",
                     with_system ? std::optional<Payload>(v.tokenize(sys)) : std::nullopt);
    std::vector<std::pair<std::string, std::string>> transcript;
    if (with_system) transcript.emplace_back("system", sys);
    const int turns = static_cast<int>(rng() % 5);
    for (int i = 0; i < turns; ++i) {
      const std::string q = testutil::random_utf8(rng, 15) + (i % 2 ? " the robot" : "");
      const std::string a = testutil::random_utf8(rng, 15);
      raw = append_turn(raw, q, a);
      tok = append_turn(tok, v.tokenize(q), v.tokenize(a));
      transcript.emplace_back("user", q);
      transcript.emplace_back("assistant", a);
    }
    const std::string text = render_history_text(raw);
    ASSERT_EQ(text, oracle::render(transcript));
    ASSERT_EQ(render_history_tokens(tok, v), v.tokenize(text));
  }
}

TEST(Serialize, HeaderOnlyFrameForEmptyContext) {
  const SessionContext empty = make_context(kKey, ContextMode::kRaw, 300, "A");
  const Bytes frame = serialize_context(empty);
  // format, mode, version 0, expires 300 (2 bytes), count 0
  EXPECT_EQ(frame, (Bytes{1, 0, 0, 0xAC, 0x02, 0}));
  const SessionContext back = deserialize_context(frame, kKey, "A");
  EXPECT_EQ(back, empty);
}

TEST(Serialize, TokenizedFrameSmallerThanRaw) {
  const Vocab v = test_vocab();
  SessionContext raw = make_context(kKey, ContextMode::kRaw, 1, "A");
  SessionContext tok = make_context(kKey, ContextMode::kTokenized, 1, "A");
  for (int i = 0; i < 9; ++i) {
    raw = append_turn(raw, std::string("What is the robot?"), std::string(" the robot"));
    tok = append_turn(tok, v.tokenize("What is the robot?"), v.tokenize(" the robot"));
  }
  EXPECT_LT(serialize_context(tok).size(), serialize_context(raw).size());
}

TEST(Serialize, RoundTripIsIdentityOnRandomContexts) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    const ContextMode mode = trial % 2 ? ContextMode::kRaw : ContextMode::kTokenized;
    auto payload = [&]() -> Payload {
      if (mode == ContextMode::kRaw) return testutil::random_utf8(rng, 20);
      TokenSequence ids(rng() % 20);
      for (auto& id : ids) id = static_cast<TokenId>(rng() % 100000);
      return ids;
    };
    SessionContext ctx = make_context(kKey, mode, rng() % (1ull << 50), "node-x",
                                      trial % 4 == 0 ? std::optional<Payload>(payload())
                                                     : std::nullopt);
    const int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) ctx = append_turn(ctx, payload(), payload());
    const Bytes frame = serialize_context(ctx);
    const SessionContext back = deserialize_context(frame, kKey, "node-x");
    ASSERT_EQ(back, ctx);
    ASSERT_EQ(serialize_context(back), frame);
  }
}

TEST(Serialize, MixedPayloadsThrow) {
  SessionContext ctx = make_context(kKey, ContextMode::kRaw, 1, "A");
  ctx = append_turn(ctx, std::string("q"), std::string("a"));
  ctx.turns[1].payload = TokenSequence{1};
  EXPECT_THROW(serialize_context(ctx), SerializationError);
}

TEST(Serialize, BrokenLayoutThrows) {
  SessionContext ctx = make_context(kKey, ContextMode::kRaw, 1, "A");
  ctx = append_turn(ctx, std::string("q"), std::string("a"));
  ctx.version = 2;
  EXPECT_THROW(serialize_context(ctx), SerializationError);
}

TEST(Deserialize, Errors) {
  EXPECT_THROW(deserialize_context(Bytes{}), DecodeError);
  EXPECT_THROW(deserialize_context(Bytes{9, 0, 0, 0, 0}), VersionError);
  // One raw turn whose length varint is cut short.
  EXPECT_THROW(deserialize_context(Bytes{1, 0, 0, 1, 1, 1, 0x80}), DecodeError);
  // Declared payload longer than the frame.
  EXPECT_THROW(deserialize_context(Bytes{1, 0, 0, 1, 1, 1, 5, 'a'}), DecodeError);
  // Trailing garbage.
  EXPECT_THROW(deserialize_context(Bytes{1, 0, 0, 1, 0, 7}), DecodeError);
  // Bad mode byte.
  EXPECT_THROW(deserialize_context(Bytes{1, 5, 0, 1, 0}), DecodeError);
}

TEST(Deserialize, SingleByteCorruptionNeverCrashes) {
  SessionContext ctx = make_context(kKey, ContextMode::kTokenized, 1234, "A");
  ctx = append_turn(ctx, TokenSequence{300, 1, 2}, TokenSequence{4000});
  const Bytes frame = serialize_context(ctx);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    for (int bit = 0; bit < 8; ++bit) {
      Bytes bad = frame;
      bad[i] ^= static_cast<std::uint8_t>(1 << bit);
      try {
        const SessionContext back = deserialize_context(bad, kKey, "A");
        EXPECT_EQ(serialize_context(back), bad);
      } catch (const Error&) {
      }
    }
  }
}

}  // namespace
}  // namespace discedge

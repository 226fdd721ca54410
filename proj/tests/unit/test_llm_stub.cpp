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

#include <algorithm>
#include <random>
#include <thread>

#include "discedge/context.hpp"
#include "discedge/errors.hpp"
#include "discedge/llm_stub.hpp"
#include "discedge/scenario.hpp"
#include "discedge/simulator.hpp"
#include "discedge/system_runtime.hpp"
#include "oracles.hpp"

namespace discedge {
namespace {

using namespace std::chrono_literals;

Vocab default_vocab() {
  return Vocab::load(default_data_dir() / "vocab" / "default.vocab", "qwen");
}

CompletionInput input(std::string prompt, std::optional<TokenSequence> context = std::nullopt) {
  CompletionInput in;
  in.model_id = "qwen";
  in.prompt = std::move(prompt);
  in.context = std::move(context);
  return in;
}

TEST(Hash64, MatchesReferenceImplementation) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 500; ++i) {
    std::vector<std::uint32_t> ids(rng() % 30);
    for (auto& id : ids) id = static_cast<std::uint32_t>(rng());
    const auto seed = static_cast<std::int64_t>(rng());
    const std::string model = "model-" + std::to_string(rng() % 100);
    ASSERT_EQ(hash64(seed, model, ids), oracle::hash64(seed, model, ids));
  }
}

TEST(Profiles, Defaults) {
  const auto m2 = HardwareProfile::m2();
  EXPECT_EQ(m2.tokenize_us_per_char, 0.2);
  EXPECT_EQ(m2.prefill_us_per_token, 3);
  EXPECT_EQ(m2.decode_base_us_per_token, 700);
  EXPECT_EQ(m2.decode_us_per_context_token, 0.5);
  const auto tx2 = HardwareProfile::named("tx2");
  EXPECT_EQ(tx2.tokenize_us_per_char, 2.0);
  EXPECT_EQ(tx2.prefill_us_per_token, 30);
  EXPECT_EQ(tx2.decode_base_us_per_token, 7000);
  EXPECT_EQ(tx2.decode_us_per_context_token, 5);
  EXPECT_THROW(HardwareProfile::named("gpu"), ConfigError);
  HardwareProfile bad = m2;
  bad.prefill_us_per_token = -1;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Engine, SameInputOnTwoNodesGivesSameIds) {
  Simulator sim_a, sim_b;
  InferenceEngine a(HardwareProfile::m2(), sim_a);
  InferenceEngine b(HardwareProfile::tx2(), sim_b);
  a.load_model(default_vocab());
  b.load_model(default_vocab());
  const auto in = input(render_prompt_text("What is SLAM?"));
  const auto out_a = a.complete(in);
  const auto out_b = b.complete(in);
  EXPECT_EQ(out_a.tokens, out_b.tokens);
  EXPECT_EQ(out_a.input_fingerprint, out_b.input_fingerprint);
}

TEST(Engine, GeneratesExactlyMaxTokensAndTextMatches) {
  Simulator sim;
  InferenceEngine e(HardwareProfile::m2(), sim);
  e.load_model(default_vocab());
  for (std::uint32_t n : {1u, 7u, 128u}) {
    auto in = input("hello");
    in.params.max_tokens = n;
    const auto out = e.complete(in);
    ASSERT_EQ(out.tokens.size(), n);
    EXPECT_EQ(out.text, e.vocab("qwen").detokenize(out.tokens));
    for (TokenId id : out.tokens) {
      EXPECT_GE(id, kByteTokens);
      EXPECT_LT(id, e.vocab("qwen").id_limit());
    }
  }
  auto zero = input("x");
  zero.params.max_tokens = 0;
  EXPECT_THROW(e.complete(zero), BadRequestError);
}

TEST(Engine, PreTokenizedContextEqualsRawText) {
  Simulator sim;
  InferenceEngine e(HardwareProfile::m2(), sim);
  const Vocab v = default_vocab();
  e.load_model(v);
  const std::string history = render_turn_text(Role::kUser, "What is SLAM?") +
                              render_turn_text(Role::kAssistant, "A mapping method.");
  const std::string prompt = render_prompt_text("Compare EKF SLAM and particle filters.");
  const auto with_context = e.complete(input(prompt, v.tokenize(history)));
  const auto raw = e.complete(input(history + prompt));
  EXPECT_EQ(with_context.tokens, raw.tokens);
  EXPECT_EQ(with_context.input_token_count, raw.input_token_count);
  EXPECT_EQ(with_context.input_fingerprint, raw.input_fingerprint);
  // Only the prompt is charged for tokenization.
  EXPECT_LT(with_context.timing.tokenize, raw.timing.tokenize);
  EXPECT_EQ(with_context.timing.inference(), raw.timing.inference());
}

TEST(Engine, TimingModel) {
  Simulator sim;
  InferenceEngine e(HardwareProfile::m2(), sim);
  e.load_model(default_vocab());
  const std::string prompt = "abc\xC3\xA9";  // 4 code points
  auto in = input(prompt, TokenSequence(10, 300));
  in.params.max_tokens = 5;
  const auto out = e.complete(in);
  const std::size_t n = out.input_token_count;
  EXPECT_EQ(out.timing.tokenize, Nanos{4 * 200});
  EXPECT_EQ(out.timing.prefill, Nanos{static_cast<std::int64_t>(n) * 3000});
  EXPECT_EQ(out.timing.decode, Nanos{5 * (700000 + 500 * static_cast<std::int64_t>(n))});
  EXPECT_EQ(sim.now(), out.timing.total());
}

TEST(Engine, TimeNonDecreasingInInputLength) {
  Simulator sim;
  InferenceEngine e(HardwareProfile::tx2(), sim);
  e.load_model(default_vocab());
  Nanos prev{0};
  for (std::size_t ctx = 0; ctx < 2000; ctx += 97) {
    const auto out = e.complete(input("same prompt", TokenSequence(ctx, 260)));
    EXPECT_GE(out.timing.inference(), prev);
    prev = out.timing.inference();
  }
}

TEST(Engine, SamplingIsDeterministicAndInRange) {
  Simulator sim;
  InferenceEngine e(HardwareProfile::m2(), sim);
  e.load_model(default_vocab());
  auto hot = input("hello");
  hot.params.temperature = 0.7;
  const auto a = e.complete(hot);
  const auto b = e.complete(hot);
  EXPECT_EQ(a.tokens, b.tokens);
  EXPECT_NE(a.tokens, e.complete(input("hello")).tokens);
  hot.params.seed = 124;
  EXPECT_NE(a.tokens, e.complete(hot).tokens);
}

TEST(Engine, EmptyVocabGeneratesAsciiLetters) {
  Simulator sim;
  InferenceEngine e(HardwareProfile::m2(), sim);
  e.load_model(Vocab::from_entries("tiny", {}));
  CompletionInput in;
  in.model_id = "tiny";
  in.prompt = "hi";
  const auto out = e.complete(in);
  for (char c : out.text) EXPECT_TRUE(c >= 'a' && c <= 'z');
}

TEST(Engine, MissingModel) {
  Simulator sim;
  InferenceEngine e(HardwareProfile::m2(), sim);
  EXPECT_THROW(e.complete(input("x")), ModelNotLoadedError);
  EXPECT_THROW(e.tokenize("qwen", "x"), ModelNotLoadedError);
}

TEST(Engine, TokenizeEndpointDelegates) {
  Simulator sim;
  InferenceEngine e(HardwareProfile::m2(), sim);
  const Vocab v = default_vocab();
  e.load_model(v);
  EXPECT_TRUE(e.tokenize("qwen", "").empty());
  for (const auto& msg : read_lines(default_data_dir() / "corpus" / "robotics_messages.txt")) {
    EXPECT_EQ(e.tokenize("qwen", msg), v.tokenize(msg));
  }
  EXPECT_EQ(sim.now(), Nanos{0});
}

TEST(Engine, ConcurrentCallsAreSerialized) {
  SystemRuntime rt;
  HardwareProfile p{"slow", 0, 0, 1000, 0};  // 1 ms per generated token
  InferenceEngine e(p, rt);
  e.load_model(Vocab::from_entries("qwen", {"a"}));
  std::vector<std::chrono::steady_clock::time_point> ends(4);
  std::vector<std::thread> threads;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&, i] {
      auto in = input("x");
      in.params.max_tokens = 10;
      e.complete(in);
      ends[i] = std::chrono::steady_clock::now();
    });
  }
  for (auto& t : threads) t.join();
  std::sort(ends.begin(), ends.end());
  EXPECT_GE(ends.back() - start, 40ms);
  for (int i = 1; i < 4; ++i) EXPECT_GE(ends[i] - ends[i - 1], 9ms);
}

}  // namespace
}  // namespace discedge

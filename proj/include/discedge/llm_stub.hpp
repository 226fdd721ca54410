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

#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "discedge/runtime.hpp"
#include "discedge/tokenizer.hpp"

namespace discedge {

// Per-unit costs in microseconds. Rates are quantized to whole nanoseconds
// (a positive rate never rounds to zero), so simulated times are exact
// integers and monotone in the counts they scale.
struct HardwareProfile {
  std::string name;
  double tokenize_us_per_char = 0;
  double prefill_us_per_token = 0;
  double decode_base_us_per_token = 0;
  double decode_us_per_context_token = 0;

  static HardwareProfile m2();
  static HardwareProfile tx2();
  // "m2" or "tx2"; throws ConfigError otherwise.
  static HardwareProfile named(std::string_view name);
  void validate() const;
};

struct GenerationParams {
  std::int64_t seed = 123;
  double temperature = 0.0;
  std::uint32_t max_tokens = 128;

  bool operator==(const GenerationParams&) const = default;
};

struct CompletionInput {
  std::string model_id;
  // Pre-tokenized history; spliced in front of the prompt tokens as-is.
  std::optional<TokenSequence> context;
  std::string prompt;
  GenerationParams params;
};

struct CompletionTiming {
  Nanos tokenize{0};
  Nanos prefill{0};
  Nanos decode{0};

  Nanos inference() const { return prefill + decode; }
  Nanos total() const { return tokenize + prefill + decode; }
};

struct CompletionOutput {
  TokenSequence tokens;
  std::string text;
  CompletionTiming timing;
  std::size_t input_token_count = 0;
  // hash64(0, model_id, full input): lets tests check which history the
  // engine actually saw.
  std::uint64_t input_fingerprint = 0;
};

// FNV-1a over (seed as 8 little-endian bytes, model id bytes, 0xff, each id
// as 4 little-endian bytes), then the splitmix64 finalizer.
std::uint64_t hash64(std::int64_t seed, std::string_view model_id,
                     std::span<const TokenId> ids);
std::uint64_t mix64(std::uint64_t z);

// Deterministic stand-in for an inference server with the pre-tokenized
// "context" extension: only the prompt is tokenized, the context ids are
// prepended untouched, and exactly max_tokens ids are generated as a pure
// function of (seed, model id, full input). Simulated compute time elapses
// on the runtime clock. One completion runs at a time; callers queue FIFO.
class InferenceEngine {
 public:
  InferenceEngine(HardwareProfile profile, Runtime& runtime);

  void load_model(Vocab vocab);
  bool has_model(const std::string& model_id) const;
  // Throws ModelNotLoadedError.
  const Vocab& vocab(const std::string& model_id) const;
  const HardwareProfile& profile() const { return profile_; }

  CompletionOutput complete(const CompletionInput& input);

  // Same ids as Vocab::tokenize; no simulated time is charged.
  TokenSequence tokenize(const std::string& model_id, std::string_view text) const;
  Nanos tokenize_cost(std::string_view text) const;
  Nanos prefill_cost(std::size_t input_tokens) const;
  Nanos decode_cost(std::size_t input_tokens, std::uint32_t max_tokens) const;

 private:
  TokenSequence generate(const Vocab& vocab, const std::string& model_id,
                         std::span<const TokenId> input,
                         const GenerationParams& params) const;

  HardwareProfile profile_;
  Runtime& runtime_;
  std::map<std::string, Vocab> models_;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t serving_ = 0;
};

}  // namespace discedge

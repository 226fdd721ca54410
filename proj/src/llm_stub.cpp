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

#include "discedge/llm_stub.hpp"

#include <bit>
#include <cmath>

#include "discedge/errors.hpp"

namespace discedge {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

std::int64_t rate_ns(double us) {
  if (us <= 0) return 0;
  return std::max<std::int64_t>(1, std::llround(us * 1000.0));
}

}  // namespace

HardwareProfile HardwareProfile::m2() { return {"m2", 0.2, 3, 700, 0.5}; }
HardwareProfile HardwareProfile::tx2() { return {"tx2", 2.0, 30, 7000, 5}; }

HardwareProfile HardwareProfile::named(std::string_view name) {
  if (name == "m2") return m2();
  if (name == "tx2") return tx2();
  throw ConfigError("unknown hardware profile '" + std::string(name) + "'");
}

void HardwareProfile::validate() const {
  if (tokenize_us_per_char < 0 || prefill_us_per_token < 0 ||
      decode_base_us_per_token < 0 || decode_us_per_context_token < 0) {
    throw ConfigError("hardware profile " + name + " has a negative rate");
  }
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t hash64(std::int64_t seed, std::string_view model_id,
                     std::span<const TokenId> ids) {
  std::uint64_t h = kFnvOffset;
  auto feed = [&h](std::uint8_t b) {
    h ^= b;
    h *= kFnvPrime;
  };
  const auto useed = static_cast<std::uint64_t>(seed);
  for (int i = 0; i < 8; ++i) feed(static_cast<std::uint8_t>(useed >> (8 * i)));
  for (char c : model_id) feed(static_cast<std::uint8_t>(c));
  feed(0xff);
  for (TokenId id : ids) {
    for (int i = 0; i < 4; ++i) feed(static_cast<std::uint8_t>(id >> (8 * i)));
  }
  return mix64(h);
}

InferenceEngine::InferenceEngine(HardwareProfile profile, Runtime& runtime)
    : profile_(std::move(profile)), runtime_(runtime) {
  profile_.validate();
}

void InferenceEngine::load_model(Vocab vocab) {
  std::string id = vocab.model_id();
  models_.insert_or_assign(std::move(id), std::move(vocab));
}

bool InferenceEngine::has_model(const std::string& model_id) const {
  return models_.contains(model_id);
}

const Vocab& InferenceEngine::vocab(const std::string& model_id) const {
  auto it = models_.find(model_id);
  if (it == models_.end()) {
    throw ModelNotLoadedError("model " + model_id + " is not loaded");
  }
  return it->second;
}

TokenSequence InferenceEngine::tokenize(const std::string& model_id,
                                        std::string_view text) const {
  return vocab(model_id).tokenize(text);
}

Nanos InferenceEngine::tokenize_cost(std::string_view text) const {
  return Nanos{rate_ns(profile_.tokenize_us_per_char) *
               static_cast<std::int64_t>(utf8_length(text))};
}

Nanos InferenceEngine::prefill_cost(std::size_t input_tokens) const {
  return Nanos{rate_ns(profile_.prefill_us_per_token) *
               static_cast<std::int64_t>(input_tokens)};
}

Nanos InferenceEngine::decode_cost(std::size_t input_tokens,
                                   std::uint32_t max_tokens) const {
  const std::int64_t per_token =
      rate_ns(profile_.decode_base_us_per_token) +
      rate_ns(profile_.decode_us_per_context_token) *
          static_cast<std::int64_t>(input_tokens);
  return Nanos{per_token * static_cast<std::int64_t>(max_tokens)};
}

TokenSequence InferenceEngine::generate(const Vocab& vocab,
                                        const std::string& model_id,
                                        std::span<const TokenId> input,
                                        const GenerationParams& params) const {
  const std::uint64_t base = hash64(params.seed, model_id, input);
  // An empty vocab still produces valid UTF-8: lowercase ASCII letters.
  const std::uint64_t range = vocab.size() > 0 ? vocab.size() : 26;
  const TokenId first = vocab.size() > 0 ? kByteTokens : TokenId{'a'};
  TokenSequence out;
  out.reserve(params.max_tokens);
  if (params.temperature > 0) {
    // Sampling: a splitmix64 stream seeded from the input hash and the
    // temperature bits.
    std::uint64_t state = base ^ mix64(std::bit_cast<std::uint64_t>(params.temperature));
    for (std::uint32_t i = 0; i < params.max_tokens; ++i) {
      state += kGolden;
      out.push_back(first + static_cast<TokenId>(mix64(state) % range));
    }
  } else {
    // Fixed choice: each id is a hash of the input and the previous pick.
    std::uint64_t state = base;
    for (std::uint32_t i = 0; i < params.max_tokens; ++i) {
      const std::uint64_t prev = out.empty() ? 0 : out.back();
      state = mix64(state ^ (prev * kGolden) ^ (i + 1));
      out.push_back(first + static_cast<TokenId>(state % range));
    }
  }
  return out;
}

CompletionOutput InferenceEngine::complete(const CompletionInput& input) {
  if (input.params.max_tokens < 1) {
    throw BadRequestError("max_tokens must be at least 1");
  }
  const Vocab& v = vocab(input.model_id);

  // FIFO admission: one completion at a time.
  std::unique_lock lock(queue_mu_);
  const std::uint64_t ticket = next_ticket_++;
  queue_cv_.wait(lock, [&] { return serving_ == ticket; });
  lock.unlock();
  struct Release {
    InferenceEngine* self;
    ~Release() {
      std::lock_guard l(self->queue_mu_);
      ++self->serving_;
      self->queue_cv_.notify_all();
    }
  } release{this};

  CompletionOutput out;
  TokenSequence full = input.context.value_or(TokenSequence{});
  const TokenSequence prompt_ids = v.tokenize(input.prompt);
  full.insert(full.end(), prompt_ids.begin(), prompt_ids.end());

  out.input_token_count = full.size();
  out.input_fingerprint = hash64(0, input.model_id, full);
  out.tokens = generate(v, input.model_id, full, input.params);
  out.text = v.detokenize(out.tokens);
  out.timing.tokenize = tokenize_cost(input.prompt);
  out.timing.prefill = prefill_cost(full.size());
  out.timing.decode = decode_cost(full.size(), input.params.max_tokens);
  runtime_.sleep_for(out.timing.total());
  return out;
}

}  // namespace discedge

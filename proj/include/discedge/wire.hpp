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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "discedge/bytes.hpp"
#include "discedge/context.hpp"
#include "discedge/llm_stub.hpp"

namespace discedge {

// Client <-> node messages are UTF-8 JSON objects, one per length-prefixed
// frame. Encoding preserves field order so equal messages are equal bytes.
using Json = nlohmann::ordered_json;

enum class RequestMode { kRaw, kTokenized, kClientSide };
std::string_view request_mode_name(RequestMode mode);
RequestMode parse_request_mode(std::string_view name);  // BadRequestError
std::optional<ContextMode> storage_mode(RequestMode mode);

enum class Consistency { kFresh, kStaleServed, kCreated };
std::string_view consistency_name(Consistency c);
Consistency parse_consistency(std::string_view name);

struct HistoryEntry {
  Role role = Role::kUser;
  std::string text;

  bool operator==(const HistoryEntry&) const = default;
};

struct CompletionRequest {
  std::string model;
  std::string user_id;     // empty: assigned by the node
  std::string session_id;  // empty: assigned by the node
  std::uint64_t turn = 1;  // 1-based client turn counter
  RequestMode mode = RequestMode::kTokenized;
  std::string prompt;
  // Present iff mode is client_side; 2 * (turn - 1) alternating entries.
  std::optional<std::vector<HistoryEntry>> history;
  // Optional system prompt. Stored with the context on turn 1 in edge-side
  // modes; sent with every request in client_side mode.
  std::optional<std::string> system_prompt;
  GenerationParams params;

  // Throws BadRequestError.
  void validate() const;
  bool operator==(const CompletionRequest&) const = default;
};

struct ResponseTimings {
  double tokenize_ms = 0;
  double inference_ms = 0;
  double total_ms = 0;
};

struct CompletionResponse {
  std::string text;
  std::uint32_t tokens_generated = 0;
  std::uint64_t turn = 0;
  Consistency consistency = Consistency::kFresh;
  ResponseTimings timings;
  std::string user_id;
  std::string session_id;
  std::uint32_t retries = 0;
  std::uint64_t context_version = 0;
  std::size_t input_tokens = 0;
  std::uint64_t input_fingerprint = 0;
  TokenSequence token_ids;
};

Bytes encode_json(const Json& message);
Json decode_json(ByteView frame);  // throws DecodeError

Json request_to_json(const CompletionRequest& req);
CompletionRequest request_from_json(const Json& j);  // BadRequestError
Json response_to_json(const CompletionResponse& resp);
CompletionResponse response_from_json(const Json& j);

Json error_to_json(const std::exception& error);
// Rethrows the typed error described by an {"type":"error"} message.
[[noreturn]] void throw_error_reply(const Json& j);

std::string fingerprint_hex(std::uint64_t fp);

}  // namespace discedge

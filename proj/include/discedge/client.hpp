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
#include <vector>

#include "discedge/runtime.hpp"
#include "discedge/transport.hpp"
#include "discedge/wire.hpp"

namespace discedge {

// Client-side view of one conversation. The turn counter is the only state
// the consistency protocol needs from the client; local_history is kept in
// every mode but only sent in client_side mode.
struct ClientSession {
  std::string model;
  std::string user_id;
  std::string session_id;
  std::uint64_t turn = 1;
  RequestMode mode = RequestMode::kTokenized;
  std::vector<HistoryEntry> local_history;
  std::optional<std::string> system_prompt;
  GenerationParams params;
};

struct ClientTurnMetrics {
  std::uint64_t turn = 0;
  std::string node;
  double response_time_ms = 0;
  std::size_t request_bytes = 0;  // request frame + length prefix
  std::uint32_t tokens_generated = 0;
  double tokens_per_second = 0;  // tokens / inference time (prefill + decode)
  Consistency consistency = Consistency::kFresh;
  std::uint32_t retries = 0;
  ResponseTimings timings;
  std::size_t input_tokens = 0;
  std::uint64_t input_fingerprint = 0;
  TokenSequence token_ids;
};

struct AskResult {
  std::string text;
  ClientTurnMetrics metrics;
};

// Maps client turns to edge nodes. Turn t uses nodes[t - 1]; turns past the
// end stay on the last node.
class MobilitySchedule {
 public:
  explicit MobilitySchedule(std::vector<std::string> per_turn);
  static MobilitySchedule fixed(std::string node);
  // Turns 1-2 on `a`, 3-4 on `b`, 5-6 on `a`, 7-9 on `b`.
  static MobilitySchedule alternating(std::string a, std::string b);

  const std::string& node_for(std::uint64_t turn) const;
  const std::vector<std::string>& nodes() const { return per_turn_; }

 private:
  std::vector<std::string> per_turn_;
};

inline const std::string& roam(const MobilitySchedule& schedule, std::uint64_t turn) {
  return schedule.node_for(turn);
}

class LlmClient {
 public:
  LlmClient(std::string client_id, Transport& transport, Runtime& runtime);

  const std::string& id() const { return client_id_; }

  CompletionRequest build_request(const ClientSession& session,
                                  const std::string& prompt) const;

  // Sends one turn. On success appends (prompt, answer) to local_history,
  // adopts server-assigned ids and increments the turn counter; on any
  // error the session is left untouched and the typed error propagates.
  AskResult ask(ClientSession& session, const std::string& node_id,
                const std::string& prompt);

  void delete_session(const ClientSession& session, const std::string& node_id);
  Json call(const std::string& node_id, const Json& message);

 private:
  std::string client_id_;
  Transport& transport_;
  Runtime& runtime_;
};

}  // namespace discedge

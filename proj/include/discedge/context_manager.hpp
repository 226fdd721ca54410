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
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>

#include "discedge/context.hpp"
#include "discedge/llm_stub.hpp"
#include "discedge/replicated_store.hpp"
#include "discedge/runtime.hpp"
#include "discedge/wire.hpp"

namespace discedge {

struct ConsistencyPolicy {
  enum class Mode { kStrong, kAvailable };
  Mode mode = Mode::kStrong;
  std::uint32_t max_retries = 3;
  double backoff_ms = 10.0;

  void validate() const;
};

std::string_view policy_mode_name(ConsistencyPolicy::Mode mode);
ConsistencyPolicy::Mode parse_policy_mode(std::string_view name);

// Result of the freshness check on the local replica.
struct FreshContext {
  SessionContext context;
  Consistency consistency = Consistency::kFresh;
  std::uint32_t retries = 0;
  // Whether a live (non-tombstone) value was found.
  bool existed = false;
  // Store versions are store_base + context.version. The base is non-zero
  // only after a delete, whose tombstone outranks the restarted session.
  std::uint64_t store_base = 0;
};

struct ContextManagerOptions {
  std::string node_id;
  std::set<std::string> served_models;  // model ids
  ConsistencyPolicy policy;
  Nanos ttl = std::chrono::hours(1);
  // Seeds user/session id generation; 0 draws from std::random_device.
  std::uint64_t id_seed = 0;
};

// Per-node middleware between clients, the local replica and the inference
// engine. Implements the turn-counter consistency protocol: a request for
// turn N is only served over a local context holding exactly N - 1
// completed turns, retrying the local read while replication catches up.
class ContextManager {
 public:
  struct Stats {
    std::uint64_t write_backs = 0;
    std::uint64_t write_back_retries = 0;
    std::uint64_t write_back_failures = 0;
  };

  ContextManager(ContextManagerOptions options, ReplicatedStore& store,
                 InferenceEngine& engine, Runtime& runtime);

  // Throws StaleContextError, TurnConflictError, ModelNotServedError,
  // BadRequestError or ModeError.
  CompletionResponse handle_completion(CompletionRequest req);

  // Absent counts as version 0. A higher local version than expected is a
  // TurnConflictError; a lower one is retried max_retries times with a fixed
  // backoff, after which strong policy throws StaleContextError and
  // available policy returns the local context flagged stale_served.
  FreshContext ensure_fresh_context(const ContextKey& key,
                                    std::uint64_t expected_version,
                                    ContextMode mode);

  void delete_session(const ContextKey& key);

  const ContextManagerOptions& options() const { return options_; }
  Stats stats() const;

 private:
  struct LocalRead {
    std::optional<SessionContext> context;
    std::uint64_t store_base = 0;
  };

  LocalRead read_local(const ContextKey& key, ContextMode mode);
  std::string new_id();
  void write_back(SessionContext base, std::uint64_t store_base,
                  std::string prompt, std::string answer, std::uint64_t turn,
                  bool base_is_fresh, int attempt);
  bool try_write_back(const SessionContext& base, std::uint64_t store_base,
                      const std::string& prompt, const std::string& answer);

  ContextManagerOptions options_;
  ReplicatedStore& store_;
  InferenceEngine& engine_;
  Runtime& runtime_;

  mutable std::mutex mu_;
  std::set<std::string> in_flight_;
  std::mt19937_64 id_rng_;
  Stats stats_;
};

}  // namespace discedge

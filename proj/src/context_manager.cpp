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

#include "discedge/context_manager.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "discedge/errors.hpp"

namespace discedge {
namespace {

class InFlightGuard {
 public:
  InFlightGuard(std::mutex& mu, std::set<std::string>& in_flight, std::string key)
      : mu_(mu), in_flight_(in_flight), key_(std::move(key)) {
    std::lock_guard lock(mu_);
    if (!in_flight_.insert(key_).second) {
      throw TurnConflictError("session " + key_ + " already has a request in flight");
    }
  }
  ~InFlightGuard() {
    std::lock_guard lock(mu_);
    in_flight_.erase(key_);
  }
  InFlightGuard(const InFlightGuard&) = delete;
  InFlightGuard& operator=(const InFlightGuard&) = delete;

 private:
  std::mutex& mu_;
  std::set<std::string>& in_flight_;
  std::string key_;
};

}  // namespace

void ConsistencyPolicy::validate() const {
  if (backoff_ms < 0) throw ConfigError("backoff_ms must be non-negative");
}

std::string_view policy_mode_name(ConsistencyPolicy::Mode mode) {
  return mode == ConsistencyPolicy::Mode::kStrong ? "strong" : "available";
}

ConsistencyPolicy::Mode parse_policy_mode(std::string_view name) {
  if (name == "strong") return ConsistencyPolicy::Mode::kStrong;
  if (name == "available") return ConsistencyPolicy::Mode::kAvailable;
  throw ConfigError("unknown consistency policy '" + std::string(name) + "'");
}

ContextManager::ContextManager(ContextManagerOptions options,
                               ReplicatedStore& store, InferenceEngine& engine,
                               Runtime& runtime)
    : options_(std::move(options)),
      store_(store),
      engine_(engine),
      runtime_(runtime),
      id_rng_(options_.id_seed != 0 ? options_.id_seed : std::random_device{}()) {
  options_.policy.validate();
  for (const auto& model : options_.served_models) {
    if (!store_.has_keygroup(model) ||
        !store_.keygroup_members(model).contains(options_.node_id)) {
      throw ConfigError(options_.node_id + " serves " + model +
                        " but is not in its keygroup");
    }
  }
}

ContextManager::Stats ContextManager::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

std::string ContextManager::new_id() {
  std::lock_guard lock(mu_);
  const std::uint64_t hi = id_rng_();
  const std::uint64_t lo = id_rng_();
  return fmt::format("{:016x}{:016x}", hi, lo);
}

ContextManager::LocalRead ContextManager::read_local(const ContextKey& key,
                                                     ContextMode mode) {
  const std::string storage_key = key.storage_key();
  LocalRead out;
  auto value = store_.get(storage_key);
  if (!value) {
    out.store_base = store_.latest_version(storage_key);
    return out;
  }
  SessionContext ctx = deserialize_context(value->bytes, key, value->origin_node);
  if (ctx.mode != mode) {
    throw ModeError("session " + storage_key + " is stored in " +
                    std::string(mode_name(ctx.mode)) + " mode");
  }
  out.store_base = value->version - ctx.version;
  out.context = std::move(ctx);
  return out;
}

FreshContext ContextManager::ensure_fresh_context(const ContextKey& key,
                                                  std::uint64_t expected_version,
                                                  ContextMode mode) {
  const auto& policy = options_.policy;
  std::uint32_t retries = 0;
  LocalRead local;
  std::uint64_t local_version = 0;
  while (true) {
    local = read_local(key, mode);
    local_version = local.context ? local.context->version : 0;
    if (local_version == expected_version) break;
    if (local_version > expected_version) {
      throw TurnConflictError("turn " + std::to_string(expected_version + 1) +
                              " already completed for session " +
                              key.storage_key() + " (stored version " +
                              std::to_string(local_version) + ")");
    }
    if (retries >= policy.max_retries) break;
    runtime_.sleep_for(from_ms(policy.backoff_ms));
    ++retries;
  }

  FreshContext out;
  out.retries = retries;
  out.existed = local.context.has_value();
  out.store_base = local.store_base;
  out.consistency = local_version == expected_version ? Consistency::kFresh
                                                      : Consistency::kStaleServed;
  if (out.consistency == Consistency::kStaleServed &&
      policy.mode == ConsistencyPolicy::Mode::kStrong) {
    throw StaleContextError(local_version, expected_version);
  }
  out.context = local.context
                    ? std::move(*local.context)
                    : make_context(key, mode, 0, options_.node_id);
  return out;
}

CompletionResponse ContextManager::handle_completion(CompletionRequest req) {
  const Nanos start = runtime_.now();
  const std::string model_id = model_id_from_name(req.model);
  if (!options_.served_models.contains(model_id)) {
    throw ModelNotServedError(options_.node_id + " does not serve " + req.model);
  }
  if (req.user_id.empty() || req.session_id.empty()) {
    if (req.user_id.empty()) req.user_id = new_id();
    if (req.session_id.empty()) req.session_id = new_id();
    if (req.mode != RequestMode::kClientSide) req.turn = 1;
  }
  req.validate();
  const ContextKey key{model_id, req.user_id, req.session_id};
  key.validate();
  const Vocab& vocab = engine_.vocab(model_id);

  CompletionResponse resp;
  resp.turn = req.turn;
  resp.user_id = req.user_id;
  resp.session_id = req.session_id;

  auto finish = [&](const CompletionOutput& out) {
    resp.text = out.text;
    resp.tokens_generated = static_cast<std::uint32_t>(out.tokens.size());
    resp.token_ids = out.tokens;
    resp.input_tokens = out.input_token_count;
    resp.input_fingerprint = out.input_fingerprint;
    resp.timings.tokenize_ms = to_ms(out.timing.tokenize);
    resp.timings.inference_ms = to_ms(out.timing.inference());
    resp.timings.total_ms = to_ms(runtime_.now() - start);
  };

  if (req.mode == RequestMode::kClientSide) {
    // Stateless: the client's history is the context; nothing is stored.
    std::string text;
    if (req.system_prompt) text += render_turn_text(Role::kSystem, *req.system_prompt);
    for (const auto& h : *req.history) text += render_turn_text(h.role, h.text);
    text += render_prompt_text(req.prompt);
    const auto out = engine_.complete({model_id, std::nullopt, std::move(text), req.params});
    resp.consistency = Consistency::kFresh;
    resp.context_version = req.turn - 1;
    finish(out);
    return resp;
  }

  const ContextMode mode = *storage_mode(req.mode);
  InFlightGuard guard(mu_, in_flight_, key.storage_key());
  FreshContext fresh = ensure_fresh_context(key, req.turn - 1, mode);
  SessionContext& ctx = fresh.context;
  if (!fresh.existed && req.turn == 1 && req.system_prompt) {
    Payload system = mode == ContextMode::kRaw
                         ? Payload{*req.system_prompt}
                         : Payload{vocab.tokenize(*req.system_prompt)};
    ctx = make_context(key, mode, 0, options_.node_id, std::move(system));
  }

  CompletionOutput out;
  if (mode == ContextMode::kTokenized) {
    out = engine_.complete(
        {model_id, render_history_tokens(ctx, vocab), render_prompt_text(req.prompt), req.params});
  } else {
    out = engine_.complete({model_id, std::nullopt,
                            render_history_text(ctx) + render_prompt_text(req.prompt),
                            req.params});
  }

  resp.consistency = (req.turn == 1 && !fresh.existed &&
                      fresh.consistency == Consistency::kFresh)
                         ? Consistency::kCreated
                         : fresh.consistency;
  resp.retries = fresh.retries;
  resp.context_version = ctx.version;
  finish(out);

  // Write-back happens after the response is released. Tokenizing the new
  // pair is charged to the background task, not to the client.
  const Nanos cost = mode == ContextMode::kTokenized
                         ? engine_.tokenize_cost(req.prompt) + engine_.tokenize_cost(out.text)
                         : Nanos{0};
  const bool base_is_fresh = fresh.consistency == Consistency::kFresh;
  runtime_.schedule(cost, [this, ctx = std::move(ctx), base = fresh.store_base,
                           prompt = req.prompt, answer = out.text, turn = req.turn,
                           base_is_fresh]() mutable {
    write_back(std::move(ctx), base, std::move(prompt), std::move(answer), turn,
               base_is_fresh, 0);
  });
  return resp;
}

bool ContextManager::try_write_back(const SessionContext& base,
                                    std::uint64_t store_base,
                                    const std::string& prompt,
                                    const std::string& answer) {
  const Vocab& vocab = engine_.vocab(base.key.model_id);
  SessionContext next =
      base.mode == ContextMode::kTokenized
          ? append_turn(base, vocab.tokenize(prompt), vocab.tokenize(answer))
          : append_turn(base, prompt, answer);
  const std::uint64_t ttl_ms = static_cast<std::uint64_t>(options_.ttl.count() / 1'000'000);
  next.expires_at_ms = runtime_.now_ms() + std::max<std::uint64_t>(ttl_ms, 1);
  next.origin_node = options_.node_id;
  VersionedValue value{serialize_context(next), store_base + next.version,
                       options_.node_id, next.expires_at_ms};
  return store_.put(base.key.model_id, base.key.storage_key(), std::move(value));
}

void ContextManager::write_back(SessionContext base, std::uint64_t store_base,
                                std::string prompt, std::string answer,
                                std::uint64_t turn, bool base_is_fresh,
                                int attempt) {
  bool done = false;
  std::string reason;
  try {
    if (!base_is_fresh) {
      // Served over a stale context: only record the pair once the replica
      // holds the turn it belongs after.
      LocalRead local = read_local(base.key, base.mode);
      if (local.context && local.context->version == turn - 1) {
        base = std::move(*local.context);
        store_base = local.store_base;
        base_is_fresh = true;
      } else if (!local.context && turn == 1) {
        store_base = local.store_base;
        base_is_fresh = true;
      }
    }
    if (base_is_fresh) {
      done = try_write_back(base, store_base, prompt, answer);
      if (!done) reason = "a newer version is already stored";
    } else {
      reason = "replica has not reached turn " + std::to_string(turn - 1);
    }
  } catch (const std::exception& e) {
    reason = e.what();
  }

  std::lock_guard lock(mu_);
  if (done) {
    ++stats_.write_backs;
    return;
  }
  if (attempt == 0) {
    ++stats_.write_back_retries;
    spdlog::warn("[{}] write-back of {} turn {} failed ({}), retrying", options_.node_id,
                 base.key.storage_key(), turn, reason);
    runtime_.schedule(from_ms(options_.policy.backoff_ms),
                      [this, base = std::move(base), store_base, prompt = std::move(prompt),
                       answer = std::move(answer), turn, base_is_fresh]() mutable {
                        write_back(std::move(base), store_base, std::move(prompt),
                                   std::move(answer), turn, base_is_fresh, 1);
                      });
    return;
  }
  ++stats_.write_back_failures;
  spdlog::error("[{}] write-back of {} turn {} dropped: {}", options_.node_id,
                base.key.storage_key(), turn, reason);
}

void ContextManager::delete_session(const ContextKey& key) {
  key.validate();
  store_.remove(key.model_id, key.storage_key());
}

}  // namespace discedge

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

#include "discedge/wire.hpp"

#include <fmt/format.h>

#include "discedge/errors.hpp"

namespace discedge {

std::string_view request_mode_name(RequestMode mode) {
  switch (mode) {
    case RequestMode::kRaw: return "raw";
    case RequestMode::kTokenized: return "tokenized";
    case RequestMode::kClientSide: return "client_side";
  }
  return "unknown";
}

RequestMode parse_request_mode(std::string_view name) {
  if (name == "raw") return RequestMode::kRaw;
  if (name == "tokenized") return RequestMode::kTokenized;
  if (name == "client_side") return RequestMode::kClientSide;
  throw BadRequestError("unknown mode '" + std::string(name) + "'");
}

std::optional<ContextMode> storage_mode(RequestMode mode) {
  switch (mode) {
    case RequestMode::kRaw: return ContextMode::kRaw;
    case RequestMode::kTokenized: return ContextMode::kTokenized;
    case RequestMode::kClientSide: return std::nullopt;
  }
  return std::nullopt;
}

std::string_view consistency_name(Consistency c) {
  switch (c) {
    case Consistency::kFresh: return "fresh";
    case Consistency::kStaleServed: return "stale_served";
    case Consistency::kCreated: return "created";
  }
  return "unknown";
}

Consistency parse_consistency(std::string_view name) {
  if (name == "fresh") return Consistency::kFresh;
  if (name == "stale_served") return Consistency::kStaleServed;
  if (name == "created") return Consistency::kCreated;
  throw DecodeError("unknown consistency '" + std::string(name) + "'");
}

void CompletionRequest::validate() const {
  if (model.empty()) throw BadRequestError("model is required");
  if (turn < 1) throw BadRequestError("turn must be >= 1");
  if (params.max_tokens < 1) throw BadRequestError("n_predict must be >= 1");
  if (mode == RequestMode::kClientSide) {
    if (!history) throw BadRequestError("client_side mode requires history");
    if (history->size() != 2 * (turn - 1)) {
      throw BadRequestError("history has " + std::to_string(history->size()) +
                            " entries, expected " + std::to_string(2 * (turn - 1)));
    }
    for (std::size_t i = 0; i < history->size(); ++i) {
      const Role expected = i % 2 == 0 ? Role::kUser : Role::kAssistant;
      if ((*history)[i].role != expected) {
        throw BadRequestError("history must alternate user/assistant");
      }
    }
  } else if (history) {
    throw BadRequestError("history is only allowed in client_side mode");
  }
}

Bytes encode_json(const Json& message) {
  const std::string text = message.dump();
  return Bytes(text.begin(), text.end());
}

Json decode_json(ByteView frame) {
  try {
    return Json::parse(frame.begin(), frame.end());
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("invalid JSON message: ") + e.what());
  }
}

Json request_to_json(const CompletionRequest& req) {
  Json j;
  j["type"] = "completion";
  j["model"] = req.model;
  j["user_id"] = req.user_id;
  j["session_id"] = req.session_id;
  j["turn"] = req.turn;
  j["mode"] = request_mode_name(req.mode);
  j["prompt"] = req.prompt;
  if (req.history) {
    Json history = Json::array();
    for (const auto& h : *req.history) {
      history.push_back({{"role", role_name(h.role)}, {"text", h.text}});
    }
    j["history"] = std::move(history);
  }
  if (req.system_prompt) j["system"] = *req.system_prompt;
  j["params"] = {{"seed", req.params.seed},
                 {"temperature", req.params.temperature},
                 {"n_predict", req.params.max_tokens}};
  return j;
}

CompletionRequest request_from_json(const Json& j) {
  try {
    CompletionRequest req;
    req.model = j.at("model").get<std::string>();
    req.user_id = j.value("user_id", std::string{});
    req.session_id = j.value("session_id", std::string{});
    req.turn = j.value("turn", std::uint64_t{1});
    req.mode = parse_request_mode(j.value("mode", std::string{"tokenized"}));
    req.prompt = j.at("prompt").get<std::string>();
    if (auto it = j.find("history"); it != j.end() && !it->is_null()) {
      std::vector<HistoryEntry> history;
      for (const auto& h : *it) {
        history.push_back({parse_role(h.at("role").get<std::string>()),
                           h.at("text").get<std::string>()});
      }
      req.history = std::move(history);
    }
    if (auto it = j.find("system"); it != j.end() && !it->is_null()) {
      req.system_prompt = it->get<std::string>();
    }
    if (auto it = j.find("params"); it != j.end()) {
      req.params.seed = it->value("seed", std::int64_t{123});
      req.params.temperature = it->value("temperature", 0.0);
      req.params.max_tokens = it->value("n_predict", std::uint32_t{128});
    }
    return req;
  } catch (const nlohmann::json::exception& e) {
    throw BadRequestError(std::string("malformed completion request: ") + e.what());
  }
}

std::string fingerprint_hex(std::uint64_t fp) { return fmt::format("{:016x}", fp); }

Json response_to_json(const CompletionResponse& resp) {
  Json j;
  j["type"] = "completion_ok";
  j["text"] = resp.text;
  j["tokens_generated"] = resp.tokens_generated;
  j["turn"] = resp.turn;
  j["consistency"] = consistency_name(resp.consistency);
  j["timings"] = {{"tokenize_ms", resp.timings.tokenize_ms},
                  {"inference_ms", resp.timings.inference_ms},
                  {"total_ms", resp.timings.total_ms}};
  j["user_id"] = resp.user_id;
  j["session_id"] = resp.session_id;
  j["retries"] = resp.retries;
  j["context_version"] = resp.context_version;
  j["input_tokens"] = resp.input_tokens;
  j["input_fingerprint"] = fingerprint_hex(resp.input_fingerprint);
  j["token_ids"] = resp.token_ids;
  return j;
}

CompletionResponse response_from_json(const Json& j) {
  try {
    CompletionResponse resp;
    resp.text = j.at("text").get<std::string>();
    resp.tokens_generated = j.at("tokens_generated").get<std::uint32_t>();
    resp.turn = j.at("turn").get<std::uint64_t>();
    resp.consistency = parse_consistency(j.at("consistency").get<std::string>());
    const auto& t = j.at("timings");
    resp.timings = {t.at("tokenize_ms").get<double>(), t.at("inference_ms").get<double>(),
                    t.at("total_ms").get<double>()};
    resp.user_id = j.value("user_id", std::string{});
    resp.session_id = j.value("session_id", std::string{});
    resp.retries = j.value("retries", std::uint32_t{0});
    resp.context_version = j.value("context_version", std::uint64_t{0});
    resp.input_tokens = j.value("input_tokens", std::size_t{0});
    resp.input_fingerprint =
        std::stoull(j.value("input_fingerprint", std::string{"0"}), nullptr, 16);
    resp.token_ids = j.value("token_ids", TokenSequence{});
    return resp;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("malformed completion response: ") + e.what());
  }
}

Json error_to_json(const std::exception& error) {
  Json j;
  j["type"] = "error";
  if (const auto* e = dynamic_cast<const Error*>(&error)) {
    j["code"] = e->code();
  } else {
    j["code"] = "internal";
  }
  j["detail"] = error.what();
  if (const auto* stale = dynamic_cast<const StaleContextError*>(&error)) {
    j["local_version"] = stale->local_version();
    j["expected_version"] = stale->expected_version();
  }
  return j;
}

void throw_error_reply(const Json& j) {
  const std::string code = j.value("code", std::string{"internal"});
  const std::string detail = j.value("detail", std::string{});
  if (code == "stale_context") {
    throw StaleContextError(j.value("local_version", std::uint64_t{0}),
                            j.value("expected_version", std::uint64_t{0}));
  }
  if (code == "turn_conflict") throw TurnConflictError(detail);
  if (code == "model_not_served") throw ModelNotServedError(detail);
  if (code == "model_not_loaded") throw ModelNotLoadedError(detail);
  if (code == "bad_request") throw BadRequestError(detail);
  if (code == "no_keygroup") throw NoKeygroupError(detail);
  if (code == "mode_error") throw ModeError(detail);
  throw Error(code, detail);
}

}  // namespace discedge

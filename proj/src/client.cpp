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

#include "discedge/client.hpp"

#include "discedge/errors.hpp"

namespace discedge {

MobilitySchedule::MobilitySchedule(std::vector<std::string> per_turn)
    : per_turn_(std::move(per_turn)) {
  if (per_turn_.empty()) throw ConfigError("mobility schedule is empty");
}

MobilitySchedule MobilitySchedule::fixed(std::string node) {
  return MobilitySchedule({std::move(node)});
}

MobilitySchedule MobilitySchedule::alternating(std::string a, std::string b) {
  return MobilitySchedule({a, a, b, b, a, a, b, b, b});
}

const std::string& MobilitySchedule::node_for(std::uint64_t turn) const {
  if (turn == 0) throw BadRequestError("turns are 1-based");
  const std::size_t index = std::min<std::uint64_t>(turn, per_turn_.size()) - 1;
  return per_turn_[index];
}

LlmClient::LlmClient(std::string client_id, Transport& transport, Runtime& runtime)
    : client_id_(std::move(client_id)), transport_(transport), runtime_(runtime) {}

CompletionRequest LlmClient::build_request(const ClientSession& session,
                                           const std::string& prompt) const {
  CompletionRequest req;
  req.model = session.model;
  req.user_id = session.user_id;
  req.session_id = session.session_id;
  req.turn = session.turn;
  req.mode = session.mode;
  req.prompt = prompt;
  req.params = session.params;
  if (session.mode == RequestMode::kClientSide) {
    req.history = session.local_history;
    req.system_prompt = session.system_prompt;
  } else if (session.turn == 1) {
    req.system_prompt = session.system_prompt;
  }
  return req;
}

Json LlmClient::call(const std::string& node_id, const Json& message) {
  Json reply = decode_json(transport_.request(client_id_, node_id, encode_json(message)));
  if (reply.value("type", std::string{}) == "error") throw_error_reply(reply);
  return reply;
}

AskResult LlmClient::ask(ClientSession& session, const std::string& node_id,
                         const std::string& prompt) {
  const CompletionRequest req = build_request(session, prompt);
  const Bytes frame = encode_json(request_to_json(req));
  const std::size_t request_bytes = frame.size() + kLengthPrefixSize;

  const Nanos start = runtime_.now();
  Json reply = decode_json(transport_.request(client_id_, node_id, frame));
  const Nanos elapsed = runtime_.now() - start;
  if (reply.value("type", std::string{}) == "error") throw_error_reply(reply);
  CompletionResponse resp = response_from_json(reply);
  if (resp.turn != req.turn) {
    throw DecodeError("node echoed turn " + std::to_string(resp.turn) + " for turn " +
                      std::to_string(req.turn));
  }

  AskResult result;
  result.text = resp.text;
  auto& m = result.metrics;
  m.turn = resp.turn;
  m.node = node_id;
  m.response_time_ms = to_ms(elapsed);
  m.request_bytes = request_bytes;
  m.tokens_generated = resp.tokens_generated;
  m.tokens_per_second = resp.timings.inference_ms > 0
                            ? resp.tokens_generated / (resp.timings.inference_ms / 1000.0)
                            : 0.0;
  m.consistency = resp.consistency;
  m.retries = resp.retries;
  m.timings = resp.timings;
  m.input_tokens = resp.input_tokens;
  m.input_fingerprint = resp.input_fingerprint;
  m.token_ids = std::move(resp.token_ids);

  session.user_id = resp.user_id;
  session.session_id = resp.session_id;
  session.local_history.push_back({Role::kUser, prompt});
  session.local_history.push_back({Role::kAssistant, resp.text});
  session.turn += 1;
  return result;
}

void LlmClient::delete_session(const ClientSession& session, const std::string& node_id) {
  call(node_id, Json{{"type", "delete_session"},
                     {"model", session.model},
                     {"user_id", session.user_id},
                     {"session_id", session.session_id}});
}

}  // namespace discedge

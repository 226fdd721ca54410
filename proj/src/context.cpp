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

#include "discedge/context.hpp"

#include "discedge/errors.hpp"

namespace discedge {
namespace {

bool payload_matches(ContextMode mode, const Payload& payload) {
  return mode == ContextMode::kRaw ? std::holds_alternative<std::string>(payload)
                                   : std::holds_alternative<TokenSequence>(payload);
}

void check_turn_layout(const SessionContext& ctx, auto&& fail) {
  const std::size_t leading = ctx.has_system_turn() ? 1 : 0;
  if (ctx.turns.size() != leading + 2 * ctx.version) {
    fail("turn count " + std::to_string(ctx.turns.size()) +
         " does not match version " + std::to_string(ctx.version));
  }
  for (std::size_t i = leading; i < ctx.turns.size(); ++i) {
    const Role expected = (i - leading) % 2 == 0 ? Role::kUser : Role::kAssistant;
    if (ctx.turns[i].role != expected) fail("turns must alternate user/assistant");
  }
}

}  // namespace

std::string_view role_name(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "unknown";
}

Role parse_role(std::string_view name) {
  if (name == "system") return Role::kSystem;
  if (name == "user") return Role::kUser;
  if (name == "assistant") return Role::kAssistant;
  throw BadRequestError("unknown role '" + std::string(name) + "'");
}

std::string_view mode_name(ContextMode mode) {
  return mode == ContextMode::kRaw ? "raw" : "tokenized";
}

void ContextKey::validate() const {
  for (const std::string* part : {&model_id, &user_id, &session_id}) {
    if (part->empty()) throw BadRequestError("context key component is empty");
    if (part->find('/') != std::string::npos) {
      throw BadRequestError("context key component '" + *part +
                            "' contains '/'");
    }
  }
}

std::string ContextKey::storage_key() const {
  return model_id + "/" + user_id + "/" + session_id;
}

ContextKey ContextKey::parse(std::string_view storage_key) {
  const auto a = storage_key.find('/');
  const auto b = a == std::string_view::npos ? a : storage_key.find('/', a + 1);
  if (b == std::string_view::npos ||
      storage_key.find('/', b + 1) != std::string_view::npos) {
    throw BadRequestError("malformed storage key '" + std::string(storage_key) +
                          "'");
  }
  ContextKey key{std::string(storage_key.substr(0, a)),
                 std::string(storage_key.substr(a + 1, b - a - 1)),
                 std::string(storage_key.substr(b + 1))};
  key.validate();
  return key;
}

Bytes serialize_context(const SessionContext& ctx) {
  check_turn_layout(ctx, [](const std::string& m) { throw SerializationError(m); });
  Bytes out;
  out.push_back(kContextFormatVersion);
  out.push_back(static_cast<std::uint8_t>(ctx.mode));
  put_varint(out, ctx.version);
  put_varint(out, ctx.expires_at_ms);
  put_varint(out, ctx.turns.size());
  for (const Turn& turn : ctx.turns) {
    if (!payload_matches(ctx.mode, turn.payload)) {
      throw SerializationError("turn payload form does not match context mode " +
                               std::string(mode_name(ctx.mode)));
    }
    out.push_back(static_cast<std::uint8_t>(turn.role));
    if (const auto* text = std::get_if<std::string>(&turn.payload)) {
      put_length_prefixed(out, *text);
    } else {
      const auto& tokens = std::get<TokenSequence>(turn.payload);
      put_varint(out, encoded_size(tokens));
      for (TokenId id : tokens) put_varint(out, id);
    }
  }
  return out;
}

SessionContext deserialize_context(ByteView frame, ContextKey key,
                                   std::string origin_node) {
  ByteReader reader(frame);
  const std::uint8_t format = reader.u8();
  if (format != kContextFormatVersion) {
    throw VersionError("unsupported context format version " +
                       std::to_string(format));
  }
  SessionContext ctx;
  ctx.key = std::move(key);
  ctx.origin_node = std::move(origin_node);
  const std::uint8_t mode = reader.u8();
  if (mode > 1) throw DecodeError("unknown context mode " + std::to_string(mode));
  ctx.mode = static_cast<ContextMode>(mode);
  ctx.version = reader.varint();
  ctx.expires_at_ms = reader.varint();
  const std::uint64_t count = reader.varint();
  // Every turn needs at least two bytes.
  if (count > reader.remaining() / 2) throw DecodeError("turn count exceeds frame");
  ctx.turns.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint8_t role = reader.u8();
    if (role > 2) throw DecodeError("unknown role byte " + std::to_string(role));
    ByteView payload = reader.length_prefixed();
    Turn turn{static_cast<Role>(role), {}};
    if (ctx.mode == ContextMode::kRaw) {
      turn.payload = to_string(payload);
    } else {
      turn.payload = decode_tokens(payload);
    }
    ctx.turns.push_back(std::move(turn));
  }
  if (!reader.done()) throw DecodeError("trailing bytes after context frame");
  if (!ctx.turns.empty()) {
    for (std::size_t i = 1; i < ctx.turns.size(); ++i) {
      if (ctx.turns[i].role == Role::kSystem) {
        throw DecodeError("system turn after position 0");
      }
    }
  }
  check_turn_layout(ctx, [](const std::string& m) { throw DecodeError(m); });
  return ctx;
}

SessionContext make_context(ContextKey key, ContextMode mode,
                            std::uint64_t expires_at_ms, std::string origin_node,
                            std::optional<Payload> system) {
  SessionContext ctx;
  ctx.key = std::move(key);
  ctx.mode = mode;
  ctx.expires_at_ms = expires_at_ms;
  ctx.origin_node = std::move(origin_node);
  if (system) {
    if (!payload_matches(mode, *system)) {
      throw ModeError("system payload does not match context mode");
    }
    ctx.turns.push_back({Role::kSystem, std::move(*system)});
  }
  return ctx;
}

SessionContext append_turn(const SessionContext& ctx, Payload user,
                           Payload assistant) {
  if (!payload_matches(ctx.mode, user) || !payload_matches(ctx.mode, assistant)) {
    throw ModeError("payload form does not match " +
                    std::string(mode_name(ctx.mode)) + " context");
  }
  SessionContext next = ctx;
  next.turns.push_back({Role::kUser, std::move(user)});
  next.turns.push_back({Role::kAssistant, std::move(assistant)});
  ++next.version;
  return next;
}

std::string role_marker(Role role) {
  return "<|" + std::string(role_name(role)) + "|>";
}

std::string render_turn_text(Role role, std::string_view text) {
  std::string out = role_marker(role);
  out += '\n';
  out += text;
  out += '\n';
  return out;
}

std::string render_prompt_text(std::string_view prompt) {
  return render_turn_text(Role::kUser, prompt) + role_marker(Role::kAssistant) +
         "\n";
}

std::string render_history_text(const SessionContext& ctx) {
  if (ctx.mode != ContextMode::kRaw) {
    throw ModeError("render_history_text needs a raw context");
  }
  std::string out;
  for (const Turn& turn : ctx.turns) {
    out += render_turn_text(turn.role, std::get<std::string>(turn.payload));
  }
  return out;
}

TokenSequence render_history_tokens(const SessionContext& ctx,
                                    const Vocab& vocab) {
  if (ctx.mode != ContextMode::kTokenized) {
    throw ModeError("render_history_tokens needs a tokenized context");
  }
  // Markers and the trailing newline are tokenized once per render; the
  // stored payloads are spliced in as-is.
  const TokenSequence markers[] = {
      vocab.tokenize(role_marker(Role::kSystem) + "\n"),
      vocab.tokenize(role_marker(Role::kUser) + "\n"),
      vocab.tokenize(role_marker(Role::kAssistant) + "\n"),
  };
  const TokenSequence newline = vocab.tokenize("\n");
  TokenSequence out;
  for (const Turn& turn : ctx.turns) {
    const auto& marker = markers[static_cast<std::size_t>(turn.role)];
    const auto& payload = std::get<TokenSequence>(turn.payload);
    out.insert(out.end(), marker.begin(), marker.end());
    out.insert(out.end(), payload.begin(), payload.end());
    out.insert(out.end(), newline.begin(), newline.end());
  }
  return out;
}

}  // namespace discedge

namespace discedge {

std::string model_id_from_name(std::string_view model_name) {
  std::string out;
  for (char c : model_name) {
    if (c == '/') {
      out += "--";
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace discedge

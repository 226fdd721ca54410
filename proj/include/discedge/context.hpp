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

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "discedge/bytes.hpp"
#include "discedge/tokenizer.hpp"

namespace discedge {

enum class Role : std::uint8_t { kSystem = 0, kUser = 1, kAssistant = 2 };
enum class ContextMode : std::uint8_t { kRaw = 0, kTokenized = 1 };

std::string_view role_name(Role role);
Role parse_role(std::string_view name);  // throws BadRequestError
std::string_view mode_name(ContextMode mode);

// Identifies one session context. The model id selects the keygroup.
struct ContextKey {
  std::string model_id;
  std::string user_id;
  std::string session_id;

  // Throws BadRequestError if a component is empty or contains '/'.
  void validate() const;
  // "model_id/user_id/session_id"
  std::string storage_key() const;
  static ContextKey parse(std::string_view storage_key);

  auto operator<=>(const ContextKey&) const = default;
};

using Payload = std::variant<std::string, TokenSequence>;

struct Turn {
  Role role;
  Payload payload;

  bool operator==(const Turn&) const = default;
};

// Conversation history of one session. `version` counts completed
// (user, assistant) pairs; `turns` holds exactly 2 * version entries plus an
// optional leading system turn. Values are never mutated in place.
struct SessionContext {
  ContextKey key;
  ContextMode mode = ContextMode::kTokenized;
  std::uint64_t version = 0;
  std::vector<Turn> turns;
  std::uint64_t expires_at_ms = 0;
  std::string origin_node;

  bool has_system_turn() const {
    return !turns.empty() && turns.front().role == Role::kSystem;
  }
  bool operator==(const SessionContext&) const = default;
};

inline constexpr std::uint8_t kContextFormatVersion = 1;

// Binary context frame:
//   u8 format version | u8 mode | varint version | varint expires_at_ms |
//   varint turn count | turn*
// turn := u8 role | varint payload length | payload
// The payload is UTF-8 text (raw mode) or encode_tokens output (tokenized).
// Key and origin travel in the replication frame, not here.
Bytes serialize_context(const SessionContext& ctx);
SessionContext deserialize_context(ByteView frame, ContextKey key = {},
                                   std::string origin_node = {});

// Empty context, optionally seeded with a system turn.
SessionContext make_context(ContextKey key, ContextMode mode,
                            std::uint64_t expires_at_ms,
                            std::string origin_node,
                            std::optional<Payload> system = std::nullopt);

// Returns a copy with one more completed pair. Throws ModeError when a
// payload does not match ctx.mode.
SessionContext append_turn(const SessionContext& ctx, Payload user,
                           Payload assistant);

// Role-marked rendering: "<|role|>\n" + payload + "\n" per turn.
std::string role_marker(Role role);
std::string render_turn_text(Role role, std::string_view text);
// The new user prompt followed by the assistant marker the model completes.
std::string render_prompt_text(std::string_view prompt);

// Raw-mode history text. Throws ModeError on a tokenized context.
std::string render_history_text(const SessionContext& ctx);
// Tokenized-mode history ids: stored sequences are concatenated with
// pre-tokenized markers and never re-tokenized. Equals
// vocab.tokenize(render_history_text(raw twin)). Throws ModeError on a raw
// context.
TokenSequence render_history_tokens(const SessionContext& ctx,
                                    const Vocab& vocab);

}  // namespace discedge

namespace discedge {

// Model names may contain '/' (e.g. "org/model"), which storage keys
// reserve; the model id replaces every '/' with "--".
std::string model_id_from_name(std::string_view model_name);

}  // namespace discedge

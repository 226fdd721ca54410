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
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "discedge/bytes.hpp"

namespace discedge {

using TokenId = std::uint32_t;
using TokenSequence = std::vector<TokenId>;

// Ids below this value are raw UTF-8 bytes; vocab entry k has id kByteTokens+k.
inline constexpr TokenId kByteTokens = 256;

bool is_valid_utf8(std::string_view text);
std::size_t utf8_length(std::string_view text);

// Model-scoped vocabulary for greedy longest-match tokenization with byte
// fallback. Immutable once built and cheap to copy (shared storage), so one
// instance can be handed to every node that serves the model.
//
// Matching is over bytes and case-sensitive. Entries come from a
// line-per-entry file and therefore never contain '\n'; rendered contexts
// rely on that, because no match can cross a newline and tokenization then
// distributes over newline-delimited segments.
class Vocab {
 public:
  Vocab() : Vocab(std::string{}, {}) {}

  // Throws VocabError on duplicate or empty entries.
  static Vocab from_entries(std::string model_id,
                            std::vector<std::string> entries);
  // One entry per LF-terminated line. When `model_id` is empty the file
  // stem is used (`<model_id>.vocab`).
  static Vocab load(const std::filesystem::path& path,
                    std::string model_id = {});

  const std::string& model_id() const { return data_->model_id; }
  std::size_t size() const { return data_->entries.size(); }
  TokenId id_limit() const {
    return kByteTokens + static_cast<TokenId>(data_->entries.size());
  }
  const std::vector<std::string>& entries() const { return data_->entries; }
  std::optional<TokenId> find(std::string_view entry) const;

  TokenSequence tokenize(std::string_view text) const;
  // Length in bytes of the longest entry that is a prefix of `text`, or 0.
  std::size_t longest_match(std::string_view text) const;

  // Throws UnknownTokenError for ids past id_limit() and EncodingError when
  // the concatenated bytes are not valid UTF-8.
  std::string detokenize(std::span<const TokenId> tokens) const;

 private:
  struct TrieNode {
    std::vector<std::pair<std::uint8_t, std::uint32_t>> children;  // sorted
    std::int64_t terminal = -1;
  };
  struct Data {
    std::string model_id;
    std::vector<std::string> entries;
    std::vector<TrieNode> trie;
  };

  Vocab(std::string model_id, std::vector<std::string> entries);
  // Returns (entry index, byte length) of the longest match at the start of
  // `text`, or nullopt.
  std::optional<std::pair<TokenId, std::size_t>> match(
      std::string_view text) const;

  std::shared_ptr<const Data> data_;
};

// Concatenated unsigned LEB128 of every id. This is the stored and
// replicated form of a tokenized payload.
Bytes encode_tokens(std::span<const TokenId> tokens);
TokenSequence decode_tokens(ByteView bytes);
std::size_t encoded_size(std::span<const TokenId> tokens);

}  // namespace discedge

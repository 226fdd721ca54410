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

#include "discedge/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include "discedge/errors.hpp"

namespace discedge {

bool is_valid_utf8(std::string_view text) {
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = s[i];
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t len;
    std::uint32_t cp;
    if ((c & 0xe0) == 0xc0) {
      len = 2;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      len = 3;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((s[i + k] & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (s[i + k] & 0x3f);
    }
    // Overlong forms, surrogates and values past U+10FFFF.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || cp > 0x10ffff ||
        (cp >= 0xd800 && cp <= 0xdfff)) {
      return false;
    }
    i += len;
  }
  return true;
}

std::size_t utf8_length(std::string_view text) {
  return static_cast<std::size_t>(std::count_if(
      text.begin(), text.end(),
      [](char c) { return (static_cast<unsigned char>(c) & 0xc0) != 0x80; }));
}

Vocab::Vocab(std::string model_id, std::vector<std::string> entries) {
  auto data = std::make_shared<Data>();
  data->model_id = std::move(model_id);
  data->entries = std::move(entries);
  data->trie.emplace_back();
  std::unordered_set<std::string_view> seen;
  for (std::size_t k = 0; k < data->entries.size(); ++k) {
    const std::string& entry = data->entries[k];
    if (entry.empty()) {
      throw VocabError("empty vocab entry at index " + std::to_string(k));
    }
    if (!seen.insert(entry).second) {
      throw VocabError("duplicate vocab entry '" + entry + "'");
    }
    if (!is_valid_utf8(entry)) {
      throw VocabError("vocab entry " + std::to_string(k) + " is not UTF-8");
    }
    std::uint32_t node = 0;
    for (char ch : entry) {
      const auto byte = static_cast<std::uint8_t>(ch);
      auto& children = data->trie[node].children;
      auto it = std::lower_bound(
          children.begin(), children.end(), byte,
          [](const auto& child, std::uint8_t b) { return child.first < b; });
      if (it != children.end() && it->first == byte) {
        node = it->second;
      } else {
        const auto next = static_cast<std::uint32_t>(data->trie.size());
        children.insert(it, {byte, next});
        data->trie.emplace_back();
        node = next;
      }
    }
    data->trie[node].terminal = static_cast<std::int64_t>(k);
  }
  data_ = std::move(data);
}

Vocab Vocab::from_entries(std::string model_id,
                          std::vector<std::string> entries) {
  return Vocab(std::move(model_id), std::move(entries));
}

Vocab Vocab::load(const std::filesystem::path& path, std::string model_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VocabError("cannot open vocab file " + path.string());
  std::string content{std::istreambuf_iterator<char>(in),
                      std::istreambuf_iterator<char>()};
  if (!is_valid_utf8(content)) {
    throw VocabError("vocab file " + path.string() + " is not valid UTF-8");
  }
  std::vector<std::string> entries;
  std::size_t start = 0;
  std::size_t line = 1;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    if (end == start) {
      throw VocabError(path.string() + ":" + std::to_string(line) +
                       ": empty line");
    }
    entries.emplace_back(content.substr(start, end - start));
    start = end + 1;
    ++line;
  }
  if (model_id.empty()) model_id = path.stem().string();
  try {
    return Vocab(std::move(model_id), std::move(entries));
  } catch (const VocabError& e) {
    throw VocabError(path.string() + ": " + e.what());
  }
}

std::optional<TokenId> Vocab::find(std::string_view entry) const {
  auto m = match(entry);
  if (m && m->second == entry.size()) return kByteTokens + m->first;
  return std::nullopt;
}

std::optional<std::pair<TokenId, std::size_t>> Vocab::match(
    std::string_view text) const {
  const auto& trie = data_->trie;
  std::optional<std::pair<TokenId, std::size_t>> best;
  std::uint32_t node = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto byte = static_cast<std::uint8_t>(text[i]);
    const auto& children = trie[node].children;
    auto it = std::lower_bound(
        children.begin(), children.end(), byte,
        [](const auto& child, std::uint8_t b) { return child.first < b; });
    if (it == children.end() || it->first != byte) break;
    node = it->second;
    if (trie[node].terminal >= 0) {
      best.emplace(static_cast<TokenId>(trie[node].terminal), i + 1);
    }
  }
  return best;
}

std::size_t Vocab::longest_match(std::string_view text) const {
  auto m = match(text);
  return m ? m->second : 0;
}

TokenSequence Vocab::tokenize(std::string_view text) const {
  TokenSequence out;
  out.reserve(text.size() / 3 + 1);
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (auto m = match(text.substr(pos))) {
      out.push_back(kByteTokens + m->first);
      pos += m->second;
    } else {
      out.push_back(static_cast<std::uint8_t>(text[pos]));
      ++pos;
    }
  }
  return out;
}

std::string Vocab::detokenize(std::span<const TokenId> tokens) const {
  std::string out;
  const TokenId limit = id_limit();
  for (TokenId id : tokens) {
    if (id < kByteTokens) {
      out.push_back(static_cast<char>(id));
    } else if (id < limit) {
      out += data_->entries[id - kByteTokens];
    } else {
      throw UnknownTokenError("token id " + std::to_string(id) +
                              " outside vocab of size " +
                              std::to_string(size()));
    }
  }
  if (!is_valid_utf8(out)) {
    throw EncodingError("fallback bytes do not form valid UTF-8");
  }
  return out;
}

Bytes encode_tokens(std::span<const TokenId> tokens) {
  Bytes out;
  out.reserve(encoded_size(tokens));
  for (TokenId id : tokens) put_varint(out, id);
  return out;
}

std::size_t encoded_size(std::span<const TokenId> tokens) {
  std::size_t n = 0;
  for (TokenId id : tokens) n += varint_size(id);
  return n;
}

TokenSequence decode_tokens(ByteView bytes) {
  ByteReader reader(bytes);
  TokenSequence out;
  while (!reader.done()) {
    const std::uint64_t id = reader.varint();
    if (id > UINT32_MAX) throw DecodeError("token id exceeds 32 bits");
    out.push_back(static_cast<TokenId>(id));
  }
  return out;
}

}  // namespace discedge

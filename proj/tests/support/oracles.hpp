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

// Independent reference implementations used as test oracles. Nothing here
// calls into the library under test.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

// Greedy longest match by exhaustive scan of every entry at every position.
inline std::vector<std::uint32_t> tokenize(const std::vector<std::string>& entries,
                                           const std::string& text) {
  std::vector<std::uint32_t> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t best_len = 0;
    std::uint32_t best_id = 0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const std::string& e = entries[k];
      if (e.size() > best_len && text.compare(pos, e.size(), e) == 0) {
        best_len = e.size();
        best_id = static_cast<std::uint32_t>(256 + k);
      }
    }
    if (best_len == 0) {
      out.push_back(static_cast<unsigned char>(text[pos]));
      pos += 1;
    } else {
      out.push_back(best_id);
      pos += best_len;
    }
  }
  return out;
}

// LEB128 by peeling base-128 digits, most significant group last.
inline std::vector<std::uint8_t> leb128(std::uint64_t v) {
  std::vector<std::uint64_t> digits;
  do {
    digits.push_back(v % 128);
    v /= 128;
  } while (v != 0);
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    const bool more = i + 1 < digits.size();
    out.push_back(static_cast<std::uint8_t>(digits[i] + (more ? 128 : 0)));
  }
  return out;
}

inline std::size_t encoded_size(const std::vector<std::uint32_t>& ids) {
  std::size_t n = 0;
  for (auto id : ids) n += leb128(id).size();
  return n;
}

// 64-bit FNV-1a followed by the splitmix64 finalizer, written out from the
// published constants.
inline std::uint64_t fnv1a_splitmix(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
  return h ^ (h >> 31);
}

inline std::uint64_t hash64(std::int64_t seed, const std::string& model,
                            const std::vector<std::uint32_t>& ids) {
  std::vector<std::uint8_t> bytes;
  const auto useed = static_cast<std::uint64_t>(seed);
  for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(useed >> (8 * i)));
  for (char c : model) bytes.push_back(static_cast<std::uint8_t>(c));
  bytes.push_back(0xff);
  for (auto id : ids) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(id >> (8 * i)));
  }
  return fnv1a_splitmix(bytes);
}

// Final replicated state implied by a set of accepted writes: per key, the
// write with the highest (version, origin).
struct Write {
  std::string key;
  std::uint64_t version;
  std::string origin;
  bool tombstone;
  std::string bytes;
};

inline std::map<std::string, Write> lww_final(const std::vector<Write>& writes) {
  std::map<std::string, Write> out;
  for (const auto& w : writes) {
    auto it = out.find(w.key);
    if (it == out.end() ||
        std::tie(w.version, w.origin) > std::tie(it->second.version, it->second.origin)) {
      out.insert_or_assign(w.key, w);
    }
  }
  return out;
}

// Text a chat transcript renders to, from the marker template.
inline std::string render(const std::vector<std::pair<std::string, std::string>>& turns) {
  std::string out;
  for (const auto& [role, text] : turns) out += "<|" + role + "|>\n" + text + "\n";
  return out;
}

}  // namespace oracle

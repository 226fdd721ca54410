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

#include "discedge/vocab_builder.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "discedge/errors.hpp"

namespace discedge {
namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool is_lower_word(std::string_view w) {
  return std::all_of(w.begin(), w.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) != 0;
  });
}

}  // namespace

std::vector<std::string> role_marker_entries() {
  return {"<|system|>", "<|user|>", "<|assistant|>"};
}

std::vector<std::string> build_vocab_entries(std::string_view corpus,
                                             const VocabBuildOptions& options) {
  struct Stat {
    std::size_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string, Stat> stats;
  std::size_t order = 0;
  std::size_t i = 0;
  while (i < corpus.size()) {
    if (!is_word_char(corpus[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < corpus.size() && is_word_char(corpus[j])) ++j;
    auto [it, inserted] = stats.try_emplace(std::string(corpus.substr(i, j - i)));
    if (inserted) it->second.first = order++;
    ++it->second.count;
    i = j;
  }

  std::vector<std::pair<std::string, Stat>> ranked(stats.begin(), stats.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.second.first < b.second.first;
  });
  if (ranked.size() > options.max_words) ranked.resize(options.max_words);

  std::vector<std::string> entries = role_marker_entries();
  std::unordered_set<std::string> seen(entries.begin(), entries.end());
  auto add = [&](std::string e) {
    if (seen.insert(e).second) entries.push_back(std::move(e));
  };
  for (const auto& [word, stat] : ranked) {
    // A bare single character is already one byte through fallback.
    if (word.size() >= 2) add(word);
    if (options.leading_space_forms) add(" " + word);
    if (options.capitalized_forms && is_lower_word(word)) {
      std::string cap = word;
      cap[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(cap[0])));
      if (cap.size() >= 2) add(cap);
      if (options.leading_space_forms) add(" " + cap);
    }
  }
  return entries;
}

void write_vocab_file(const std::filesystem::path& path,
                      const std::vector<std::string>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw VocabError("cannot write " + path.string());
  for (const auto& e : entries) out << e << '\n';
}

}  // namespace discedge

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

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace discedge {

struct VocabBuildOptions {
  std::size_t max_words = 2500;
  // Add " word" next to "word" so word boundaries cost no extra token.
  bool leading_space_forms = true;
  // Add "Word" / " Word" for all-lowercase words (sentence starts).
  bool capitalized_forms = true;
};

// Role markers are always the first entries, so they get ids 256, 257, 258.
std::vector<std::string> role_marker_entries();

// Words are maximal runs of ASCII letters and digits. They are ranked by
// frequency, ties broken by first appearance, and the top `max_words` are
// expanded into entries. Deterministic in the corpus bytes.
std::vector<std::string> build_vocab_entries(std::string_view corpus,
                                             const VocabBuildOptions& options);

void write_vocab_file(const std::filesystem::path& path,
                      const std::vector<std::string>& entries);

}  // namespace discedge

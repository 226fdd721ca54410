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
#include <optional>
#include <string>
#include <vector>

#include "discedge/tokenizer.hpp"

namespace discedge {

// One client interaction. `message` is the 1-based scenario position;
// `turn` is the client's counter when it was sent (they differ only after
// a failed turn).
struct TurnRecord {
  std::string mode;
  std::uint32_t repeat = 0;
  std::size_t message = 0;
  std::uint64_t turn = 0;
  std::string node;
  bool ok = true;
  std::string error;  // error code when !ok
  double response_time_ms = 0;
  double tokens_per_second = 0;
  std::size_t request_bytes = 0;
  std::uint32_t tokens_generated = 0;
  std::string consistency;
  std::uint32_t retries = 0;
  double tokenize_ms = 0;
  double inference_ms = 0;
  std::size_t input_tokens = 0;
  std::uint64_t input_fingerprint = 0;
  std::uint64_t output_hash = 0;
  TokenSequence token_ids;  // in memory only; CSVs carry output_hash
};

// Cumulative sync bytes sent from -> to, sampled after each message.
struct SyncSample {
  std::string mode;
  std::uint32_t repeat = 0;
  std::size_t message = 0;
  std::string from;
  std::string to;
  std::uint64_t bytes = 0;
};

// Totals after the run has quiesced.
struct SyncTotal {
  std::string mode;
  std::uint32_t repeat = 0;
  std::string from;
  std::string to;
  std::uint64_t frames = 0;
  std::uint64_t bytes = 0;
};

struct Aggregate {
  std::size_t n = 0;
  double min = 0;
  double median = 0;
  double max = 0;
  double mean = 0;
  // Normal-approximation 95% interval; only meaningful when n > 3.
  double ci_low = 0;
  double ci_high = 0;
  bool has_ci = false;
};
Aggregate aggregate(std::vector<double> values);
double median(std::vector<double> values);

struct MetricsReport {
  std::string scenario;
  std::string transport = "sim";
  std::uint64_t seed = 0;
  std::vector<TurnRecord> turns;
  std::vector<SyncSample> sync;
  std::vector<SyncTotal> sync_totals;

  // Modes in first-appearance order.
  std::vector<std::string> modes() const;
  std::size_t failed_turns() const;
  std::uint64_t total_sync_bytes(const std::string& mode, std::uint32_t repeat) const;
  std::vector<const TurnRecord*> turns_of(const std::string& mode,
                                          std::uint32_t repeat) const;

  // meta.csv, turns.csv, response_time.csv, tps.csv, request_bytes.csv,
  // sync_bytes.csv, sync_totals.csv and summary.md. No wall-clock data, so
  // equal reports produce byte-identical files.
  void write(const std::filesystem::path& dir) const;
  std::string summary_markdown() const;
  // Reads what write() produced (token ids are not restored).
  static MetricsReport load(const std::filesystem::path& dir);
};

struct ComparisonRow {
  std::string metric;
  std::string node;  // node id, or "from->to" for sync bytes
  std::string baseline;
  std::string mode;
  double baseline_median = 0;
  double mode_median = 0;
  // 100 * (mode - baseline) / baseline; nullopt when the baseline is 0 and
  // the mode is not.
  std::optional<double> delta_pct;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  std::string to_markdown() const;
  void write_csv(const std::filesystem::path& path) const;
  const ComparisonRow* find(const std::string& metric, const std::string& node,
                            const std::string& mode) const;
};

// Per-metric median deltas of every mode against `baseline` (default: the
// first mode), per node. Per-turn metrics take the median over repeats for
// each turn, then the median of the per-turn deltas. Throws ComparisonError
// when fewer than two modes are present or `baseline` is missing.
ComparisonTable compare_modes(const MetricsReport& report,
                              std::optional<std::string> baseline = std::nullopt);

}  // namespace discedge

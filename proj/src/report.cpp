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

#include "discedge/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "discedge/errors.hpp"

namespace discedge {
namespace {

std::string num(double v) { return fmt::format("{:.6f}", v); }

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string checked(const std::string& field) {
  if (field.find_first_of(",\n\r\"") != std::string::npos) {
    throw HarnessError("CSV field contains a delimiter: " + field);
  }
  return field;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw HarnessError("cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << checked(fields[i]);
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw HarnessError("CSV lacks column " + name);
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

Csv read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HarnessError("cannot read " + path.string());
  Csv csv;
  std::string line;
  if (!std::getline(in, line)) throw HarnessError(path.string() + " is empty");
  csv.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != csv.header.size()) {
      throw HarnessError(path.string() + ": ragged row");
    }
    csv.rows.push_back(std::move(fields));
  }
  return csv;
}

template <typename T>
T parse_num(const std::string& s) {
  std::istringstream in(s);
  T v{};
  in >> v;
  if (in.fail()) throw HarnessError("bad number in report: '" + s + "'");
  return v;
}

std::string describe(const Aggregate& a, int precision) {
  if (a.n == 0) return "-";
  if (a.has_ci) {
    return fmt::format("{:.{}f} [{:.{}f}, {:.{}f}]", a.median, precision, a.ci_low,
                       precision, a.ci_high, precision);
  }
  if (a.n == 1) return fmt::format("{:.{}f}", a.median, precision);
  return fmt::format("{:.{}f} / {:.{}f} / {:.{}f}", a.min, precision, a.median,
                     precision, a.max, precision);
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
}

Aggregate aggregate(std::vector<double> values) {
  Aggregate a;
  a.n = values.size();
  if (values.empty()) return a;
  std::sort(values.begin(), values.end());
  a.min = values.front();
  a.max = values.back();
  a.median = median(values);
  double sum = 0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(a.n);
  if (a.n > 3) {
    double ss = 0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    const double sd = std::sqrt(ss / static_cast<double>(a.n - 1));
    const double half = 1.96 * sd / std::sqrt(static_cast<double>(a.n));
    a.ci_low = a.mean - half;
    a.ci_high = a.mean + half;
    a.has_ci = true;
  }
  return a;
}

std::vector<std::string> MetricsReport::modes() const {
  std::vector<std::string> out;
  for (const auto& t : turns) {
    if (std::find(out.begin(), out.end(), t.mode) == out.end()) out.push_back(t.mode);
  }
  return out;
}

std::size_t MetricsReport::failed_turns() const {
  return static_cast<std::size_t>(
      std::count_if(turns.begin(), turns.end(), [](const TurnRecord& t) { return !t.ok; }));
}

std::uint64_t MetricsReport::total_sync_bytes(const std::string& mode,
                                              std::uint32_t repeat) const {
  std::uint64_t total = 0;
  for (const auto& s : sync_totals) {
    if (s.mode == mode && s.repeat == repeat) total += s.bytes;
  }
  return total;
}

std::vector<const TurnRecord*> MetricsReport::turns_of(const std::string& mode,
                                                       std::uint32_t repeat) const {
  std::vector<const TurnRecord*> out;
  for (const auto& t : turns) {
    if (t.mode == mode && t.repeat == repeat) out.push_back(&t);
  }
  return out;
}

void MetricsReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    CsvWriter w(dir / "meta.csv", {"key", "value"});
    w.row({"scenario", scenario});
    w.row({"transport", transport});
    w.row({"seed", std::to_string(seed)});
  }
  {
    CsvWriter w(dir / "turns.csv",
                {"mode", "repeat", "message", "turn", "node", "ok", "error",
                 "response_time_ms", "tokens_per_second", "request_bytes",
                 "tokens_generated", "consistency", "retries", "tokenize_ms",
                 "inference_ms", "input_tokens", "input_fingerprint", "output_hash"});
    for (const auto& t : turns) {
      w.row({t.mode, std::to_string(t.repeat), std::to_string(t.message),
             std::to_string(t.turn), t.node, t.ok ? "1" : "0", t.error,
             num(t.response_time_ms), num(t.tokens_per_second),
             std::to_string(t.request_bytes), std::to_string(t.tokens_generated),
             t.consistency, std::to_string(t.retries), num(t.tokenize_ms),
             num(t.inference_ms), std::to_string(t.input_tokens),
             hex64(t.input_fingerprint), hex64(t.output_hash)});
    }
  }
  const auto per_metric = [&](const char* file, const char* column, auto value) {
    CsvWriter w(dir / file, {"mode", "repeat", "message", "turn", "node", column});
    for (const auto& t : turns) {
      if (!t.ok) continue;
      w.row({t.mode, std::to_string(t.repeat), std::to_string(t.message),
             std::to_string(t.turn), t.node, value(t)});
    }
  };
  per_metric("response_time.csv", "response_time_ms",
             [](const TurnRecord& t) { return num(t.response_time_ms); });
  per_metric("tps.csv", "tokens_per_second",
             [](const TurnRecord& t) { return num(t.tokens_per_second); });
  per_metric("request_bytes.csv", "request_bytes",
             [](const TurnRecord& t) { return std::to_string(t.request_bytes); });
  {
    CsvWriter w(dir / "sync_bytes.csv", {"mode", "repeat", "message", "from", "to", "bytes"});
    for (const auto& s : sync) {
      w.row({s.mode, std::to_string(s.repeat), std::to_string(s.message), s.from, s.to,
             std::to_string(s.bytes)});
    }
  }
  {
    CsvWriter w(dir / "sync_totals.csv", {"mode", "repeat", "from", "to", "frames", "bytes"});
    for (const auto& s : sync_totals) {
      w.row({s.mode, std::to_string(s.repeat), s.from, s.to, std::to_string(s.frames),
             std::to_string(s.bytes)});
    }
  }
  std::ofstream md(dir / "summary.md", std::ios::binary | std::ios::trunc);
  if (!md) throw HarnessError("cannot write summary.md");
  md << summary_markdown();
}

std::string MetricsReport::summary_markdown() const {
  std::uint32_t repeats = 0;
  for (const auto& t : turns) repeats = std::max(repeats, t.repeat + 1);
  const std::string stat_label =
      repeats > 3 ? "median [95% CI, normal approx.] over repeats"
                  : (repeats > 1 ? "min / median / max over repeats" : "a single run");

  std::string out = fmt::format("# {}\n\ntransport: {}, seed: {}, repeats: {}\n\n",
                                scenario, transport, seed, repeats);
  out += fmt::format("Cells show {}.\n", stat_label);
  for (const auto& mode : modes()) {
    out += fmt::format("\n## {}\n\n", mode);
    out += "| message | node | response time (ms) | tokens/s | request bytes | consistency | failed |\n";
    out += "|---|---|---|---|---|---|---|\n";
    std::map<std::size_t, std::vector<const TurnRecord*>> by_message;
    for (const auto& t : turns) {
      if (t.mode == mode) by_message[t.message].push_back(&t);
    }
    for (const auto& [message, recs] : by_message) {
      std::vector<double> rt, tps, rb;
      std::set<std::string> cons;
      std::size_t failed = 0;
      for (const auto* t : recs) {
        if (!t->ok) {
          ++failed;
          cons.insert(t->error);
          continue;
        }
        rt.push_back(t->response_time_ms);
        tps.push_back(t->tokens_per_second);
        rb.push_back(static_cast<double>(t->request_bytes));
        cons.insert(t->consistency);
      }
      std::string cons_text;
      for (const auto& c : cons) cons_text += (cons_text.empty() ? "" : ", ") + c;
      out += fmt::format("| {} | {} | {} | {} | {} | {} | {} |\n", message, recs.front()->node,
                         describe(aggregate(rt), 3), describe(aggregate(tps), 2),
                         describe(aggregate(rb), 0), cons_text, failed);
    }
    std::map<std::pair<std::string, std::string>, std::vector<double>> pairs;
    for (const auto& s : sync_totals) {
      if (s.mode == mode) pairs[{s.from, s.to}].push_back(static_cast<double>(s.bytes));
    }
    if (!pairs.empty()) {
      out += "\n| sync link | bytes |\n|---|---|\n";
      for (const auto& [link, values] : pairs) {
        out += fmt::format("| {}->{} | {} |\n", link.first, link.second,
                           describe(aggregate(values), 0));
      }
    }
  }
  return out;
}

MetricsReport MetricsReport::load(const std::filesystem::path& dir) {
  MetricsReport r;
  const Csv meta = read_csv(dir / "meta.csv");
  for (const auto& row : meta.rows) {
    if (row[0] == "scenario") r.scenario = row[1];
    if (row[0] == "transport") r.transport = row[1];
    if (row[0] == "seed") r.seed = parse_num<std::uint64_t>(row[1]);
  }
  const Csv turns = read_csv(dir / "turns.csv");
  for (const auto& row : turns.rows) {
    const auto get = [&](const char* name) -> const std::string& { return row[turns.col(name)]; };
    TurnRecord t;
    t.mode = get("mode");
    t.repeat = parse_num<std::uint32_t>(get("repeat"));
    t.message = parse_num<std::size_t>(get("message"));
    t.turn = parse_num<std::uint64_t>(get("turn"));
    t.node = get("node");
    t.ok = get("ok") == "1";
    t.error = get("error");
    t.response_time_ms = parse_num<double>(get("response_time_ms"));
    t.tokens_per_second = parse_num<double>(get("tokens_per_second"));
    t.request_bytes = parse_num<std::size_t>(get("request_bytes"));
    t.tokens_generated = parse_num<std::uint32_t>(get("tokens_generated"));
    t.consistency = get("consistency");
    t.retries = parse_num<std::uint32_t>(get("retries"));
    t.tokenize_ms = parse_num<double>(get("tokenize_ms"));
    t.inference_ms = parse_num<double>(get("inference_ms"));
    t.input_tokens = parse_num<std::size_t>(get("input_tokens"));
    t.input_fingerprint = std::stoull(get("input_fingerprint"), nullptr, 16);
    t.output_hash = std::stoull(get("output_hash"), nullptr, 16);
    r.turns.push_back(std::move(t));
  }
  const Csv sync = read_csv(dir / "sync_bytes.csv");
  for (const auto& row : sync.rows) {
    r.sync.push_back({row[sync.col("mode")], parse_num<std::uint32_t>(row[sync.col("repeat")]),
                      parse_num<std::size_t>(row[sync.col("message")]), row[sync.col("from")],
                      row[sync.col("to")], parse_num<std::uint64_t>(row[sync.col("bytes")])});
  }
  const Csv totals = read_csv(dir / "sync_totals.csv");
  for (const auto& row : totals.rows) {
    r.sync_totals.push_back(
        {row[totals.col("mode")], parse_num<std::uint32_t>(row[totals.col("repeat")]),
         row[totals.col("from")], row[totals.col("to")],
         parse_num<std::uint64_t>(row[totals.col("frames")]),
         parse_num<std::uint64_t>(row[totals.col("bytes")])});
  }
  return r;
}

namespace {

std::optional<double> delta(double base, double value) {
  if (base == 0) return value == 0 ? std::optional<double>(0.0) : std::nullopt;
  return 100.0 * (value - base) / base;
}

// (node, message) -> median over repeats, successful turns only.
std::map<std::pair<std::string, std::size_t>, double> per_turn_medians(
    const MetricsReport& report, const std::string& mode, double (*value)(const TurnRecord&)) {
  std::map<std::pair<std::string, std::size_t>, std::vector<double>> samples;
  for (const auto& t : report.turns) {
    if (t.mode == mode && t.ok) samples[{t.node, t.message}].push_back(value(t));
  }
  std::map<std::pair<std::string, std::size_t>, double> out;
  for (auto& [k, v] : samples) out[k] = median(std::move(v));
  return out;
}

}  // namespace

ComparisonTable compare_modes(const MetricsReport& report, std::optional<std::string> baseline) {
  const auto modes = report.modes();
  if (modes.size() < 2) {
    throw ComparisonError("comparison needs at least two modes, report has " +
                          std::to_string(modes.size()));
  }
  const std::string base = baseline.value_or(modes.front());
  if (std::find(modes.begin(), modes.end(), base) == modes.end()) {
    throw ComparisonError("mode '" + base + "' is not in the report");
  }

  struct Metric {
    const char* name;
    double (*value)(const TurnRecord&);
  };
  const Metric metrics[] = {
      {"response_time_ms", [](const TurnRecord& t) { return t.response_time_ms; }},
      {"tokens_per_second", [](const TurnRecord& t) { return t.tokens_per_second; }},
      {"request_bytes",
       [](const TurnRecord& t) { return static_cast<double>(t.request_bytes); }},
  };

  ComparisonTable table;
  for (const auto& mode : modes) {
    if (mode == base) continue;
    for (const auto& metric : metrics) {
      const auto b = per_turn_medians(report, base, metric.value);
      const auto m = per_turn_medians(report, mode, metric.value);
      std::map<std::string, std::vector<std::pair<double, double>>> by_node;
      for (const auto& [key, bv] : b) {
        auto it = m.find(key);
        if (it == m.end()) continue;
        by_node[key.first].emplace_back(bv, it->second);
        by_node["*"].emplace_back(bv, it->second);
      }
      for (const auto& [node, pairs] : by_node) {
        std::vector<double> bs, ms, ds;
        bool undefined = false;
        for (const auto& [bv, mv] : pairs) {
          bs.push_back(bv);
          ms.push_back(mv);
          if (auto d = delta(bv, mv)) {
            ds.push_back(*d);
          } else {
            undefined = true;
          }
        }
        ComparisonRow row{metric.name, node, base, mode, median(bs), median(ms), std::nullopt};
        if (!undefined) row.delta_pct = median(ds);
        table.rows.push_back(std::move(row));
      }
    }
    // Sync bytes: totals per link, median over repeats.
    std::map<std::string, std::vector<double>> bsync, msync;
    std::map<std::uint32_t, double> btotal, mtotal;
    for (const auto& s : report.sync_totals) {
      const std::string link = s.from + "->" + s.to;
      if (s.mode == base) {
        bsync[link].push_back(static_cast<double>(s.bytes));
        btotal[s.repeat] += static_cast<double>(s.bytes);
      } else if (s.mode == mode) {
        msync[link].push_back(static_cast<double>(s.bytes));
        mtotal[s.repeat] += static_cast<double>(s.bytes);
      }
    }
    std::set<std::string> links;
    for (const auto& [l, _] : bsync) links.insert(l);
    for (const auto& [l, _] : msync) links.insert(l);
    for (const auto& link : links) {
      const double bv = median(bsync[link]);
      const double mv = median(msync[link]);
      table.rows.push_back({"sync_bytes", link, base, mode, bv, mv, delta(bv, mv)});
    }
    std::vector<double> bt, mt;
    for (const auto& [_, v] : btotal) bt.push_back(v);
    for (const auto& [_, v] : mtotal) mt.push_back(v);
    const double bv = median(bt);
    const double mv = median(mt);
    table.rows.push_back({"sync_bytes", "*", base, mode, bv, mv, delta(bv, mv)});
  }
  return table;
}

const ComparisonRow* ComparisonTable::find(const std::string& metric, const std::string& node,
                                           const std::string& mode) const {
  for (const auto& r : rows) {
    if (r.metric == metric && r.node == node && r.mode == mode) return &r;
  }
  return nullptr;
}

std::string ComparisonTable::to_markdown() const {
  std::string out =
      "| metric | node | baseline | mode | baseline median | mode median | delta |\n"
      "|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    const std::string d = r.delta_pct ? fmt::format("{:+.2f}%", *r.delta_pct) : "n/a";
    out += fmt::format("| {} | {} | {} | {} | {:.3f} | {:.3f} | {} |\n", r.metric, r.node,
                       r.baseline, r.mode, r.baseline_median, r.mode_median, d);
  }
  return out;
}

void ComparisonTable::write_csv(const std::filesystem::path& path) const {
  CsvWriter w(path, {"metric", "node", "baseline", "mode", "baseline_median", "mode_median",
                     "delta_pct"});
  for (const auto& r : rows) {
    w.row({r.metric, r.node, r.baseline, r.mode, num(r.baseline_median), num(r.mode_median),
           r.delta_pct ? num(*r.delta_pct) : ""});
  }
}

}  // namespace discedge

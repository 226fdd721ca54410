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

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "discedge/context.hpp"
#include "discedge/errors.hpp"
#include "discedge/harness.hpp"
#include "discedge/llm_stub.hpp"
#include "discedge/report.hpp"
#include "discedge/scenario.hpp"
#include "discedge/tokenizer.hpp"
#include "discedge/vocab_builder.hpp"

namespace py = pybind11;
using namespace discedge;

namespace {

py::bytes to_py(const Bytes& b) {
  return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

Bytes from_py(const py::bytes& b) {
  const std::string s = b;
  return Bytes(s.begin(), s.end());
}

py::dict turn_dict(const TurnRecord& t) {
  py::dict d;
  d["mode"] = t.mode;
  d["repeat"] = t.repeat;
  d["message"] = t.message;
  d["turn"] = t.turn;
  d["node"] = t.node;
  d["ok"] = t.ok;
  d["error"] = t.error;
  d["response_time_ms"] = t.response_time_ms;
  d["tokens_per_second"] = t.tokens_per_second;
  d["request_bytes"] = t.request_bytes;
  d["tokens_generated"] = t.tokens_generated;
  d["consistency"] = t.consistency;
  d["retries"] = t.retries;
  d["input_tokens"] = t.input_tokens;
  d["token_ids"] = t.token_ids;
  return d;
}

}  // namespace

PYBIND11_MODULE(_discedge, m) {
  m.doc() = "Edge context management: tokenizer, harness and reports";

  // Held for the interpreter's lifetime.
  static py::handle error_type = py::exception<Error>(m, "DisCEdgeError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = e.code();
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<Vocab>(m, "Vocab")
      .def_static("from_entries", &Vocab::from_entries, py::arg("model_id"), py::arg("entries"))
      .def_static("load", &Vocab::load, py::arg("path"), py::arg("model_id") = std::string{})
      .def_property_readonly("model_id", &Vocab::model_id)
      .def_property_readonly("entries", &Vocab::entries)
      .def("__len__", &Vocab::size)
      .def("tokenize", &Vocab::tokenize, py::arg("text"))
      .def("detokenize",
           [](const Vocab& v, const TokenSequence& ids) { return py::bytes(v.detokenize(ids)); },
           py::arg("tokens"))
      .def("detokenize_str",
           [](const Vocab& v, const TokenSequence& ids) { return v.detokenize(ids); },
           py::arg("tokens"));

  m.def("encode_tokens", [](const TokenSequence& ids) { return to_py(encode_tokens(ids)); });
  m.def("decode_tokens", [](const py::bytes& b) { return decode_tokens(from_py(b)); });
  m.def("hash64", [](std::int64_t seed, const std::string& model_id, const TokenSequence& ids) {
    return hash64(seed, model_id, ids);
  });
  m.def("model_id_from_name", &model_id_from_name);
  m.def("build_vocab_entries",
        [](const std::string& corpus, std::size_t max_words) {
          VocabBuildOptions o;
          o.max_words = max_words;
          return build_vocab_entries(corpus, o);
        },
        py::arg("corpus"), py::arg("max_words") = VocabBuildOptions{}.max_words);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readwrite("name", &ScenarioConfig::name)
      .def_readwrite("model_name", &ScenarioConfig::model_name)
      .def_readwrite("user_id", &ScenarioConfig::user_id)
      .def_readwrite("messages", &ScenarioConfig::messages)
      .def_property(
          "modes",
          [](const ScenarioConfig& c) {
            std::vector<std::string> out;
            for (auto mode : c.modes) out.emplace_back(request_mode_name(mode));
            return out;
          },
          [](ScenarioConfig& c, const std::vector<std::string>& names) {
            c.modes.clear();
            for (const auto& n : names) c.modes.push_back(parse_request_mode(n));
          })
      .def_readwrite("repeats", &ScenarioConfig::repeats)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("nodes", &ScenarioConfig::nodes)
      .def_readwrite("mobility", &ScenarioConfig::mobility)
      .def_readwrite("node_latency_ms", &ScenarioConfig::node_latency_ms)
      .def_readwrite("client_latency_ms", &ScenarioConfig::client_latency_ms)
      .def_readwrite("jitter_ms", &ScenarioConfig::jitter_ms)
      .def_readwrite("ttl_s", &ScenarioConfig::ttl_s)
      .def_readwrite("vocab", &ScenarioConfig::vocab)
      .def_property(
          "policy",
          [](const ScenarioConfig& c) { return std::string(policy_mode_name(c.policy.mode)); },
          [](ScenarioConfig& c, const std::string& s) { c.policy.mode = parse_policy_mode(s); })
      .def_property(
          "max_tokens", [](const ScenarioConfig& c) { return c.params.max_tokens; },
          [](ScenarioConfig& c, std::uint32_t n) { c.params.max_tokens = n; })
      .def("validate", &ScenarioConfig::validate);

  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("parse_scenario", &parse_scenario, py::arg("yaml_text"),
        py::arg("base_dir") = std::filesystem::path{});
  m.def("default_scenario", &default_scenario);

  py::class_<MetricsReport>(m, "MetricsReport")
      .def_readonly("scenario", &MetricsReport::scenario)
      .def_readonly("transport", &MetricsReport::transport)
      .def_readonly("seed", &MetricsReport::seed)
      .def_property_readonly("turns",
                             [](const MetricsReport& r) {
                               py::list out;
                               for (const auto& t : r.turns) out.append(turn_dict(t));
                               return out;
                             })
      .def("modes", &MetricsReport::modes)
      .def("failed_turns", &MetricsReport::failed_turns)
      .def("total_sync_bytes", &MetricsReport::total_sync_bytes, py::arg("mode"),
           py::arg("repeat") = 0)
      .def("write", &MetricsReport::write, py::arg("dir"))
      .def("summary_markdown", &MetricsReport::summary_markdown)
      .def_static("load", &MetricsReport::load, py::arg("dir"));

  m.def(
      "run_scenario",
      [](const ScenarioConfig& config, bool live) {
        HarnessOptions o;
        o.transport = live ? TransportKind::kLive : TransportKind::kSim;
        py::gil_scoped_release release;
        return run_scenario(config, o);
      },
      py::arg("config"), py::arg("live") = false);

  m.def(
      "compare_modes",
      [](const MetricsReport& report, std::optional<std::string> baseline) {
        py::list rows;
        for (const auto& r : compare_modes(report, baseline).rows) {
          py::dict d;
          d["metric"] = r.metric;
          d["node"] = r.node;
          d["baseline"] = r.baseline;
          d["mode"] = r.mode;
          d["baseline_median"] = r.baseline_median;
          d["mode_median"] = r.mode_median;
          d["delta_pct"] = r.delta_pct ? py::object(py::float_(*r.delta_pct)) : py::none();
          rows.append(d);
        }
        return rows;
      },
      py::arg("report"), py::arg("baseline") = std::nullopt);
}

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
#include <stdexcept>
#include <string>

namespace discedge {

// Base of every error raised by this library. `code()` is the stable
// identifier used on the node wire protocol.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define DISCEDGE_DEFINE_ERROR(Name, wire_code)                 \
  class Name : public Error {                                  \
   public:                                                     \
    explicit Name(const std::string& what) : Error(wire_code, what) {} \
  }

DISCEDGE_DEFINE_ERROR(VocabError, "vocab_error");
DISCEDGE_DEFINE_ERROR(UnknownTokenError, "unknown_token");
DISCEDGE_DEFINE_ERROR(EncodingError, "encoding_error");
DISCEDGE_DEFINE_ERROR(SerializationError, "serialization_error");
DISCEDGE_DEFINE_ERROR(DecodeError, "decode_error");
DISCEDGE_DEFINE_ERROR(VersionError, "unsupported_version");
DISCEDGE_DEFINE_ERROR(ModeError, "mode_error");
DISCEDGE_DEFINE_ERROR(ConfigError, "config_error");
DISCEDGE_DEFINE_ERROR(NoKeygroupError, "no_keygroup");
DISCEDGE_DEFINE_ERROR(RoutingError, "routing_error");
DISCEDGE_DEFINE_ERROR(TransportError, "transport_error");
DISCEDGE_DEFINE_ERROR(ModelNotLoadedError, "model_not_loaded");
DISCEDGE_DEFINE_ERROR(ModelNotServedError, "model_not_served");
DISCEDGE_DEFINE_ERROR(TurnConflictError, "turn_conflict");
DISCEDGE_DEFINE_ERROR(BadRequestError, "bad_request");
DISCEDGE_DEFINE_ERROR(HarnessError, "harness_error");
DISCEDGE_DEFINE_ERROR(ComparisonError, "comparison_error");

#undef DISCEDGE_DEFINE_ERROR

// The local replica never caught up with the version the client expects.
class StaleContextError : public Error {
 public:
  StaleContextError(std::uint64_t local_version, std::uint64_t expected_version)
      : Error("stale_context",
              "stale context: local version " + std::to_string(local_version) +
                  ", expected " + std::to_string(expected_version)),
        local_version_(local_version),
        expected_version_(expected_version) {}

  std::uint64_t local_version() const noexcept { return local_version_; }
  std::uint64_t expected_version() const noexcept { return expected_version_; }

 private:
  std::uint64_t local_version_;
  std::uint64_t expected_version_;
};

}  // namespace discedge

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
#include <functional>
#include <optional>
#include <string>

#include "discedge/bytes.hpp"
#include "discedge/runtime.hpp"

namespace discedge {

// Every frame on the wire is preceded by a u32 big-endian length.
inline constexpr std::size_t kLengthPrefixSize = 4;

// Invoked for each frame delivered to a bound endpoint. A returned value is
// sent back to the sender as the reply to a request().
using FrameHandler =
    std::function<std::optional<Bytes>(const std::string& from, ByteView frame)>;

struct LinkSpec {
  std::string from;
  std::string to;
  double latency_ms = 5.0;
  double jitter_ms = 0.0;  // uniform in [-jitter, +jitter]
  bool partitioned = false;
};

// Byte counts include the length prefix.
struct LinkStats {
  std::uint64_t frames_sent = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t frames_delivered = 0;
  std::uint64_t bytes_delivered = 0;
  std::uint64_t frames_dropped = 0;
};

class Transport {
 public:
  virtual ~Transport() = default;

  virtual void bind(const std::string& endpoint, FrameHandler handler) = 0;
  // Fire-and-forget, FIFO per (from, to). Throws RoutingError for an
  // unknown link.
  virtual void send(const std::string& from, const std::string& to,
                    Bytes frame) = 0;
  // Sends `frame` and blocks until the peer's reply arrives. Throws
  // TransportError when no reply can arrive.
  virtual Bytes request(const std::string& from, const std::string& to,
                        Bytes frame) = 0;
  // Simulation only; socket transports throw ModeError.
  virtual std::size_t advance_clock(Nanos d) = 0;
  virtual LinkStats link_stats(const std::string& from,
                               const std::string& to) const = 0;
  virtual void reset_stats() = 0;
};

}  // namespace discedge

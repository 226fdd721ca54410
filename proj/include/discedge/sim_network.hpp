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
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "discedge/simulator.hpp"
#include "discedge/transport.hpp"

namespace discedge {

// In-process network on the simulator's virtual clock. A frame sent at t
// arrives at t + latency + jitter, but never before the previous frame on
// the same link (FIFO). Partitioned links drop frames and count the drop,
// including frames already in flight when the partition starts.
// The delivery timeline is a pure function of (seed, link specs, sends).
class SimNetwork final : public Transport {
 public:
  SimNetwork(Simulator& sim, std::uint64_t seed);

  // Adds or replaces the link; its id (used to order simultaneous
  // deliveries) is its creation index.
  void add_link(const LinkSpec& spec);
  void set_partitioned(const std::string& from, const std::string& to,
                       bool partitioned);
  void set_latency(const std::string& from, const std::string& to,
                   double latency_ms, double jitter_ms = 0.0);
  bool has_link(const std::string& from, const std::string& to) const;

  void bind(const std::string& endpoint, FrameHandler handler) override;
  // Frames for an unbound endpoint are lost; requests to it fail.
  void unbind(const std::string& endpoint);
  void send(const std::string& from, const std::string& to,
            Bytes frame) override;
  Bytes request(const std::string& from, const std::string& to,
                Bytes frame) override;
  std::size_t advance_clock(Nanos d) override;
  LinkStats link_stats(const std::string& from,
                       const std::string& to) const override;
  void reset_stats() override;

  // Sum over every link.
  std::uint64_t frames_delivered() const { return delivered_; }

 private:
  struct Link {
    LinkSpec spec;
    std::uint32_t id = 0;
    Nanos last_delivery{0};
    LinkStats stats;
  };

  Link& link(const std::string& from, const std::string& to);
  // Schedules delivery; `on_arrival` overrides the endpoint handler (used
  // for replies).
  void transmit(Link& l, Bytes frame, std::function<void(Bytes)> on_arrival);
  void deliver(const std::string& from, const std::string& to, Bytes frame,
               std::uint64_t reply_to);

  Simulator& sim_;
  std::mt19937_64 rng_;
  std::map<std::pair<std::string, std::string>, Link> links_;
  std::map<std::string, FrameHandler> handlers_;
  std::uint64_t delivered_ = 0;
  std::uint64_t next_request_ = 1;
  std::map<std::uint64_t, std::optional<Bytes>> replies_;
};

}  // namespace discedge

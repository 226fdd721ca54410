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
#include <queue>
#include <vector>

#include "discedge/runtime.hpp"

namespace discedge {

// Single-threaded discrete-event scheduler. Events run in (time, lane, seq)
// order; `lane` is the link id for frame deliveries and kTimerLane for
// timers, so simultaneous deliveries resolve by link id.
//
// Event handlers may call sleep_for(), which runs nested events up to the
// wake-up time. Only one such blocking handler is expected at a time (one
// in-flight request per simulated client).
class Simulator final : public Runtime {
 public:
  static constexpr std::uint32_t kTimerLane = UINT32_MAX;

  Nanos now() const override { return now_; }
  void sleep_for(Nanos d) override;
  void schedule(Nanos delay, std::function<void()> task) override;

  void schedule_at(Nanos at, std::uint32_t lane, std::function<void()> task);

  // Runs every event due within `d`, then sets the clock to now + d.
  // Returns the number of events run.
  std::size_t advance(Nanos d);
  // Runs events until `done()` holds or the queue drains. Returns done().
  bool run_until(const std::function<bool()>& done);
  // Runs until no events remain.
  std::size_t run_all();

  bool idle() const { return queue_.empty(); }
  std::size_t pending() const { return queue_.size(); }
  // Time of the next pending event; only valid when !idle().
  Nanos next_event_time() const { return queue_.top().at; }

 private:
  struct Event {
    Nanos at;
    std::uint32_t lane;
    std::uint64_t seq;
    std::function<void()> task;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      if (a.lane != b.lane) return a.lane > b.lane;
      return a.seq > b.seq;
    }
  };

  void run_next();

  Nanos now_{0};
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

}  // namespace discedge

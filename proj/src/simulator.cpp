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

#include "discedge/simulator.hpp"

#include <algorithm>

namespace discedge {

void Simulator::schedule(Nanos delay, std::function<void()> task) {
  schedule_at(now_ + std::max(delay, Nanos{0}), kTimerLane, std::move(task));
}

void Simulator::schedule_at(Nanos at, std::uint32_t lane,
                            std::function<void()> task) {
  queue_.push(Event{std::max(at, now_), lane, seq_++, std::move(task)});
}

void Simulator::run_next() {
  Event ev = queue_.top();
  queue_.pop();
  now_ = std::max(now_, ev.at);
  ev.task();
}

void Simulator::sleep_for(Nanos d) {
  const Nanos wake = now_ + std::max(d, Nanos{0});
  while (!queue_.empty() && queue_.top().at <= wake) run_next();
  now_ = std::max(now_, wake);
}

std::size_t Simulator::advance(Nanos d) {
  const Nanos until = now_ + std::max(d, Nanos{0});
  std::size_t ran = 0;
  while (!queue_.empty() && queue_.top().at <= until) {
    run_next();
    ++ran;
  }
  now_ = std::max(now_, until);
  return ran;
}

bool Simulator::run_until(const std::function<bool()>& done) {
  while (!done() && !queue_.empty()) run_next();
  return done();
}

std::size_t Simulator::run_all() {
  std::size_t ran = 0;
  while (!queue_.empty()) {
    run_next();
    ++ran;
  }
  return ran;
}

}  // namespace discedge

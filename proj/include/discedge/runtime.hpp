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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>

namespace discedge {

using Nanos = std::chrono::nanoseconds;

inline double to_ms(Nanos d) { return static_cast<double>(d.count()) / 1e6; }
inline Nanos from_ms(double ms) {
  return Nanos{static_cast<std::int64_t>(std::llround(ms * 1e6))};
}

// Time source and scheduler shared by node code. The simulator implements
// it on a virtual clock; SystemRuntime on the wall clock. Node code never
// touches std::chrono clocks or threads directly, which is what lets the
// same code run in both.
class Runtime {
 public:
  virtual ~Runtime() = default;

  // Time since the runtime's epoch (0 for the simulator, Unix epoch live).
  virtual Nanos now() const = 0;
  // Blocks the caller for `d`. On the virtual clock, events due in the
  // meantime are processed before returning.
  virtual void sleep_for(Nanos d) = 0;
  // Runs `task` once `delay` has elapsed, without blocking the caller.
  virtual void schedule(Nanos delay, std::function<void()> task) = 0;

  std::uint64_t now_ms() const {
    return static_cast<std::uint64_t>(now().count() / 1'000'000);
  }
};

}  // namespace discedge

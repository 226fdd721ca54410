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

#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include "discedge/runtime.hpp"

namespace discedge {

// Wall-clock runtime for live nodes. Scheduled tasks run on one background
// thread in due-time order; a task that throws is logged and dropped.
class SystemRuntime final : public Runtime {
 public:
  SystemRuntime();
  ~SystemRuntime() override;

  Nanos now() const override;
  void sleep_for(Nanos d) override;
  void schedule(Nanos delay, std::function<void()> task) override;

  // Waits until every task due so far has run.
  void drain();

 private:
  void run();

  std::mutex mu_;
  std::condition_variable cv_;
  std::multimap<std::chrono::steady_clock::time_point, std::function<void()>> tasks_;
  bool running_task_ = false;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace discedge

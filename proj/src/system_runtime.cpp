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

#include "discedge/system_runtime.hpp"

#include <spdlog/spdlog.h>

namespace discedge {

SystemRuntime::SystemRuntime() : worker_([this] { run(); }) {}

SystemRuntime::~SystemRuntime() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

Nanos SystemRuntime::now() const {
  return std::chrono::duration_cast<Nanos>(
      std::chrono::system_clock::now().time_since_epoch());
}

void SystemRuntime::sleep_for(Nanos d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

void SystemRuntime::schedule(Nanos delay, std::function<void()> task) {
  {
    std::lock_guard lock(mu_);
    tasks_.emplace(std::chrono::steady_clock::now() + delay, std::move(task));
  }
  cv_.notify_all();
}

void SystemRuntime::drain() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] {
    return stopping_ || (!running_task_ &&
                         (tasks_.empty() ||
                          tasks_.begin()->first > std::chrono::steady_clock::now()));
  });
}

void SystemRuntime::run() {
  std::unique_lock lock(mu_);
  while (!stopping_) {
    if (tasks_.empty()) {
      cv_.wait(lock);
      continue;
    }
    const auto due = tasks_.begin()->first;
    if (due > std::chrono::steady_clock::now()) {
      cv_.wait_until(lock, due);
      continue;
    }
    auto task = std::move(tasks_.begin()->second);
    tasks_.erase(tasks_.begin());
    running_task_ = true;
    lock.unlock();
    try {
      task();
    } catch (const std::exception& e) {
      spdlog::error("scheduled task failed: {}", e.what());
    }
    lock.lock();
    running_task_ = false;
    cv_.notify_all();
  }
}

}  // namespace discedge

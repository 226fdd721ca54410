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

#include <sys/types.h>

#include <chrono>
#include <filesystem>
#include <map>
#include <string>

#include "discedge/scenario.hpp"

namespace discedge {

// Node processes on localhost, one `discedge node --config` per scenario
// node. Stopped (SIGKILL) on destruction.
class LiveCluster {
 public:
  LiveCluster(const ScenarioConfig& config, std::filesystem::path node_binary,
              std::filesystem::path work_dir);
  ~LiveCluster();
  LiveCluster(const LiveCluster&) = delete;
  LiveCluster& operator=(const LiveCluster&) = delete;

  // Spawns every node and waits until each answers `health`. Throws
  // HarnessError on spawn failure, early exit or timeout.
  void start(std::chrono::milliseconds health_timeout = std::chrono::seconds(10));
  const std::map<std::string, std::string>& addresses() const { return addresses_; }
  bool running(const std::string& id) const;
  void kill(const std::string& id);
  void stop();

 private:
  ScenarioConfig config_;
  std::filesystem::path binary_;
  std::filesystem::path work_dir_;
  std::map<std::string, std::string> addresses_;
  std::map<std::string, pid_t> pids_;
};

// Finds the discedge executable: $DISCEDGE_BIN, next to the current
// executable, then the build tree. Empty when none exists.
std::filesystem::path locate_node_binary();

}  // namespace discedge

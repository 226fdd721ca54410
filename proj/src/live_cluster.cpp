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

#include "discedge/live_cluster.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <thread>

#include <fmt/format.h>

#include "discedge/errors.hpp"
#include "discedge/node.hpp"
#include "discedge/system_runtime.hpp"
#include "discedge/tcp_transport.hpp"

namespace discedge {
namespace {

std::uint16_t free_port(const std::string& host) {
  Socket s = listen_on({host, 0});
  return local_port(s);
}

bool exited(pid_t pid) {
  int status = 0;
  return ::waitpid(pid, &status, WNOHANG) == pid;
}

}  // namespace

std::filesystem::path locate_node_binary() {
  if (const char* env = std::getenv("DISCEDGE_BIN"); env && *env) return env;
  std::error_code ec;
  const auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    for (const auto& candidate :
         {self.parent_path() / "discedge", self.parent_path().parent_path() / "tools" / "discedge"}) {
      if (std::filesystem::is_regular_file(candidate)) return candidate;
    }
  }
  return {};
}

LiveCluster::LiveCluster(const ScenarioConfig& config, std::filesystem::path node_binary,
                         std::filesystem::path work_dir)
    : config_(config), binary_(std::move(node_binary)), work_dir_(std::move(work_dir)) {}

LiveCluster::~LiveCluster() { stop(); }

void LiveCluster::start(std::chrono::milliseconds health_timeout) {
  std::filesystem::create_directories(work_dir_);
  std::uint16_t port = config_.base_port;
  for (const auto& id : config_.nodes) {
    const std::uint16_t p = config_.base_port ? port++ : free_port(config_.live_host);
    addresses_[id] = fmt::format("{}:{}", config_.live_host, p);
  }

  const std::set<std::string> members(config_.nodes.begin(), config_.nodes.end());
  for (const auto& id : config_.nodes) {
    NodeConfig nc;
    nc.node_id = id;
    nc.listen = addresses_[id];
    for (const auto& [peer, addr] : addresses_) {
      if (peer != id) nc.peers[peer] = addr;
    }
    nc.models = {{config_.model_name, std::filesystem::absolute(config_.vocab)}};
    nc.keygroups = {{config_.model_name, members}};
    nc.policy = config_.policy;
    nc.profile = config_.profile_of(id);
    nc.ttl_s = config_.ttl_s;
    nc.sync_delay_ms = config_.node_latency_ms;
    nc.seed = config_.seed;
    const auto config_path = work_dir_ / (id + ".yaml");
    write_node_config(config_path, nc);

    const auto log_path = work_dir_ / (id + ".log");
    const pid_t pid = ::fork();
    if (pid < 0) throw HarnessError("fork failed");
    if (pid == 0) {
      const int fd = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      if (fd >= 0) {
        ::dup2(fd, STDOUT_FILENO);
        ::dup2(fd, STDERR_FILENO);
        ::close(fd);
      }
      ::execl(binary_.c_str(), binary_.c_str(), "node", "--config", config_path.c_str(),
              static_cast<char*>(nullptr));
      ::_exit(127);
    }
    pids_[id] = pid;
  }

  SystemRuntime runtime;
  TcpTransport::Options options;
  options.connect_timeout = std::chrono::milliseconds(200);
  options.request_timeout = std::chrono::milliseconds(2000);
  TcpTransport probe(addresses_, options);
  const auto deadline = std::chrono::steady_clock::now() + health_timeout;
  for (const auto& id : config_.nodes) {
    while (true) {
      if (exited(pids_[id])) {
        pids_.erase(id);
        throw HarnessError(fmt::format("node {} exited during startup, see {}", id,
                                       (work_dir_ / (id + ".log")).string()));
      }
      try {
        const Json reply = decode_json(probe.request(
            "harness", id, encode_json(Json{{"type", "health"}})));
        if (reply.value("type", std::string{}) == "health_ok") break;
      } catch (const Error&) {
      }
      if (std::chrono::steady_clock::now() > deadline) {
        throw HarnessError("node " + id + " failed its health check");
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  probe.stop();
}

bool LiveCluster::running(const std::string& id) const { return pids_.contains(id); }

void LiveCluster::kill(const std::string& id) {
  auto it = pids_.find(id);
  if (it == pids_.end()) return;
  ::kill(it->second, SIGKILL);
  ::waitpid(it->second, nullptr, 0);
  pids_.erase(it);
}

void LiveCluster::stop() {
  while (!pids_.empty()) kill(pids_.begin()->first);
}

}  // namespace discedge

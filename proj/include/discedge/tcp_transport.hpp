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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "discedge/transport.hpp"

namespace discedge {

// Owning file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { reset(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void reset();
  void shutdown();

 private:
  int fd_ = -1;
};

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
  static HostPort parse(const std::string& address);  // "host:port"
};

Socket connect_to(const HostPort& address, std::chrono::milliseconds timeout);
// Binds with SO_REUSEADDR; port 0 picks a free port.
Socket listen_on(const HostPort& address);
std::uint16_t local_port(const Socket& socket);

// Length-prefixed frames. read_frame returns nullopt on orderly EOF and
// throws TransportError on errors or when `timeout` expires.
void write_frame(const Socket& socket, ByteView frame);
std::optional<Bytes> read_frame(const Socket& socket,
                                std::optional<std::chrono::milliseconds> timeout =
                                    std::nullopt);

// TCP transport: one listening socket per bound endpoint, one persistent
// outbound connection per peer for send(), a fresh connection per
// request(). Endpoint names resolve through the address book.
class TcpTransport final : public Transport {
 public:
  struct Options {
    // Emulated one-way delay for send() frames (inter-node links).
    std::chrono::milliseconds send_delay{0};
    std::chrono::milliseconds connect_timeout{2000};
    std::chrono::milliseconds request_timeout{60000};
  };

  explicit TcpTransport(std::map<std::string, std::string> addresses);
  TcpTransport(std::map<std::string, std::string> addresses, Options options);
  ~TcpTransport() override;

  void bind(const std::string& endpoint, FrameHandler handler) override;
  void send(const std::string& from, const std::string& to,
            Bytes frame) override;
  Bytes request(const std::string& from, const std::string& to,
                Bytes frame) override;
  std::size_t advance_clock(Nanos d) override;
  LinkStats link_stats(const std::string& from,
                       const std::string& to) const override;
  void reset_stats() override;

  // Actual port of a bound endpoint (useful after binding port 0).
  std::uint16_t bound_port(const std::string& endpoint) const;
  void stop();

 private:
  struct Outbound {
    std::string from;
    std::string to;
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::pair<std::chrono::steady_clock::time_point, Bytes>> queue;
    std::thread worker;
  };
  struct Listener {
    std::string endpoint;
    Socket socket;
    std::uint16_t port = 0;
    FrameHandler handler;
    std::thread acceptor;
  };

  HostPort resolve(const std::string& endpoint) const;
  void count_sent(const std::string& from, const std::string& to,
                  std::size_t frame_size, bool delivered);
  void run_outbound(Outbound& out);
  void accept_loop(Listener& listener);
  void serve_connection(Listener& listener, Socket conn);

  std::map<std::string, std::string> addresses_;
  Options options_;
  std::atomic<bool> stopping_{false};

  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, LinkStats> stats_;
  std::map<std::pair<std::string, std::string>, std::unique_ptr<Outbound>> outbound_;
  std::vector<std::unique_ptr<Listener>> listeners_;
  std::vector<std::thread> connections_;
  std::set<int> open_fds_;
};

}  // namespace discedge

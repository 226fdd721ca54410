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

#include "discedge/tcp_transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "discedge/errors.hpp"

namespace discedge {
namespace {

constexpr std::uint32_t kMaxFrameSize = 64u << 20;

std::string errno_text() { return std::strerror(errno); }

void write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw TransportError("send failed: " + errno_text());
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

// Returns false on EOF before the first byte.
bool read_all(int fd, std::uint8_t* data, std::size_t n,
              std::optional<std::chrono::milliseconds> timeout) {
  std::size_t got = 0;
  while (got < n) {
    if (timeout) {
      pollfd p{fd, POLLIN, 0};
      const int r = ::poll(&p, 1, static_cast<int>(timeout->count()));
      if (r == 0) throw TransportError("read timed out");
      if (r < 0) {
        if (errno == EINTR) continue;
        throw TransportError("poll failed: " + errno_text());
      }
    }
    const ssize_t r = ::recv(fd, data + got, n - got, 0);
    if (r == 0) {
      if (got == 0) return false;
      throw TransportError("connection closed mid-frame");
    }
    if (r < 0) {
      if (errno == EINTR) continue;
      throw TransportError("recv failed: " + errno_text());
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

}  // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    reset();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

void Socket::reset() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Socket::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

HostPort HostPort::parse(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon + 1 == address.size()) {
    throw ConfigError("address '" + address + "' is not host:port");
  }
  HostPort hp;
  hp.host = address.substr(0, colon);
  try {
    const int port = std::stoi(address.substr(colon + 1));
    if (port < 0 || port > 65535) throw std::out_of_range("port");
    hp.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    throw ConfigError("address '" + address + "' has an invalid port");
  }
  if (hp.host.empty()) hp.host = "127.0.0.1";
  return hp;
}

static addrinfo* resolve_addr(const HostPort& address, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(address.port);
  if (::getaddrinfo(address.host.c_str(), port.c_str(), &hints, &res) != 0 ||
      res == nullptr) {
    throw TransportError("cannot resolve " + address.host);
  }
  return res;
}

Socket connect_to(const HostPort& address, std::chrono::milliseconds timeout) {
  addrinfo* res = resolve_addr(address, false);
  Socket sock(::socket(res->ai_family, res->ai_socktype, 0));
  if (!sock.valid()) {
    ::freeaddrinfo(res);
    throw TransportError("socket failed: " + errno_text());
  }
  const int flags = ::fcntl(sock.fd(), F_GETFL, 0);
  ::fcntl(sock.fd(), F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(sock.fd(), res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc < 0 && errno != EINPROGRESS) {
    throw TransportError("connect to " + address.host + ":" +
                         std::to_string(address.port) + " failed: " + errno_text());
  }
  if (rc < 0) {
    pollfd p{sock.fd(), POLLOUT, 0};
    rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(sock.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (rc <= 0 || err != 0) {
      throw TransportError("connect to " + address.host + ":" +
                           std::to_string(address.port) + " failed: " +
                           (rc == 0 ? std::string("timeout") : std::strerror(err)));
    }
  }
  ::fcntl(sock.fd(), F_SETFL, flags);
  const int one = 1;
  ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return sock;
}

Socket listen_on(const HostPort& address) {
  addrinfo* res = resolve_addr(address, true);
  Socket sock(::socket(res->ai_family, res->ai_socktype, 0));
  const int one = 1;
  ::setsockopt(sock.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  const int rc = ::bind(sock.fd(), res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc < 0) {
    throw TransportError("bind " + address.host + ":" +
                         std::to_string(address.port) + " failed: " + errno_text());
  }
  if (::listen(sock.fd(), 64) < 0) {
    throw TransportError("listen failed: " + errno_text());
  }
  return sock;
}

std::uint16_t local_port(const Socket& socket) {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  ::getsockname(socket.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  return ntohs(addr.sin_port);
}

void write_frame(const Socket& socket, ByteView frame) {
  if (frame.size() > kMaxFrameSize) throw TransportError("frame too large");
  Bytes buf;
  buf.reserve(frame.size() + kLengthPrefixSize);
  put_u32_be(buf, static_cast<std::uint32_t>(frame.size()));
  buf.insert(buf.end(), frame.begin(), frame.end());
  write_all(socket.fd(), buf.data(), buf.size());
}

std::optional<Bytes> read_frame(const Socket& socket,
                                std::optional<std::chrono::milliseconds> timeout) {
  std::uint8_t prefix[kLengthPrefixSize];
  if (!read_all(socket.fd(), prefix, sizeof(prefix), timeout)) return std::nullopt;
  const std::uint32_t size = read_u32_be(prefix);
  if (size > kMaxFrameSize) throw TransportError("frame too large");
  Bytes frame(size);
  if (size > 0 && !read_all(socket.fd(), frame.data(), size, timeout)) {
    throw TransportError("connection closed mid-frame");
  }
  return frame;
}

TcpTransport::TcpTransport(std::map<std::string, std::string> addresses)
    : TcpTransport(std::move(addresses), Options{}) {}

TcpTransport::TcpTransport(std::map<std::string, std::string> addresses,
                           Options options)
    : addresses_(std::move(addresses)), options_(options) {}

TcpTransport::~TcpTransport() { stop(); }

HostPort TcpTransport::resolve(const std::string& endpoint) const {
  auto it = addresses_.find(endpoint);
  if (it == addresses_.end()) throw RoutingError("no address for " + endpoint);
  return HostPort::parse(it->second);
}

void TcpTransport::bind(const std::string& endpoint, FrameHandler handler) {
  auto listener = std::make_unique<Listener>();
  listener->endpoint = endpoint;
  listener->socket = listen_on(resolve(endpoint));
  listener->port = local_port(listener->socket);
  listener->handler = std::move(handler);
  Listener* raw = listener.get();
  {
    std::lock_guard lock(mu_);
    listeners_.push_back(std::move(listener));
  }
  raw->acceptor = std::thread([this, raw] { accept_loop(*raw); });
}

std::uint16_t TcpTransport::bound_port(const std::string& endpoint) const {
  std::lock_guard lock(mu_);
  for (const auto& l : listeners_) {
    if (l->endpoint == endpoint) return l->port;
  }
  throw RoutingError(endpoint + " is not bound");
}

void TcpTransport::accept_loop(Listener& listener) {
  while (!stopping_) {
    pollfd p{listener.socket.fd(), POLLIN, 0};
    const int r = ::poll(&p, 1, 100);
    if (r <= 0) continue;
    const int fd = ::accept(listener.socket.fd(), nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    open_fds_.insert(fd);
    connections_.emplace_back(
        [this, &listener, fd] { serve_connection(listener, Socket(fd)); });
  }
}

void TcpTransport::serve_connection(Listener& listener, Socket conn) {
  try {
    while (!stopping_) {
      auto frame = read_frame(conn);
      if (!frame) break;
      // The sender's identity is not on the wire; handlers that need it
      // carry it inside the frame.
      if (auto reply = listener.handler("", *frame)) write_frame(conn, *reply);
    }
  } catch (const TransportError&) {
    // peer went away
  }
  std::lock_guard lock(mu_);
  open_fds_.erase(conn.fd());
}

void TcpTransport::count_sent(const std::string& from, const std::string& to,
                              std::size_t frame_size, bool delivered) {
  std::lock_guard lock(mu_);
  auto& s = stats_[{from, to}];
  const std::uint64_t size = frame_size + kLengthPrefixSize;
  s.frames_sent += 1;
  s.bytes_sent += size;
  if (delivered) {
    s.frames_delivered += 1;
    s.bytes_delivered += size;
  } else {
    s.frames_dropped += 1;
  }
}

void TcpTransport::send(const std::string& from, const std::string& to,
                        Bytes frame) {
  resolve(to);
  Outbound* out;
  {
    std::lock_guard lock(mu_);
    auto& slot = outbound_[{from, to}];
    if (!slot) {
      slot = std::make_unique<Outbound>();
      slot->from = from;
      slot->to = to;
      Outbound* raw = slot.get();
      slot->worker = std::thread([this, raw] { run_outbound(*raw); });
    }
    out = slot.get();
  }
  {
    std::lock_guard lock(out->mu);
    out->queue.emplace_back(
        std::chrono::steady_clock::now() + options_.send_delay, std::move(frame));
  }
  out->cv.notify_one();
}

void TcpTransport::run_outbound(Outbound& out) {
  Socket conn;
  std::unique_lock lock(out.mu);
  while (true) {
    out.cv.wait(lock, [&] { return stopping_ || !out.queue.empty(); });
    if (stopping_) return;
    const auto due = out.queue.front().first;
    if (out.cv.wait_until(lock, due, [&] { return stopping_.load(); })) return;
    Bytes frame = out.queue.front().second;
    lock.unlock();
    bool sent = false;
    try {
      if (!conn.valid()) conn = connect_to(resolve(out.to), options_.connect_timeout);
      write_frame(conn, frame);
      sent = true;
    } catch (const TransportError&) {
      conn.reset();
    }
    lock.lock();
    if (sent) {
      out.queue.pop_front();
      lock.unlock();
      count_sent(out.from, out.to, frame.size(), true);
      lock.lock();
    } else {
      // Peer unreachable: keep the frame and retry shortly.
      if (out.cv.wait_for(lock, std::chrono::milliseconds(50),
                          [&] { return stopping_.load(); })) {
        return;
      }
    }
  }
}

Bytes TcpTransport::request(const std::string& from, const std::string& to,
                            Bytes frame) {
  const HostPort address = resolve(to);
  Socket conn;
  try {
    conn = connect_to(address, options_.connect_timeout);
  } catch (const TransportError&) {
    count_sent(from, to, frame.size(), false);
    throw;
  }
  write_frame(conn, frame);
  count_sent(from, to, frame.size(), true);
  auto reply = read_frame(conn, options_.request_timeout);
  if (!reply) throw TransportError(to + " closed the connection without reply");
  std::lock_guard lock(mu_);
  auto& s = stats_[{to, from}];
  s.frames_sent += 1;
  s.bytes_sent += reply->size() + kLengthPrefixSize;
  s.frames_delivered += 1;
  s.bytes_delivered += reply->size() + kLengthPrefixSize;
  return std::move(*reply);
}

std::size_t TcpTransport::advance_clock(Nanos) {
  throw ModeError("advance_clock is only available on the simulated network");
}

LinkStats TcpTransport::link_stats(const std::string& from,
                                   const std::string& to) const {
  std::lock_guard lock(mu_);
  auto it = stats_.find({from, to});
  return it == stats_.end() ? LinkStats{} : it->second;
}

void TcpTransport::reset_stats() {
  std::lock_guard lock(mu_);
  stats_.clear();
}

void TcpTransport::stop() {
  if (stopping_.exchange(true)) return;
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(mu_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    for (auto& [_, out] : outbound_) {
      std::lock_guard ol(out->mu);
      out->cv.notify_all();
    }
  }
  for (auto& [_, out] : outbound_) {
    if (out->worker.joinable()) out->worker.join();
  }
  for (auto& l : listeners_) {
    if (l->acceptor.joinable()) l->acceptor.join();
  }
  {
    std::lock_guard lock(mu_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    threads.swap(connections_);
  }
  for (auto& t : threads) {
    if (t.joinable()) t.join();
  }
}

}  // namespace discedge

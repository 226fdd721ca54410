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

#include "discedge/sim_network.hpp"

#include <algorithm>

#include "discedge/errors.hpp"

namespace discedge {

SimNetwork::SimNetwork(Simulator& sim, std::uint64_t seed)
    : sim_(sim), rng_(seed) {}

void SimNetwork::add_link(const LinkSpec& spec) {
  if (spec.latency_ms < 0 || spec.jitter_ms < 0) {
    throw ConfigError("link " + spec.from + "->" + spec.to +
                      ": latency and jitter must be non-negative");
  }
  auto key = std::make_pair(spec.from, spec.to);
  auto it = links_.find(key);
  if (it != links_.end()) {
    it->second.spec = spec;
    return;
  }
  Link l;
  l.spec = spec;
  l.id = static_cast<std::uint32_t>(links_.size());
  links_.emplace(std::move(key), std::move(l));
}

void SimNetwork::set_partitioned(const std::string& from, const std::string& to,
                                 bool partitioned) {
  link(from, to).spec.partitioned = partitioned;
}

void SimNetwork::set_latency(const std::string& from, const std::string& to,
                             double latency_ms, double jitter_ms) {
  if (latency_ms < 0 || jitter_ms < 0) {
    throw ConfigError("latency and jitter must be non-negative");
  }
  auto& spec = link(from, to).spec;
  spec.latency_ms = latency_ms;
  spec.jitter_ms = jitter_ms;
}

bool SimNetwork::has_link(const std::string& from, const std::string& to) const {
  return links_.contains({from, to});
}

SimNetwork::Link& SimNetwork::link(const std::string& from,
                                   const std::string& to) {
  auto it = links_.find({from, to});
  if (it == links_.end()) throw RoutingError("no link " + from + " -> " + to);
  return it->second;
}

void SimNetwork::bind(const std::string& endpoint, FrameHandler handler) {
  handlers_[endpoint] = std::move(handler);
}

void SimNetwork::unbind(const std::string& endpoint) {
  handlers_.erase(endpoint);
}

void SimNetwork::transmit(Link& l, Bytes frame,
                          std::function<void(Bytes)> on_arrival) {
  const std::uint64_t size = frame.size() + kLengthPrefixSize;
  l.stats.frames_sent += 1;
  l.stats.bytes_sent += size;
  if (l.spec.partitioned) {
    l.stats.frames_dropped += 1;
    return;
  }
  Nanos delay = from_ms(l.spec.latency_ms);
  const Nanos jitter = from_ms(l.spec.jitter_ms);
  if (jitter.count() > 0) {
    // Integer draw keeps the timeline identical across standard libraries.
    const auto span = static_cast<std::uint64_t>(2 * jitter.count() + 1);
    delay += Nanos{static_cast<std::int64_t>(rng_() % span) - jitter.count()};
  }
  const Nanos at = std::max(sim_.now() + std::max(delay, Nanos{0}),
                            l.last_delivery);
  l.last_delivery = at;
  Link* link = &l;
  LinkStats* stats = &l.stats;
  sim_.schedule_at(at, l.id,
                   [this, link, stats, size, frame = std::move(frame),
                    on_arrival = std::move(on_arrival)]() mutable {
                     if (link->spec.partitioned) {
                       stats->frames_dropped += 1;
                       return;
                     }
                     stats->frames_delivered += 1;
                     stats->bytes_delivered += size;
                     ++delivered_;
                     on_arrival(std::move(frame));
                   });
}

void SimNetwork::send(const std::string& from, const std::string& to,
                      Bytes frame) {
  transmit(link(from, to), std::move(frame),
           [this, from, to](Bytes f) { deliver(from, to, std::move(f), 0); });
}

void SimNetwork::deliver(const std::string& from, const std::string& to,
                         Bytes frame, std::uint64_t reply_to) {
  auto it = handlers_.find(to);
  if (it == handlers_.end()) return;  // nobody listening: frame is lost
  std::optional<Bytes> reply = it->second(from, frame);
  if (reply_to != 0 && reply) {
    transmit(link(to, from), std::move(*reply), [this, reply_to](Bytes r) {
      replies_[reply_to] = std::move(r);
    });
  }
}

Bytes SimNetwork::request(const std::string& from, const std::string& to,
                          Bytes frame) {
  const std::uint64_t id = next_request_++;
  replies_[id] = std::nullopt;
  link(to, from);  // the reply path must exist
  transmit(link(from, to), std::move(frame), [this, from, to, id](Bytes f) {
    deliver(from, to, std::move(f), id);
  });
  const bool answered = sim_.run_until([&] { return replies_[id].has_value(); });
  auto node = replies_.extract(id);
  if (!answered) {
    throw TransportError("request " + from + " -> " + to + " got no reply");
  }
  return std::move(*node.mapped());
}

std::size_t SimNetwork::advance_clock(Nanos d) {
  const std::uint64_t before = delivered_;
  sim_.advance(d);
  return static_cast<std::size_t>(delivered_ - before);
}

LinkStats SimNetwork::link_stats(const std::string& from,
                                 const std::string& to) const {
  auto it = links_.find({from, to});
  if (it == links_.end()) throw RoutingError("no link " + from + " -> " + to);
  return it->second.stats;
}

void SimNetwork::reset_stats() {
  for (auto& [_, l] : links_) l.stats = {};
}

}  // namespace discedge

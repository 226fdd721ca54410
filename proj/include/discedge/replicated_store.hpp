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

#include <array>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "discedge/bytes.hpp"
#include "discedge/runtime.hpp"
#include "discedge/transport.hpp"

namespace discedge {

struct VersionedValue {
  Bytes bytes;
  std::uint64_t version = 0;
  std::string origin_node;
  std::uint64_t expires_at_ms = 0;

  bool operator==(const VersionedValue&) const = default;
};

enum class UpdateOp : std::uint8_t { kPut = 1, kDelete = 2 };

struct ReplicaUpdate {
  std::string model_id;
  std::string key;
  VersionedValue value;
  UpdateOp op = UpdateOp::kPut;

  bool operator==(const ReplicaUpdate&) const = default;
};

inline constexpr std::array<std::uint8_t, 4> kSyncMagic = {'D', 'C', 'E', '1'};

// Sync frame (the u32 length prefix is added by the transport):
//   "DCE1" | u8 op | model_id | key | varint version | origin_node |
//   varint expires_at_ms | value
// where strings and the value are varint-length-prefixed.
Bytes encode_update(const ReplicaUpdate& update);
ReplicaUpdate decode_update(ByteView frame);
bool is_sync_frame(ByteView frame);

// Last-writer-wins: the higher version wins; equal versions go to the
// lexicographically greater origin node.
bool supersedes(const VersionedValue& incoming, const VersionedValue& current);

struct PeerCounters {
  std::uint64_t frames_sent = 0;
  std::uint64_t bytes_sent = 0;  // frame + length prefix
  std::uint64_t frames_received = 0;
  std::uint64_t bytes_received = 0;

  bool operator==(const PeerCounters&) const = default;
};

struct StoreEntry {
  std::string model_id;
  VersionedValue value;
  bool tombstone = false;

  bool operator==(const StoreEntry&) const = default;
};

// One node's replica of the geo-distributed key-value store. Keys live in
// the keygroup of their model and replicate to every other member of it;
// local writes apply synchronously and ship asynchronously as full values.
// Reads only ever look at local state. Thread-safe; one mutex serializes
// local and remote writes so they are atomic per key.
class ReplicatedStore {
 public:
  ReplicatedStore(std::string node_id, Runtime& runtime, Transport& transport,
                  Nanos tombstone_ttl = std::chrono::hours(1));

  const std::string& node_id() const { return node_id_; }

  // Static membership, declared identically on every node. Re-declaring a
  // keygroup with other members throws ConfigError.
  void create_keygroup(const std::string& model_id,
                       const std::set<std::string>& members);
  bool has_keygroup(const std::string& model_id) const;
  std::set<std::string> keygroup_members(const std::string& model_id) const;

  // Applies locally when `value` supersedes what is stored, then enqueues
  // the update to every other member. Returns whether it was applied.
  // Throws NoKeygroupError when the keygroup is unknown or this node is not
  // a member.
  bool put(const std::string& model_id, const std::string& key,
           VersionedValue value);
  // Local replica state; expired values and tombstones read as absent.
  std::optional<VersionedValue> get(const std::string& key);
  // Highest version stored for `key`, tombstones included; 0 when none.
  std::uint64_t latest_version(const std::string& key);
  // Writes a tombstone at latest_version + 1 and replicates it.
  void remove(const std::string& model_id, const std::string& key);

  // Remote path. Updates for keygroups this node is not in are dropped.
  bool apply_remote(const ReplicaUpdate& update);
  // Decodes and applies one sync frame, counting it against its origin.
  bool on_frame(ByteView frame);

  std::map<std::string, PeerCounters> sync_counters() const;
  std::uint64_t sync_bytes_sent() const;
  void reset_counters();
  // Drops every entry (keygroups stay).
  void clear();

  std::size_t purge_expired();
  // Live state with expired entries purged first.
  std::map<std::string, StoreEntry> snapshot();

 private:
  bool expired(const StoreEntry& e) const;
  bool apply_locked(const std::string& model_id, const std::string& key,
                    const VersionedValue& value, bool tombstone);
  void replicate_locked(const ReplicaUpdate& update);

  std::string node_id_;
  Runtime& runtime_;
  Transport& transport_;
  Nanos tombstone_ttl_;

  mutable std::mutex mu_;
  std::map<std::string, std::set<std::string>> keygroups_;
  std::map<std::string, StoreEntry> entries_;
  std::map<std::string, PeerCounters> counters_;
};

}  // namespace discedge

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

#include "discedge/replicated_store.hpp"

#include <algorithm>

#include "discedge/errors.hpp"

namespace discedge {

Bytes encode_update(const ReplicaUpdate& update) {
  Bytes out(kSyncMagic.begin(), kSyncMagic.end());
  out.push_back(static_cast<std::uint8_t>(update.op));
  put_length_prefixed(out, update.model_id);
  put_length_prefixed(out, update.key);
  put_varint(out, update.value.version);
  put_length_prefixed(out, update.value.origin_node);
  put_varint(out, update.value.expires_at_ms);
  put_length_prefixed(out, ByteView(update.value.bytes));
  return out;
}

bool is_sync_frame(ByteView frame) {
  return frame.size() >= kSyncMagic.size() &&
         std::equal(kSyncMagic.begin(), kSyncMagic.end(), frame.begin());
}

ReplicaUpdate decode_update(ByteView frame) {
  if (!is_sync_frame(frame)) throw DecodeError("missing sync frame magic");
  ByteReader reader(frame.subspan(kSyncMagic.size()));
  ReplicaUpdate update;
  const std::uint8_t op = reader.u8();
  if (op != 1 && op != 2) throw DecodeError("unknown sync op " + std::to_string(op));
  update.op = static_cast<UpdateOp>(op);
  update.model_id = reader.length_prefixed_string();
  update.key = reader.length_prefixed_string();
  update.value.version = reader.varint();
  update.value.origin_node = reader.length_prefixed_string();
  update.value.expires_at_ms = reader.varint();
  ByteView value = reader.length_prefixed();
  update.value.bytes.assign(value.begin(), value.end());
  if (!reader.done()) throw DecodeError("trailing bytes after sync frame");
  return update;
}

bool supersedes(const VersionedValue& incoming, const VersionedValue& current) {
  if (incoming.version != current.version) return incoming.version > current.version;
  return incoming.origin_node > current.origin_node;
}

ReplicatedStore::ReplicatedStore(std::string node_id, Runtime& runtime,
                                 Transport& transport, Nanos tombstone_ttl)
    : node_id_(std::move(node_id)),
      runtime_(runtime),
      transport_(transport),
      tombstone_ttl_(tombstone_ttl) {}

void ReplicatedStore::create_keygroup(const std::string& model_id,
                                      const std::set<std::string>& members) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = keygroups_.try_emplace(model_id, members);
  if (!inserted && it->second != members) {
    throw ConfigError("keygroup " + model_id +
                      " already exists with different members");
  }
}

bool ReplicatedStore::has_keygroup(const std::string& model_id) const {
  std::lock_guard lock(mu_);
  return keygroups_.contains(model_id);
}

std::set<std::string> ReplicatedStore::keygroup_members(
    const std::string& model_id) const {
  std::lock_guard lock(mu_);
  auto it = keygroups_.find(model_id);
  if (it == keygroups_.end()) throw NoKeygroupError("no keygroup " + model_id);
  return it->second;
}

bool ReplicatedStore::expired(const StoreEntry& e) const {
  return runtime_.now_ms() >= e.value.expires_at_ms;
}

bool ReplicatedStore::apply_locked(const std::string& model_id,
                                   const std::string& key,
                                   const VersionedValue& value, bool tombstone) {
  auto it = entries_.find(key);
  if (it != entries_.end() && expired(it->second)) {
    entries_.erase(it);
    it = entries_.end();
  }
  if (it != entries_.end() && !supersedes(value, it->second.value)) return false;
  entries_[key] = StoreEntry{model_id, value, tombstone};
  return true;
}

void ReplicatedStore::replicate_locked(const ReplicaUpdate& update) {
  const auto& members = keygroups_.at(update.model_id);
  Bytes frame = encode_update(update);
  for (const auto& peer : members) {
    if (peer == node_id_) continue;
    auto& c = counters_[peer];
    c.frames_sent += 1;
    c.bytes_sent += frame.size() + kLengthPrefixSize;
    transport_.send(node_id_, peer, frame);
  }
}

bool ReplicatedStore::put(const std::string& model_id, const std::string& key,
                          VersionedValue value) {
  std::lock_guard lock(mu_);
  auto kg = keygroups_.find(model_id);
  if (kg == keygroups_.end()) throw NoKeygroupError("no keygroup " + model_id);
  if (!kg->second.contains(node_id_)) {
    throw NoKeygroupError(node_id_ + " is not a member of keygroup " + model_id);
  }
  if (!apply_locked(model_id, key, value, false)) return false;
  replicate_locked(ReplicaUpdate{model_id, key, std::move(value), UpdateOp::kPut});
  return true;
}

std::optional<VersionedValue> ReplicatedStore::get(const std::string& key) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  if (expired(it->second)) {
    entries_.erase(it);
    return std::nullopt;
  }
  if (it->second.tombstone) return std::nullopt;
  return it->second.value;
}

std::uint64_t ReplicatedStore::latest_version(const std::string& key) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return 0;
  if (expired(it->second)) {
    entries_.erase(it);
    return 0;
  }
  return it->second.value.version;
}

void ReplicatedStore::remove(const std::string& model_id, const std::string& key) {
  std::lock_guard lock(mu_);
  auto kg = keygroups_.find(model_id);
  if (kg == keygroups_.end()) throw NoKeygroupError("no keygroup " + model_id);
  if (!kg->second.contains(node_id_)) {
    throw NoKeygroupError(node_id_ + " is not a member of keygroup " + model_id);
  }
  std::uint64_t current = 0;
  if (auto it = entries_.find(key); it != entries_.end() && !expired(it->second)) {
    current = it->second.value.version;
  }
  VersionedValue tombstone;
  tombstone.version = current + 1;
  tombstone.origin_node = node_id_;
  tombstone.expires_at_ms =
      runtime_.now_ms() + static_cast<std::uint64_t>(tombstone_ttl_.count() / 1'000'000);
  apply_locked(model_id, key, tombstone, true);
  replicate_locked(ReplicaUpdate{model_id, key, std::move(tombstone), UpdateOp::kDelete});
}

bool ReplicatedStore::apply_remote(const ReplicaUpdate& update) {
  std::lock_guard lock(mu_);
  auto kg = keygroups_.find(update.model_id);
  if (kg == keygroups_.end() || !kg->second.contains(node_id_)) return false;
  return apply_locked(update.model_id, update.key, update.value,
                      update.op == UpdateOp::kDelete);
}

bool ReplicatedStore::on_frame(ByteView frame) {
  ReplicaUpdate update = decode_update(frame);
  {
    std::lock_guard lock(mu_);
    auto& c = counters_[update.value.origin_node];
    c.frames_received += 1;
    c.bytes_received += frame.size() + kLengthPrefixSize;
  }
  return apply_remote(update);
}

std::map<std::string, PeerCounters> ReplicatedStore::sync_counters() const {
  std::lock_guard lock(mu_);
  return counters_;
}

std::uint64_t ReplicatedStore::sync_bytes_sent() const {
  std::lock_guard lock(mu_);
  std::uint64_t total = 0;
  for (const auto& [_, c] : counters_) total += c.bytes_sent;
  return total;
}

void ReplicatedStore::reset_counters() {
  std::lock_guard lock(mu_);
  counters_.clear();
}

void ReplicatedStore::clear() {
  std::lock_guard lock(mu_);
  entries_.clear();
}

std::size_t ReplicatedStore::purge_expired() {
  std::lock_guard lock(mu_);
  return std::erase_if(entries_, [&](const auto& kv) { return expired(kv.second); });
}

std::map<std::string, StoreEntry> ReplicatedStore::snapshot() {
  purge_expired();
  std::lock_guard lock(mu_);
  return entries_;
}

}  // namespace discedge

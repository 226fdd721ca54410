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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace discedge {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Unsigned LEB128.
void put_varint(Bytes& out, std::uint64_t value);
std::size_t varint_size(std::uint64_t value);

// Varint length followed by the raw bytes.
void put_length_prefixed(Bytes& out, std::string_view data);
void put_length_prefixed(Bytes& out, ByteView data);

void put_u32_be(Bytes& out, std::uint32_t value);
std::uint32_t read_u32_be(ByteView data);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}
inline std::string to_string(ByteView b) {
  return {reinterpret_cast<const char*>(b.data()), b.size()};
}

// Bounds-checked cursor over a frame. Every read past the end, and every
// varint that is overlong or not minimally encoded, throws DecodeError, so a
// successfully decoded frame always re-encodes to the same bytes.
class ByteReader {
 public:
  explicit ByteReader(ByteView data) : data_(data) {}

  std::uint8_t u8();
  std::uint64_t varint();
  ByteView take(std::size_t n);
  ByteView length_prefixed();
  std::string length_prefixed_string();

  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace discedge

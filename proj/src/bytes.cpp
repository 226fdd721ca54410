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

#include "discedge/bytes.hpp"

#include "discedge/errors.hpp"

namespace discedge {

void put_varint(Bytes& out, std::uint64_t value) {
  while (value >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(value | 0x80));
    value >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(value));
}

std::size_t varint_size(std::uint64_t value) {
  std::size_t n = 1;
  while (value >= 0x80) {
    value >>= 7;
    ++n;
  }
  return n;
}

void put_length_prefixed(Bytes& out, std::string_view data) {
  put_length_prefixed(out, as_bytes(data));
}

void put_length_prefixed(Bytes& out, ByteView data) {
  put_varint(out, data.size());
  out.insert(out.end(), data.begin(), data.end());
}

void put_u32_be(Bytes& out, std::uint32_t value) {
  out.push_back(static_cast<std::uint8_t>(value >> 24));
  out.push_back(static_cast<std::uint8_t>(value >> 16));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
  out.push_back(static_cast<std::uint8_t>(value));
}

std::uint32_t read_u32_be(ByteView data) {
  if (data.size() < 4) throw DecodeError("u32 needs 4 bytes");
  return (std::uint32_t{data[0]} << 24) | (std::uint32_t{data[1]} << 16) |
         (std::uint32_t{data[2]} << 8) | std::uint32_t{data[3]};
}

std::uint8_t ByteReader::u8() {
  if (pos_ >= data_.size()) throw DecodeError("truncated frame");
  return data_[pos_++];
}

std::uint64_t ByteReader::varint() {
  std::uint64_t value = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    if (pos_ >= data_.size()) throw DecodeError("truncated varint");
    const std::uint8_t byte = data_[pos_++];
    if (shift == 63 && (byte & 0x7e) != 0) throw DecodeError("varint overflow");
    value |= std::uint64_t{byte & 0x7fu} << shift;
    if ((byte & 0x80) == 0) {
      if (byte == 0 && shift != 0) throw DecodeError("non-minimal varint");
      return value;
    }
  }
  throw DecodeError("varint longer than 10 bytes");
}

ByteView ByteReader::take(std::size_t n) {
  if (n > remaining()) throw DecodeError("truncated frame");
  ByteView out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

ByteView ByteReader::length_prefixed() {
  const std::uint64_t n = varint();
  if (n > remaining()) throw DecodeError("length exceeds frame");
  return take(static_cast<std::size_t>(n));
}

std::string ByteReader::length_prefixed_string() {
  return to_string(length_prefixed());
}

}  // namespace discedge

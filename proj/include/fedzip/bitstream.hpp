// Copyright 2026 The FedZip Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fedzip {

/// Thrown by BitReader when a read would pass the end of the readable bits.
class BitOverrun : public std::out_of_range {
 public:
  BitOverrun(std::uint64_t offset, int requested)
      : std::out_of_range("bitstream overrun at bit " + std::to_string(offset) + " reading " +
                          std::to_string(requested) + " bits"),
        offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Appends bit fields MSB-first. Multi-byte integers are written as
/// little-endian byte sequences, each byte MSB-first.
class BitWriter {
 public:
  void write_bits(std::uint64_t value, int nbits);
  void write_bit(bool bit) { write_bits(bit ? 1 : 0, 1); }
  void write_u8(std::uint8_t v) { write_bits(v, 8); }
  void write_u16(std::uint16_t v) { write_le(v, 2); }
  void write_u32(std::uint32_t v) { write_le(v, 4); }
  void write_u64(std::uint64_t v) { write_le(v, 8); }
  void write_f32(float v);
  void write_bytes(std::span<const std::uint8_t> bytes);
  /// Copies the first `nbits` bits of a packed MSB-first buffer.
  void append(std::span<const std::uint8_t> bits, std::uint64_t nbits);
  /// LEB128-style varint: 7-bit groups, least significant first, high bit
  /// of each 8-bit group set when more groups follow.
  void write_varint(std::uint64_t v);

  std::uint64_t bit_size() const { return bits_; }
  /// Packed bytes, zero-padded to the next byte boundary.
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() && { return std::move(bytes_); }

 private:
  void write_le(std::uint64_t v, int nbytes);

  std::vector<std::uint8_t> bytes_;
  std::uint64_t bits_ = 0;
};

/// Number of bits write_varint emits for v.
int varint_bits(std::uint64_t v);

class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::uint64_t nbits);
  explicit BitReader(std::span<const std::uint8_t> bytes)
      : BitReader(bytes, static_cast<std::uint64_t>(bytes.size()) * 8) {}

  std::uint64_t read_bits(int nbits);
  bool read_bit() { return read_bits(1) != 0; }
  std::uint8_t read_u8() { return static_cast<std::uint8_t>(read_bits(8)); }
  std::uint16_t read_u16() { return static_cast<std::uint16_t>(read_le(2)); }
  std::uint32_t read_u32() { return static_cast<std::uint32_t>(read_le(4)); }
  std::uint64_t read_u64() { return read_le(8); }
  float read_f32();
  std::vector<std::uint8_t> read_bytes(std::size_t n);
  /// Extracts the next `nbits` bits into a packed MSB-first buffer.
  std::vector<std::uint8_t> read_packed(std::uint64_t nbits);
  /// Rejects overlong encodings (a final group of zero after the first).
  std::uint64_t read_varint();

  std::uint64_t position() const { return pos_; }
  std::uint64_t remaining() const { return limit_ - pos_; }

 private:
  std::uint64_t read_le(int nbytes);

  std::span<const std::uint8_t> bytes_;
  std::uint64_t limit_;
  std::uint64_t pos_ = 0;
};

}  // namespace fedzip

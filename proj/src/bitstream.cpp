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

#include "fedzip/bitstream.hpp"

#include <bit>
#include <cstring>

namespace fedzip {

void BitWriter::write_bits(std::uint64_t value, int nbits) {
  for (int i = nbits - 1; i >= 0; --i) {
    if (bits_ % 8 == 0) bytes_.push_back(0);
    if ((value >> i) & 1U) bytes_.back() |= static_cast<std::uint8_t>(0x80U >> (bits_ % 8));
    ++bits_;
  }
}

void BitWriter::write_le(std::uint64_t v, int nbytes) {
  for (int b = 0; b < nbytes; ++b) write_bits((v >> (8 * b)) & 0xFFU, 8);
}

void BitWriter::write_f32(float v) { write_u32(std::bit_cast<std::uint32_t>(v)); }

void BitWriter::write_bytes(std::span<const std::uint8_t> bytes) {
  for (auto b : bytes) write_u8(b);
}

void BitWriter::append(std::span<const std::uint8_t> bits, std::uint64_t nbits) {
  if (bits_ % 8 == 0 && nbits % 8 == 0) {
    bytes_.insert(bytes_.end(), bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(nbits / 8));
    bits_ += nbits;
    return;
  }
  std::uint64_t whole = nbits / 8;
  for (std::uint64_t i = 0; i < whole; ++i) write_bits(bits[i], 8);
  const int rest = static_cast<int>(nbits % 8);
  if (rest) write_bits(bits[whole] >> (8 - rest), rest);
}

void BitWriter::write_varint(std::uint64_t v) {
  do {
    std::uint8_t group = v & 0x7FU;
    v >>= 7;
    if (v) group |= 0x80U;
    write_u8(group);
  } while (v);
}

int varint_bits(std::uint64_t v) {
  int groups = 1;
  while (v >>= 7) ++groups;
  return 8 * groups;
}

BitReader::BitReader(std::span<const std::uint8_t> bytes, std::uint64_t nbits)
    : bytes_(bytes), limit_(nbits) {
  if (nbits > static_cast<std::uint64_t>(bytes.size()) * 8) {
    throw std::invalid_argument("BitReader: bit length exceeds buffer");
  }
}

std::uint64_t BitReader::read_bits(int nbits) {
  if (static_cast<std::uint64_t>(nbits) > limit_ - pos_) throw BitOverrun(pos_, nbits);
  std::uint64_t v = 0;
  for (int i = 0; i < nbits; ++i) {
    const std::uint8_t byte = bytes_[pos_ / 8];
    v = (v << 1) | ((byte >> (7 - pos_ % 8)) & 1U);
    ++pos_;
  }
  return v;
}

std::uint64_t BitReader::read_le(int nbytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < nbytes; ++b) v |= read_bits(8) << (8 * b);
  return v;
}

float BitReader::read_f32() { return std::bit_cast<float>(read_u32()); }

std::vector<std::uint8_t> BitReader::read_bytes(std::size_t n) {
  if (n * 8 > remaining()) throw BitOverrun(pos_, static_cast<int>(n * 8));
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = read_u8();
  return out;
}

std::vector<std::uint8_t> BitReader::read_packed(std::uint64_t nbits) {
  if (nbits > remaining()) throw BitOverrun(pos_, static_cast<int>(std::min<std::uint64_t>(nbits, 1U << 30)));
  std::vector<std::uint8_t> out((nbits + 7) / 8, 0);
  if (pos_ % 8 == 0) {
    std::memcpy(out.data(), bytes_.data() + pos_ / 8, out.size());
    if (nbits % 8) out.back() &= static_cast<std::uint8_t>(0xFFU << (8 - nbits % 8));
    pos_ += nbits;
    return out;
  }
  const std::uint64_t whole = nbits / 8;
  for (std::uint64_t i = 0; i < whole; ++i) out[i] = static_cast<std::uint8_t>(read_bits(8));
  const int rest = static_cast<int>(nbits % 8);
  if (rest) out[whole] = static_cast<std::uint8_t>(read_bits(rest) << (8 - rest));
  return out;
}

std::uint64_t BitReader::read_varint() {
  const std::uint64_t start = pos_;
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    const std::uint8_t group = read_u8();
    v |= static_cast<std::uint64_t>(group & 0x7FU) << shift;
    if (!(group & 0x80U)) {
      if (group == 0 && shift > 0) {
        throw std::runtime_error("overlong varint at bit " + std::to_string(start));
      }
      return v;
    }
  }
  throw std::runtime_error("varint longer than 64 bits at bit " + std::to_string(start));
}

}  // namespace fedzip

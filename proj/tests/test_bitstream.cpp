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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fedzip/bitstream.hpp"
#include "oracles.hpp"

namespace fedzip {
namespace {

TEST(BitWriter, BitsAreMsbFirst) {
  BitWriter w;
  w.write_bits(0b101, 3);
  w.write_bit(true);
  EXPECT_EQ(w.bit_size(), 4u);
  EXPECT_EQ(w.bytes(), (std::vector<std::uint8_t>{0b10110000}));
}

TEST(BitWriter, IntegersAreLittleEndian) {
  BitWriter w;
  w.write_u16(0x1234);
  w.write_u32(0xA1B2C3D4u);
  EXPECT_EQ(w.bytes(), (std::vector<std::uint8_t>{0x34, 0x12, 0xD4, 0xC3, 0xB2, 0xA1}));
}

TEST(BitWriter, UnalignedIntegersKeepByteOrder) {
  BitWriter w;
  w.write_bit(true);
  w.write_u16(0x00FF);
  // 1 | 11111111 | 00000000 -> 11111111 10000000 0(0000000)
  EXPECT_EQ(w.bytes(), (std::vector<std::uint8_t>{0xFF, 0x80, 0x00}));
  EXPECT_EQ(w.bit_size(), 17u);
}

TEST(Varint, Encodings) {
  auto enc = [](std::uint64_t v) {
    BitWriter w;
    w.write_varint(v);
    return std::move(w).take();
  };
  EXPECT_EQ(enc(0), (std::vector<std::uint8_t>{0x00}));
  EXPECT_EQ(enc(127), (std::vector<std::uint8_t>{0x7F}));
  EXPECT_EQ(enc(128), (std::vector<std::uint8_t>{0x80, 0x01}));
  EXPECT_EQ(enc(300), (std::vector<std::uint8_t>{0xAC, 0x02}));
  for (std::uint64_t v : {0ull, 1ull, 127ull, 128ull, 16383ull, 16384ull, ~0ull}) {
    EXPECT_EQ(varint_bits(v), oracle::varint_bits(v));
    EXPECT_EQ(enc(v).size() * 8, static_cast<std::size_t>(varint_bits(v)));
  }
}

TEST(Varint, RejectsOverlong) {
  const std::vector<std::uint8_t> bytes{0x80, 0x00};
  BitReader r(bytes);
  EXPECT_THROW(r.read_varint(), std::runtime_error);
}

TEST(BitReader, OverrunThrows) {
  const std::vector<std::uint8_t> bytes{0xFF};
  BitReader r(bytes, 5);
  EXPECT_EQ(r.read_bits(4), 0xFu);
  EXPECT_THROW(r.read_bits(2), BitOverrun);
  EXPECT_EQ(r.remaining(), 1u);
}

TEST(Bitstream, RandomFieldsRoundTrip) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    struct Field {
      int kind;
      std::uint64_t v;
      int nbits;
    };
    std::vector<Field> fields;
    BitWriter w;
    for (int i = 0; i < 60; ++i) {
      Field f{int(rng() % 5), rng(), 1 + int(rng() % 64)};
      switch (f.kind) {
        case 0: f.v &= f.nbits == 64 ? ~0ull : ((1ull << f.nbits) - 1); w.write_bits(f.v, f.nbits); break;
        case 1: w.write_u32(static_cast<std::uint32_t>(f.v)); break;
        case 2: w.write_u64(f.v); break;
        case 3: f.v >>= rng() % 64; w.write_varint(f.v); break;
        case 4: w.write_f32(std::bit_cast<float>(static_cast<std::uint32_t>(f.v))); break;
      }
      fields.push_back(f);
    }
    const auto bytes = w.bytes();
    ASSERT_EQ(bytes.size(), (w.bit_size() + 7) / 8);
    BitReader r(bytes, w.bit_size());
    for (const auto& f : fields) {
      switch (f.kind) {
        case 0: ASSERT_EQ(r.read_bits(f.nbits), f.v); break;
        case 1: ASSERT_EQ(r.read_u32(), static_cast<std::uint32_t>(f.v)); break;
        case 2: ASSERT_EQ(r.read_u64(), f.v); break;
        case 3: ASSERT_EQ(r.read_varint(), f.v); break;
        case 4: ASSERT_EQ(std::bit_cast<std::uint32_t>(r.read_f32()), static_cast<std::uint32_t>(f.v)); break;
      }
    }
    EXPECT_EQ(r.remaining(), 0u);
  }
}

TEST(Bitstream, AppendAndReadPackedUnaligned) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto nbits = rng() % 300;
    BitWriter src;
    for (std::uint64_t i = 0; i < nbits; ++i) src.write_bit(rng() & 1);
    BitWriter w;
    const int lead = int(rng() % 8);
    w.write_bits(0, lead);
    w.append(src.bytes(), nbits);
    w.write_bits(0b11, 2);
    const auto bytes = w.bytes();
    BitReader r(bytes, w.bit_size());
    r.read_bits(lead);
    EXPECT_EQ(r.read_packed(nbits), src.bytes());
    EXPECT_EQ(r.read_bits(2), 0b11u);
  }
}

}  // namespace
}  // namespace fedzip

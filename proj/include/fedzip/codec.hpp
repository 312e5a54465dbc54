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

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedzip/quantizer.hpp"
#include "fedzip/tensor.hpp"

namespace fedzip {

/// Lossless label encoders (the θ mode of an update).
enum class Encoder : std::uint8_t { huffman = 0, ap = 1, doap = 2 };

const char* to_string(Encoder e);
Encoder parse_encoder(const std::string& name);

/// Structured failure while decoding one tensor.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::string tensor, std::uint64_t bit_offset, const std::string& what);
  const std::string& tensor() const { return tensor_; }
  std::uint64_t bit_offset() const { return bit_offset_; }

 private:
  std::string tensor_;
  std::uint64_t bit_offset_;
};

/// The encoder cannot represent the given cluster count.
class UnsupportedModeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EncodedHeader {
  std::string name;
  Shape shape;
  TensorKind kind = TensorKind::weight;
  Encoder encoder = Encoder::huffman;
  std::vector<float> centroids;
  std::vector<std::uint32_t> counts;  // one per cluster
  std::uint64_t payload_bit_length = 0;

  int k() const { return static_cast<int>(centroids.size()); }

  friend bool operator==(const EncodedHeader&, const EncodedHeader&) = default;
};

struct EncodedTensor {
  EncodedHeader header;
  std::vector<std::uint8_t> payload;  // packed MSB-first, zero padded

  friend bool operator==(const EncodedTensor&, const EncodedTensor&) = default;
};

// ---- Huffman ---------------------------------------------------------------

/// Huffman code lengths for the given symbol counts. Zero-count symbols get
/// length 0; a single used symbol also gets length 0 (no bits needed).
/// Merges take the two lightest nodes, equal weights ordered leaves first by
/// symbol id, then internal nodes by creation.
std::vector<int> huffman_code_lengths(std::span<const std::uint32_t> counts);

struct Codeword {
  std::uint64_t bits = 0;
  int length = 0;
};

/// Canonical code: symbols ordered by (length, id) receive consecutive codes.
std::vector<Codeword> canonical_codes(std::span<const int> lengths);

// ---- encoders ----------------------------------------------------------------

EncodedTensor encode_huffman(const QuantizedTensor& q);

/// Records (position, 1 discriminator bit) for the two least frequent
/// clusters; position width is ceil(log2(numel)). Requires k == 3.
EncodedTensor encode_ap(const QuantizedTensor& q);

/// Like AP with positions replaced by varint gaps to the previous record.
/// Requires k == 3.
EncodedTensor encode_doap(const QuantizedTensor& q);

EncodedTensor encode(const QuantizedTensor& q, Encoder encoder);

/// The two least frequent clusters (ascending count, then ascending id)
/// followed by the dominant one. Discriminator bit 0 selects element [0].
std::array<ClusterLabel, 3> address_roles(std::span<const std::uint32_t> counts);

/// Exact inverse of encode_*. Throws DecodeError on malformed input.
QuantizedTensor decode(const EncodedTensor& e);

// ---- accounting ----------------------------------------------------------------

/// Serialized size of a tensor record header in bits.
std::uint64_t header_bits(const EncodedHeader& h);

std::uint64_t encoded_size_bits(const EncodedTensor& e, bool include_header);

/// 32 * numel / encoded_size_bits(e, include_header).
double tensor_compression_rate(const EncodedTensor& e, bool include_header);

// ---- update file -----------------------------------------------------------------

inline constexpr std::uint16_t kUpdateFormatVersion = 1;
/// "FZIP" + version + client id + n_m + round + tensor count.
inline constexpr std::uint64_t kUpdateFileHeaderBits = 8 * (4 + 2 + 4 + 8 + 4 + 4);

struct EncodedUpdate {
  std::uint32_t client_id = 0;
  std::uint64_t n_m = 0;
  std::uint32_t round = 0;
  std::vector<EncodedTensor> tensors;

  friend bool operator==(const EncodedUpdate&, const EncodedUpdate&) = default;
};

/// Exact bit length of the serialized update before final byte padding.
std::uint64_t update_size_bits(const EncodedUpdate& u);

/// One contiguous bitstream: file header, then every tensor record (header
/// fields followed directly by its payload bits), zero padded to a byte.
std::vector<std::uint8_t> serialize_update(const EncodedUpdate& u);
EncodedUpdate parse_update(std::span<const std::uint8_t> bytes);

void write_update_file(const std::string& path, const EncodedUpdate& u);
EncodedUpdate read_update_file(const std::string& path);

}  // namespace fedzip

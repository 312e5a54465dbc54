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

#include "fedzip/codec.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <tuple>

#include "fedzip/bitstream.hpp"

namespace fedzip {

const char* to_string(Encoder e) {
  switch (e) {
    case Encoder::huffman: return "huffman";
    case Encoder::ap: return "ap";
    case Encoder::doap: return "doap";
  }
  return "?";
}

Encoder parse_encoder(const std::string& name) {
  if (name == "huffman") return Encoder::huffman;
  if (name == "ap") return Encoder::ap;
  if (name == "doap") return Encoder::doap;
  throw std::invalid_argument("unknown encoder '" + name + "' (expected huffman, ap or doap)");
}

DecodeError::DecodeError(std::string tensor, std::uint64_t bit_offset, const std::string& what)
    : std::runtime_error("decode '" + tensor + "' at payload bit " + std::to_string(bit_offset) +
                         ": " + what),
      tensor_(std::move(tensor)),
      bit_offset_(bit_offset) {}

// ---- Huffman ---------------------------------------------------------------

std::vector<int> huffman_code_lengths(std::span<const std::uint32_t> counts) {
  const std::size_t k = counts.size();
  std::vector<int> lengths(k, 0);
  // (weight, order key, node id); leaves use their symbol id as key.
  using Node = std::tuple<std::uint64_t, std::size_t, std::size_t>;
  std::priority_queue<Node, std::vector<Node>, std::greater<>> heap;
  std::vector<std::size_t> parent;
  for (std::size_t s = 0; s < k; ++s) {
    parent.push_back(std::numeric_limits<std::size_t>::max());
    if (counts[s] > 0) heap.emplace(counts[s], s, s);
  }
  if (heap.size() < 2) return lengths;
  while (heap.size() > 1) {
    const auto [w1, k1, a] = heap.top();
    heap.pop();
    const auto [w2, k2, b] = heap.top();
    heap.pop();
    const std::size_t id = parent.size();
    parent.push_back(std::numeric_limits<std::size_t>::max());
    parent[a] = id;
    parent[b] = id;
    heap.emplace(w1 + w2, id, id);
  }
  for (std::size_t s = 0; s < k; ++s) {
    if (counts[s] == 0) continue;
    int depth = 0;
    for (std::size_t node = s; parent[node] != std::numeric_limits<std::size_t>::max();
         node = parent[node]) {
      ++depth;
    }
    lengths[s] = depth;
  }
  return lengths;
}

std::vector<Codeword> canonical_codes(std::span<const int> lengths) {
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s < lengths.size(); ++s) {
    if (lengths[s] > 0) order.push_back(s);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  std::vector<Codeword> codes(lengths.size());
  std::uint64_t code = 0;
  int prev_len = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int len = lengths[order[i]];
    if (i > 0) code = (code + 1) << (len - prev_len);
    else code = 0;
    codes[order[i]] = {code, len};
    prev_len = len;
  }
  return codes;
}

namespace {

/// Canonical decoding tables: per length, the first code and the offset of
/// its first symbol in `symbols`.
struct CanonicalDecoder {
  std::vector<std::size_t> symbols;
  std::vector<std::uint64_t> first_code;
  std::vector<std::size_t> count;
  std::vector<std::size_t> offset;
  int max_len = 0;

  explicit CanonicalDecoder(std::span<const int> lengths) {
    for (int l : lengths) max_len = std::max(max_len, l);
    count.assign(static_cast<std::size_t>(max_len) + 1, 0);
    for (int l : lengths) {
      if (l > 0) ++count[static_cast<std::size_t>(l)];
    }
    for (std::size_t s = 0; s < lengths.size(); ++s) {
      if (lengths[s] > 0) symbols.push_back(s);
    }
    std::stable_sort(symbols.begin(), symbols.end(),
                     [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
    first_code.assign(count.size(), 0);
    offset.assign(count.size(), 0);
    std::uint64_t code = 0;
    std::size_t at = 0;
    for (std::size_t len = 1; len < count.size(); ++len) {
      code <<= 1;
      first_code[len] = code;
      offset[len] = at;
      code += count[len];
      at += count[len];
    }
  }
};

EncodedHeader header_for(const QuantizedTensor& q, Encoder encoder) {
  if (q.numel() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("encode: tensor '" + q.name + "' exceeds 2^32-1 elements");
  }
  if (q.k() < 1 || q.k() > kMaxClusters) {
    throw std::invalid_argument("encode: tensor '" + q.name + "' has unsupported k");
  }
  EncodedHeader h;
  h.name = q.name;
  h.shape = q.shape;
  h.kind = q.kind;
  h.encoder = encoder;
  h.centroids = q.centroids;
  for (auto c : q.counts()) h.counts.push_back(static_cast<std::uint32_t>(c));
  return h;
}

EncodedTensor finish(EncodedHeader h, BitWriter&& w) {
  h.payload_bit_length = w.bit_size();
  return {std::move(h), std::move(w).take()};
}

int position_width(std::int64_t numel) {
  return numel <= 1 ? 0 : static_cast<int>(std::bit_width(static_cast<std::uint64_t>(numel - 1)));
}

void require_three_clusters(const QuantizedTensor& q, Encoder e) {
  if (q.k() != 3) {
    throw UnsupportedModeError(std::string(to_string(e)) + " encoding requires k = 3, tensor '" +
                               q.name + "' has k = " + std::to_string(q.k()));
  }
}

}  // namespace

std::array<ClusterLabel, 3> address_roles(std::span<const std::uint32_t> counts) {
  if (counts.size() != 3) throw UnsupportedModeError("address encodings require k = 3");
  std::array<ClusterLabel, 3> r{0, 1, 2};
  std::stable_sort(r.begin(), r.end(),
                   [&](ClusterLabel a, ClusterLabel b) { return counts[a] < counts[b]; });
  return r;
}

EncodedTensor encode_huffman(const QuantizedTensor& q) {
  auto h = header_for(q, Encoder::huffman);
  const auto lengths = huffman_code_lengths(h.counts);
  const auto codes = canonical_codes(lengths);
  BitWriter w;
  for (auto l : q.labels) w.write_bits(codes[l].bits, codes[l].length);
  return finish(std::move(h), std::move(w));
}

EncodedTensor encode_ap(const QuantizedTensor& q) {
  require_three_clusters(q, Encoder::ap);
  auto h = header_for(q, Encoder::ap);
  const auto roles = address_roles(h.counts);
  const int width = position_width(q.numel());
  BitWriter w;
  for (std::size_t i = 0; i < q.labels.size(); ++i) {
    const auto l = q.labels[i];
    if (l == roles[2]) continue;
    w.write_bits(i, width);
    w.write_bit(l == roles[1]);
  }
  return finish(std::move(h), std::move(w));
}

EncodedTensor encode_doap(const QuantizedTensor& q) {
  require_three_clusters(q, Encoder::doap);
  auto h = header_for(q, Encoder::doap);
  const auto roles = address_roles(h.counts);
  BitWriter w;
  std::uint64_t prev = 0;
  bool first = true;
  for (std::size_t i = 0; i < q.labels.size(); ++i) {
    const auto l = q.labels[i];
    if (l == roles[2]) continue;
    w.write_varint(first ? i : i - prev);
    w.write_bit(l == roles[1]);
    prev = i;
    first = false;
  }
  return finish(std::move(h), std::move(w));
}

EncodedTensor encode(const QuantizedTensor& q, Encoder encoder) {
  switch (encoder) {
    case Encoder::huffman: return encode_huffman(q);
    case Encoder::ap: return encode_ap(q);
    case Encoder::doap: return encode_doap(q);
  }
  throw std::invalid_argument("encode: unknown encoder");
}

// ---- decode ----------------------------------------------------------------

namespace {

QuantizedTensor decode_huffman(const EncodedHeader& h, BitReader& r, std::int64_t numel) {
  std::vector<ClusterLabel> labels(static_cast<std::size_t>(numel));
  const auto lengths = huffman_code_lengths(h.counts);
  const bool single = std::count_if(h.counts.begin(), h.counts.end(),
                                    [](std::uint32_t c) { return c > 0; }) == 1;
  if (single) {
    const auto sym = static_cast<ClusterLabel>(
        std::find_if(h.counts.begin(), h.counts.end(), [](std::uint32_t c) { return c > 0; }) -
        h.counts.begin());
    std::fill(labels.begin(), labels.end(), sym);
  } else {
    const CanonicalDecoder dec(lengths);
    for (auto& out : labels) {
      std::uint64_t code = 0;
      int len = 0;
      for (;;) {
        const std::uint64_t at = r.position();
        if (len == dec.max_len) throw DecodeError(h.name, at, "invalid Huffman codeword");
        code = (code << 1) | r.read_bits(1);
        ++len;
        const auto L = static_cast<std::size_t>(len);
        if (dec.count[L] && code - dec.first_code[L] < dec.count[L] && code >= dec.first_code[L]) {
          out = static_cast<ClusterLabel>(dec.symbols[dec.offset[L] + (code - dec.first_code[L])]);
          break;
        }
      }
    }
  }
  QuantizedTensor q;
  q.labels = std::move(labels);
  return q;
}

QuantizedTensor decode_address(const EncodedHeader& h, BitReader& r, std::int64_t numel) {
  if (h.k() != 3) {
    throw DecodeError(h.name, 0, std::string(to_string(h.encoder)) + " payload with k = " +
                                     std::to_string(h.k()));
  }
  const auto roles = address_roles(h.counts);
  const std::uint64_t records = std::uint64_t{h.counts[roles[0]]} + h.counts[roles[1]];
  const int width = position_width(numel);
  if (h.encoder == Encoder::ap && h.payload_bit_length != records * (width + 1)) {
    throw DecodeError(h.name, 0, "payload length " + std::to_string(h.payload_bit_length) +
                                     " inconsistent with " + std::to_string(records) + " records");
  }
  std::vector<ClusterLabel> labels(static_cast<std::size_t>(numel), roles[2]);
  std::uint64_t prev = 0;
  for (std::uint64_t rec = 0; rec < records; ++rec) {
    const std::uint64_t at = r.position();
    std::uint64_t pos = 0;
    if (h.encoder == Encoder::ap) {
      pos = r.read_bits(width);
      if (rec > 0 && pos <= prev) throw DecodeError(h.name, at, "positions not ascending");
    } else {
      std::uint64_t gap = 0;
      try {
        gap = r.read_varint();
      } catch (const std::runtime_error& e) {
        throw DecodeError(h.name, at, e.what());
      }
      if (rec > 0 && gap == 0) throw DecodeError(h.name, at, "zero gap between records");
      if (rec > 0 && gap > std::numeric_limits<std::uint64_t>::max() - prev) {
        throw DecodeError(h.name, at, "gap overflows position");
      }
      pos = rec == 0 ? gap : prev + gap;
    }
    if (pos >= static_cast<std::uint64_t>(numel)) {
      throw DecodeError(h.name, at, "position " + std::to_string(pos) + " >= length " +
                                        std::to_string(numel));
    }
    labels[pos] = roles[r.read_bit() ? 1 : 0];
    prev = pos;
  }
  QuantizedTensor q;
  q.labels = std::move(labels);
  return q;
}

}  // namespace

QuantizedTensor decode(const EncodedTensor& e) {
  const auto& h = e.header;
  const std::int64_t numel = shape_numel(h.shape);
  if (h.k() < 1 || h.counts.size() != h.centroids.size()) {
    throw DecodeError(h.name, 0, "malformed cluster table");
  }
  const std::uint64_t total =
      std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0});
  if (total != static_cast<std::uint64_t>(numel)) {
    throw DecodeError(h.name, 0, "cluster counts sum to " + std::to_string(total) +
                                     ", shape holds " + std::to_string(numel));
  }
  if (h.payload_bit_length > static_cast<std::uint64_t>(e.payload.size()) * 8) {
    throw DecodeError(h.name, 0, "truncated payload");
  }

  BitReader r(e.payload, h.payload_bit_length);
  QuantizedTensor q;
  try {
    q = h.encoder == Encoder::huffman ? decode_huffman(h, r, numel) : decode_address(h, r, numel);
  } catch (const BitOverrun& ex) {
    throw DecodeError(h.name, ex.offset(), "truncated payload");
  }
  if (r.remaining() != 0) {
    throw DecodeError(h.name, r.position(), std::to_string(r.remaining()) + " unread payload bits");
  }

  q.name = h.name;
  q.shape = h.shape;
  q.kind = h.kind;
  q.centroids = h.centroids;
  const auto got = q.counts();
  for (std::size_t j = 0; j < got.size(); ++j) {
    if (static_cast<std::uint64_t>(got[j]) != h.counts[j]) {
      throw DecodeError(h.name, r.position(),
                        "decoded count of cluster " + std::to_string(j) + " is " +
                            std::to_string(got[j]) + ", header says " + std::to_string(h.counts[j]));
    }
  }
  q.frequency_order = frequency_order_of(got);
  return q;
}

// ---- accounting ----------------------------------------------------------------

std::uint64_t header_bits(const EncodedHeader& h) {
  // name_len u16 + name + kind u8 + encoder u8 + rank u8 + dims u32 + k u8
  // + centroids f32 + counts u32 + payload_bit_length u64
  const std::uint64_t bytes = 2 + h.name.size() + 1 + 1 + 1 + 4 * h.shape.size() + 1 +
                              4 * h.centroids.size() + 4 * h.counts.size() + 8;
  return 8 * bytes;
}

std::uint64_t encoded_size_bits(const EncodedTensor& e, bool include_header) {
  return e.header.payload_bit_length + (include_header ? header_bits(e.header) : 0);
}

double tensor_compression_rate(const EncodedTensor& e, bool include_header) {
  const auto bits = encoded_size_bits(e, include_header);
  if (bits == 0) throw std::invalid_argument("compression rate undefined for zero encoded bits");
  return 32.0 * static_cast<double>(shape_numel(e.header.shape)) / static_cast<double>(bits);
}

// ---- update file -----------------------------------------------------------------

std::uint64_t update_size_bits(const EncodedUpdate& u) {
  std::uint64_t bits = kUpdateFileHeaderBits;
  for (const auto& t : u.tensors) bits += encoded_size_bits(t, true);
  return bits;
}

std::vector<std::uint8_t> serialize_update(const EncodedUpdate& u) {
  BitWriter w;
  for (char c : std::string("FZIP")) w.write_u8(static_cast<std::uint8_t>(c));
  w.write_u16(kUpdateFormatVersion);
  w.write_u32(u.client_id);
  w.write_u64(u.n_m);
  w.write_u32(u.round);
  w.write_u32(static_cast<std::uint32_t>(u.tensors.size()));
  for (const auto& t : u.tensors) {
    const auto& h = t.header;
    if (h.name.size() > std::numeric_limits<std::uint16_t>::max() || h.shape.size() > 255 ||
        h.centroids.size() > 255 || h.counts.size() != h.centroids.size()) {
      throw std::invalid_argument("serialize_update: tensor '" + h.name + "' header out of range");
    }
    w.write_u16(static_cast<std::uint16_t>(h.name.size()));
    for (char c : h.name) w.write_u8(static_cast<std::uint8_t>(c));
    w.write_u8(static_cast<std::uint8_t>(h.kind));
    w.write_u8(static_cast<std::uint8_t>(h.encoder));
    w.write_u8(static_cast<std::uint8_t>(h.shape.size()));
    for (auto d : h.shape) w.write_u32(static_cast<std::uint32_t>(d));
    w.write_u8(static_cast<std::uint8_t>(h.centroids.size()));
    for (float c : h.centroids) w.write_f32(c);
    for (auto c : h.counts) w.write_u32(c);
    w.write_u64(h.payload_bit_length);
    w.append(t.payload, h.payload_bit_length);
  }
  return std::move(w).take();
}

EncodedUpdate parse_update(std::span<const std::uint8_t> bytes) {
  BitReader r(bytes);
  auto fail = [&](const std::string& what) {
    return std::runtime_error("update stream at bit " + std::to_string(r.position()) + ": " + what);
  };
  EncodedUpdate u;
  try {
    const auto magic = r.read_bytes(4);
    if (std::string(magic.begin(), magic.end()) != "FZIP") throw fail("bad magic");
    const auto version = r.read_u16();
    if (version != kUpdateFormatVersion) {
      throw fail("unsupported format version " + std::to_string(version));
    }
    u.client_id = r.read_u32();
    u.n_m = r.read_u64();
    u.round = r.read_u32();
    const auto count = r.read_u32();
    for (std::uint32_t i = 0; i < count; ++i) {
      EncodedTensor t;
      auto& h = t.header;
      const auto name_bytes = r.read_bytes(r.read_u16());
      h.name.assign(name_bytes.begin(), name_bytes.end());
      const auto kind = r.read_u8();
      if (kind > 1) throw fail("tensor '" + h.name + "': bad kind");
      h.kind = static_cast<TensorKind>(kind);
      const auto enc = r.read_u8();
      if (enc > 2) throw fail("tensor '" + h.name + "': bad encoder id");
      h.encoder = static_cast<Encoder>(enc);
      const auto rank = r.read_u8();
      for (int d = 0; d < rank; ++d) {
        const auto dim = r.read_u32();
        if (dim == 0) throw fail("tensor '" + h.name + "': zero dimension");
        h.shape.push_back(dim);
      }
      const auto k = r.read_u8();
      for (int j = 0; j < k; ++j) h.centroids.push_back(r.read_f32());
      for (int j = 0; j < k; ++j) h.counts.push_back(r.read_u32());
      h.payload_bit_length = r.read_u64();
      if (h.payload_bit_length > r.remaining()) {
        throw fail("tensor '" + h.name + "': payload of " + std::to_string(h.payload_bit_length) +
                   " bits exceeds stream");
      }
      t.payload = r.read_packed(h.payload_bit_length);
      u.tensors.push_back(std::move(t));
    }
  } catch (const BitOverrun&) {
    throw fail("truncated update stream");
  }
  if (r.remaining() >= 8) throw fail("trailing bytes after last tensor");
  return u;
}

void write_update_file(const std::string& path, const EncodedUpdate& u) {
  const auto bytes = serialize_update(u);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

EncodedUpdate read_update_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_update(bytes);
}

}  // namespace fedzip

/*
 * Copyright 2026 The sslr Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sslr/bits.hpp"
#include "sslr/error.hpp"
#include "sslr/fixedpoint.hpp"
#include "sslr/io.hpp"
#include "sslr/prg.hpp"
#include "sslr/ring.hpp"
#include "sslr/role.hpp"

namespace sslr {

// One party's shares of a vector, ring elements in order.
struct ShareVector {
  Role role = Role::A;
  std::vector<RingElement> values;

  std::size_t size() const { return values.size(); }
};

// One party's shares of a row-major matrix.
struct ShareMatrix {
  Role role = Role::A;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<RingElement> values;

  ShareMatrix() = default;
  ShareMatrix(Role r, std::size_t nrows, std::size_t ncols)
      : role(r), rows(nrows), cols(ncols), values(nrows * ncols) {}
  ShareMatrix(Role r, std::size_t nrows, std::size_t ncols,
              std::vector<RingElement> v)
      : role(r), rows(nrows), cols(ncols), values(std::move(v)) {
    if (values.size() != rows * cols) {
      fail(ErrorCode::kProtocol, "share matrix size does not match dims");
    }
  }

  RingElement& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  RingElement at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// XOR share of a single bit.
struct BitShare {
  bool bit = false;
  Role role = Role::A;
};

// XOR shares of a bit string; the secret is the XOR of both parties' bits.
struct BitVectorShare {
  Role role = Role::A;
  BitVector bits;
};

// Splits x into (A, B) shares with A's share set to r.
inline std::pair<RingShare, RingShare> split_with(RingElement x, RingElement r,
                                                  const Ring& ring) {
  return {{ring.reduce(r), Role::A}, {ring.sub(x, r), Role::B}};
}

inline std::pair<RingShare, RingShare> split(RingElement x, const Ring& ring,
                                             Prg& rng) {
  return split_with(x, rng(), ring);
}

inline RingElement open(const RingShare& a, const RingShare& b, const Ring& ring) {
  if (a.role == b.role) {
    fail(ErrorCode::kProtocol,
         std::string("cannot open two shares held by role ") + to_string(a.role));
  }
  return ring.add(a.value, b.value);
}

inline bool open(const BitShare& a, const BitShare& b) {
  if (a.role == b.role) fail(ErrorCode::kProtocol, "cannot open two bit shares of the same role");
  return a.bit != b.bit;
}

// Opens two equal-length share vectors elementwise.
inline std::vector<RingElement> open(std::span<const RingElement> a,
                                     std::span<const RingElement> b,
                                     const Ring& ring) {
  if (a.size() != b.size()) fail(ErrorCode::kProtocol, "share vectors differ in length");
  std::vector<RingElement> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = ring.add(a[i], b[i]);
  return out;
}

inline std::vector<RingElement> open(const ShareVector& a, const ShareVector& b,
                                     const Ring& ring) {
  if (a.role == b.role) fail(ErrorCode::kProtocol, "cannot open two shares held by the same role");
  return open(std::span<const RingElement>(a.values), b.values, ring);
}

inline BitVector open(const BitVectorShare& a, const BitVectorShare& b) {
  if (a.role == b.role) fail(ErrorCode::kProtocol, "cannot open two bit shares of the same role");
  if (a.bits.size() != b.bits.size()) fail(ErrorCode::kProtocol, "bit shares differ in length");
  BitVector out(a.bits.size());
  for (std::size_t w = 0; w < out.words().size(); ++w) {
    out.words()[w] = a.bits.words()[w] ^ b.bits.words()[w];
  }
  out.clear_padding();
  return out;
}

struct AffineTerm {
  RingElement coeff;
  RingShare share;
};

// Local evaluation of c0 + sum coeff_i * x_i. Only A adds the constant.
inline RingShare affine_combine(Role role, const Ring& ring, RingElement c0,
                                std::span<const AffineTerm> terms) {
  RingElement acc = role == Role::A ? ring.reduce(c0) : 0;
  for (const auto& t : terms) {
    if (t.share.role != role) {
      fail(ErrorCode::kProtocol, "affine_combine over shares of mixed roles");
    }
    acc = ring.add(acc, ring.mul(t.coeff, t.share.value));
  }
  return {acc, role};
}

inline RingShare affine_combine(Role role, const Ring& ring, RingElement c0,
                                std::initializer_list<AffineTerm> terms) {
  return affine_combine(role, ring, c0,
                        std::span<const AffineTerm>(terms.begin(), terms.size()));
}

// ---------------------------------------------------------------------------
// Share files: "SHR1", u32 lambda, u32 a, u32 b, u64 rows, u64 cols, then
// rows*cols little-endian u64 share words in row-major order.

struct ShareFileHeader {
  FixedPointParams params;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;

  friend bool operator==(const ShareFileHeader&, const ShareFileHeader&) = default;
};

inline constexpr char kShareMagic[4] = {'S', 'H', 'R', '1'};
inline constexpr std::size_t kShareHeaderBytes = 32;

inline std::vector<std::uint8_t> encode_share_file(
    const ShareFileHeader& h, std::span<const RingElement> words) {
  if (words.size() != h.rows * h.cols) {
    fail(ErrorCode::kFormat, "share payload does not match header dims");
  }
  io::ByteWriter w;
  for (char c : kShareMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(h.params.ring_bits);
  w.u32(h.params.frac_bits);
  w.u32(h.params.int_bits);
  w.u64(h.rows);
  w.u64(h.cols);
  w.words(words);
  return w.take();
}

inline std::pair<ShareFileHeader, std::vector<RingElement>> decode_share_file(
    std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  for (char c : kShareMagic) {
    if (r.u8() != static_cast<std::uint8_t>(c)) fail(ErrorCode::kFormat, "bad share-file magic");
  }
  ShareFileHeader h;
  h.params.ring_bits = r.u32();
  h.params.frac_bits = r.u32();
  h.params.int_bits = r.u32();
  h.rows = r.u64();
  h.cols = r.u64();
  try {
    h.params.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kFormat, std::string("share-file header: ") + e.what());
  }
  if (h.cols != 0 && h.rows > r.remaining() / 8 / h.cols) {
    fail(ErrorCode::kFormat, "share-file payload shorter than its header claims");
  }
  if (r.remaining() != h.rows * h.cols * 8) {
    fail(ErrorCode::kFormat, "share-file payload length does not match header");
  }
  std::vector<RingElement> words(h.rows * h.cols);
  r.words(words);
  const Ring ring = h.params.ring();
  for (auto v : words) {
    if (ring.reduce(v) != v) fail(ErrorCode::kFormat, "share word exceeds the ring");
  }
  return {h, std::move(words)};
}

inline void write_share_file(const std::string& path, const ShareFileHeader& h,
                             std::span<const RingElement> words) {
  io::write_file(path, encode_share_file(h, words));
}

inline std::pair<ShareFileHeader, std::vector<RingElement>> read_share_file(
    const std::string& path) {
  const auto bytes = io::read_file(path);
  return decode_share_file(bytes);
}

}  // namespace sslr

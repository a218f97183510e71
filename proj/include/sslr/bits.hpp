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

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sslr {

constexpr std::size_t words_for_bits(std::size_t n) { return (n + 63) / 64; }

// Bits packed LSB-first into 64-bit words: bit i lives in word i/64 at
// position i%64. Padding bits past size() are kept zero by the mutators but
// protocol code must not rely on them.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t n) : size_(n), words_(words_for_bits(n)) {}
  BitVector(std::size_t n, std::vector<std::uint64_t> words)
      : size_(n), words_(std::move(words)) {
    words_.resize(words_for_bits(n));
    clear_padding();
  }

  std::size_t size() const { return size_; }
  bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1; }
  void set(std::size_t i, bool b) {
    const std::uint64_t bit = std::uint64_t{1} << (i % 64);
    if (b) words_[i / 64] |= bit; else words_[i / 64] &= ~bit;
  }

  std::span<const std::uint64_t> words() const { return words_; }
  std::span<std::uint64_t> words() { return words_; }

  void clear_padding() {
    if (size_ % 64 != 0 && !words_.empty()) {
      words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }
  }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// In-place transpose of a 64x64 bit matrix held as 64 words (row r is
// m[r], column c is bit c). Recursive block swap, 6 passes.
inline void transpose64(std::span<std::uint64_t, 64> m) {
  std::uint64_t mask = 0x00000000FFFFFFFFull;
  for (unsigned width = 32; width != 0; width >>= 1, mask ^= mask << width) {
    for (unsigned r = 0; r < 64; r = (r + width + 1) & ~width) {
      const std::uint64_t t = ((m[r] >> width) ^ m[r + width]) & mask;
      m[r] ^= t << width;
      m[r + width] ^= t;
    }
  }
}

// Bit-slices `values`: slice j is the packed vector of bit j of every value.
// Returns `bits` slices of words_for_bits(values.size()) words each.
inline std::vector<std::vector<std::uint64_t>> to_bit_slices(
    std::span<const std::uint64_t> values, unsigned bits) {
  const std::size_t nw = words_for_bits(values.size());
  std::vector<std::vector<std::uint64_t>> slices(bits,
                                                 std::vector<std::uint64_t>(nw));
  std::array<std::uint64_t, 64> block;
  for (std::size_t w = 0; w < nw; ++w) {
    block.fill(0);
    const std::size_t base = w * 64;
    const std::size_t n = std::min<std::size_t>(64, values.size() - base);
    for (std::size_t i = 0; i < n; ++i) block[i] = values[base + i];
    transpose64(block);
    for (unsigned j = 0; j < bits; ++j) slices[j][w] = block[j];
  }
  return slices;
}

// Inverse of to_bit_slices for `count` values; missing high bits are zero.
inline std::vector<std::uint64_t> from_bit_slices(
    const std::vector<std::vector<std::uint64_t>>& slices, std::size_t count) {
  std::vector<std::uint64_t> values(count);
  std::array<std::uint64_t, 64> block;
  const std::size_t nw = words_for_bits(count);
  for (std::size_t w = 0; w < nw; ++w) {
    block.fill(0);
    for (std::size_t j = 0; j < slices.size() && j < 64; ++j) block[j] = slices[j][w];
    transpose64(block);
    const std::size_t base = w * 64;
    const std::size_t n = std::min<std::size_t>(64, count - base);
    for (std::size_t i = 0; i < n; ++i) values[base + i] = block[i];
  }
  return values;
}

}  // namespace sslr

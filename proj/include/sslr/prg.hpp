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

#include <sodium.h>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <string_view>

#include "sslr/error.hpp"

namespace sslr {

using Seed = std::array<std::uint8_t, 32>;

namespace detail {
inline void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) fail(ErrorCode::kArgument, "libsodium initialisation failed");
}
}  // namespace detail

// Domain-separated subkey: BLAKE2b keyed with the parent seed over `label`.
inline Seed derive_seed(const Seed& parent, std::string_view label) {
  detail::ensure_sodium();
  Seed out{};
  crypto_generichash(out.data(), out.size(),
                     reinterpret_cast<const unsigned char*>(label.data()),
                     label.size(), parent.data(), parent.size());
  return out;
}

// Expands a short operator-supplied integer into a 256-bit master seed.
inline Seed seed_from_u64(std::uint64_t value) {
  detail::ensure_sodium();
  unsigned char in[8];
  for (int i = 0; i < 8; ++i) in[i] = static_cast<unsigned char>(value >> (8 * i));
  Seed out{};
  crypto_generichash(out.data(), out.size(), in, sizeof(in), nullptr, 0);
  return out;
}

// Public commitment to a seed (its unkeyed BLAKE2b hash).
inline Seed commit_seed(const Seed& seed) {
  detail::ensure_sodium();
  Seed out{};
  crypto_generichash(out.data(), out.size(), seed.data(), seed.size(), nullptr,
                     0);
  return out;
}

// ChaCha20 keystream generator. Deterministic for a given seed; models
// std::uniform_random_bit_generator so it plugs into <random>.
class Prg {
 public:
  using result_type = std::uint64_t;

  explicit Prg(const Seed& seed) : key_(seed) { detail::ensure_sodium(); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    if (pos_ == kBufferWords) refill();
    return buffer_[pos_++];
  }

  void fill(std::span<std::uint64_t> out) {
    for (auto& w : out) w = (*this)();
  }

  // Uniform in [0, bound), bound > 0, by rejection.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t v;
    do v = (*this)(); while (v >= limit);
    return v % bound;
  }

  bool bit() { return (*this)() & 1; }

 private:
  static constexpr std::size_t kBufferWords = 512;  // 64 ChaCha blocks

  void refill() {
    static constexpr unsigned char kNonce[crypto_stream_chacha20_ietf_NONCEBYTES] = {};
    std::memset(buffer_.data(), 0, sizeof(buffer_));
    auto* bytes = reinterpret_cast<unsigned char*>(buffer_.data());
    crypto_stream_chacha20_ietf_xor_ic(bytes, bytes, sizeof(buffer_), kNonce,
                                       block_counter_, key_.data());
    block_counter_ += sizeof(buffer_) / 64;
    for (auto& w : buffer_) w = le_to_host(w);
    pos_ = 0;
  }

  static std::uint64_t le_to_host(std::uint64_t w) {
    if constexpr (std::endian::native == std::endian::big) {
      return __builtin_bswap64(w);
    }
    return w;
  }

  Seed key_;
  std::array<std::uint64_t, kBufferWords> buffer_{};
  std::size_t pos_ = kBufferWords;
  std::uint32_t block_counter_ = 0;
};

}  // namespace sslr

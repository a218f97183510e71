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
#include <string>

#include "sslr/error.hpp"

namespace sslr {

// A value of Z_{2^lambda}. Always stored reduced: value < 2^lambda.
using RingElement = std::uint64_t;

// The ring Z_{2^bits}, 1 <= bits <= 64. Arithmetic is done on the 64-bit
// machine word and wraps implicitly; the mask is a no-op at 64 bits and only
// matters for the narrow rings used in exhaustive tests.
class Ring {
 public:
  constexpr Ring() : Ring(64) {}
  explicit constexpr Ring(unsigned bits)
      : bits_(bits), mask_(bits >= 64 ? ~std::uint64_t{0}
                                      : (std::uint64_t{1} << bits) - 1) {
    if (bits < 1 || bits > 64) {
      throw Error(ErrorCode::kArgument,
                  "ring bit-width must be in [1, 64], got " +
                      std::to_string(bits));
    }
  }

  constexpr unsigned bits() const { return bits_; }
  constexpr std::uint64_t mask() const { return mask_; }

  constexpr RingElement reduce(std::uint64_t v) const { return v & mask_; }
  constexpr RingElement add(RingElement x, RingElement y) const {
    return (x + y) & mask_;
  }
  constexpr RingElement sub(RingElement x, RingElement y) const {
    return (x - y) & mask_;
  }
  constexpr RingElement mul(RingElement x, RingElement y) const {
    return (x * y) & mask_;
  }
  constexpr RingElement neg(RingElement x) const { return (0 - x) & mask_; }

  constexpr bool msb(RingElement x) const { return (x >> (bits_ - 1)) & 1; }

  // Two's-complement interpretation of x as a signed bits-wide integer.
  constexpr std::int64_t to_signed(RingElement x) const {
    if (bits_ == 64) return static_cast<std::int64_t>(x);
    return msb(x) ? static_cast<std::int64_t>(x) -
                        static_cast<std::int64_t>(mask_) - 1
                  : static_cast<std::int64_t>(x);
  }
  constexpr RingElement from_signed(std::int64_t v) const {
    return static_cast<std::uint64_t>(v) & mask_;
  }

  friend constexpr bool operator==(const Ring&, const Ring&) = default;

 private:
  unsigned bits_;
  std::uint64_t mask_;
};

}  // namespace sslr

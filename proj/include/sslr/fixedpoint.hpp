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

#include <cmath>
#include <cstdint>
#include <string>

#include "sslr/error.hpp"
#include "sslr/ring.hpp"
#include "sslr/role.hpp"

namespace sslr {

// Fixed-point layout inside Z_{2^lambda}: the low `frac_bits` bits hold the
// fraction, the next `int_bits` the integer part, the rest replicate the sign.
struct FixedPointParams {
  unsigned frac_bits = 12;   // a
  unsigned int_bits = 15;    // b
  unsigned ring_bits = 64;   // lambda

  Ring ring() const { return Ring(ring_bits); }

  // Number of low bits the activation decomposes: a + b + 2.
  unsigned activation_bits() const { return frac_bits + int_bits + 2; }

  void validate() const {
    const auto bad = [&](const std::string& why) {
      fail(ErrorCode::kArgument,
           "invalid fixed-point parameters (a=" + std::to_string(frac_bits) +
               ", b=" + std::to_string(int_bits) +
               ", lambda=" + std::to_string(ring_bits) + "): " + why);
    };
    if (ring_bits != 8 && ring_bits != 16 && ring_bits != 32 && ring_bits != 64)
      bad("lambda must be one of 8, 16, 32, 64");
    if (frac_bits < 1 || int_bits < 1) bad("a and b must be at least 1");
    if (ring_bits < 2 * (frac_bits + int_bits)) bad("lambda must be >= 2(a+b)");
    if (frac_bits + int_bits + 2 > ring_bits) bad("a+b+2 must not exceed lambda");
  }

  friend bool operator==(const FixedPointParams&,
                         const FixedPointParams&) = default;
};

// Q(x): floor(2^a |x|), negated in two's complement for x < 0.
inline RingElement encode(double x, const FixedPointParams& p) {
  const Ring ring = p.ring();
  const double bound = std::ldexp(1.0, static_cast<int>(p.int_bits));
  if (!(std::fabs(x) < bound)) {
    fail(ErrorCode::kArgument, "value " + std::to_string(x) +
                                   " outside the representable range |x| < 2^" +
                                   std::to_string(p.int_bits));
  }
  const auto magnitude = static_cast<std::uint64_t>(
      std::floor(std::ldexp(std::fabs(x), static_cast<int>(p.frac_bits))));
  return x < 0 ? ring.neg(magnitude) : ring.reduce(magnitude);
}

// Inverse of encode on the grid. The MSB is the sign; values whose integer
// field overflows b bits are still decoded arithmetically.
inline double decode(RingElement v, const FixedPointParams& p) {
  const Ring ring = p.ring();
  return std::ldexp(static_cast<double>(ring.to_signed(ring.reduce(v))),
                    -static_cast<int>(p.frac_bits));
}

// Exact floor(z / 2^shift) of the signed value z (arithmetic shift).
inline RingElement truncate_exact(RingElement z, const Ring& ring,
                                  unsigned shift) {
  return ring.from_signed(ring.to_signed(z) >> shift);
}

// Local share truncation. A floors its share; B floors the negation of its
// share and negates back. The opened result is floor(z/2^shift) or one more,
// except when A's share falls in a window of |z| values next to zero, in
// which case the result is off by 2^(lambda-shift).
inline RingElement truncate_share(RingElement s, Role role, const Ring& ring,
                                  unsigned shift) {
  s = ring.reduce(s);
  if (role == Role::A) return s >> shift;
  return ring.neg(ring.neg(s) >> shift);
}

inline RingShare truncate_share(RingShare s, const FixedPointParams& p) {
  return {truncate_share(s.value, s.role, p.ring(), p.frac_bits), s.role};
}

}  // namespace sslr

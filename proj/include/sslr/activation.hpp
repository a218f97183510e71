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
#include <vector>

#include "sslr/bitops.hpp"
#include "sslr/engine.hpp"
#include "sslr/fixedpoint.hpp"
#include "sslr/sharing.hpp"

namespace sslr {

// Clipped ReLU on the fixed-point grid, evaluated on the decoded value v:
// 0 for v < -1/2, v + 1/2 for -1/2 <= v < 1/2, 1 for v >= 1/2.
inline RingElement rho_fixed(RingElement z, const FixedPointParams& p) {
  const Ring ring = p.ring();
  const std::int64_t half = std::int64_t{1} << (p.frac_bits - 1);
  const std::int64_t one = std::int64_t{1} << p.frac_bits;
  const std::int64_t v = ring.to_signed(z);
  if (v < -half) return 0;
  if (v >= one - half) return ring.reduce(static_cast<std::uint64_t>(one));
  return ring.from_signed(v + half);
}

// The same function as the secure protocol computes it, from the bits of
// z' = z + 2^(a-1) masked to a+b+2 bits: bit a+b is the sign and the OR of
// bits a..a+b-1 says z' >= 1. Equals rho_fixed while |z'| < 2^(a+b).
inline RingElement rho_bits(RingElement z, const FixedPointParams& p) {
  const Ring ring = p.ring();
  const unsigned a = p.frac_bits, b = p.int_bits;
  const RingElement zp = ring.add(z, RingElement{1} << (a - 1));
  const RingElement low = zp & detail::low_mask(a + b + 2);
  const bool sign = (low >> (a + b)) & 1;
  const bool geq1 = ((low >> a) & detail::low_mask(b)) != 0;
  if (sign) return 0;
  return geq1 ? ring.reduce(RingElement{1} << a) : zp;
}

// This party's shares of the protocol's intermediate values, per element.
struct ActivationIntermediates {
  std::vector<RingElement> pos;
  std::vector<std::uint64_t> pos_bits;   // packed Z_2 shares
  std::vector<std::uint64_t> geq1_bits;  // packed Z_2 shares
  std::vector<RingElement> geq1;
  std::vector<RingElement> r;
};

// Rounds: decomposition (depth + 1), OR tree ceil(log2 b), re-share and
// convert (2), then t = geq1 z' and pos r (1 each).
inline std::vector<RingElement> batch_activate(Session& s, std::span<const RingElement> z,
                                               ActivationIntermediates* inter = nullptr) {
  const FixedPointParams& fp = s.params();
  const Ring& ring = s.ring();
  const unsigned a = fp.frac_bits, b = fp.int_bits, p = a + b + 2;
  const std::size_t n = z.size();
  const std::size_t nw = words_for_bits(n);
  const std::uint64_t one = s.is_a() ? ~std::uint64_t{0} : 0;

  std::vector<RingElement> zp(n);
  const RingElement half = s.is_a() ? RingElement{1} << (a - 1) : 0;
  for (std::size_t i = 0; i < n; ++i) zp[i] = ring.add(z[i], half);

  const BitSlices bits = decompose_sliced(s, zp, p);
  std::vector<std::uint64_t> pos_bits(nw);
  for (std::size_t w = 0; w < nw; ++w) pos_bits[w] = bits[a + b][w] ^ one;
  detail::clear_tail(pos_bits, n);
  const auto geq1_bits =
      or_tree_sliced(s, BitSlices(bits.begin() + a, bits.begin() + a + b), n);

  // Convert pos (lanes 0..n-1) and geq1 (lanes n..2n-1) together.
  std::vector<std::uint64_t> both(words_for_bits(2 * n), 0);
  for (std::size_t i = 0; i < n; ++i) {
    both[i / 64] |= ((pos_bits[i / 64] >> (i % 64)) & 1) << (i % 64);
    const std::size_t j = n + i;
    both[j / 64] |= ((geq1_bits[i / 64] >> (i % 64)) & 1) << (j % 64);
  }
  const auto conv = convert_2_to_ring(s, both, 2 * n);
  const std::span<const RingElement> pos(conv.data(), n);
  const std::span<const RingElement> geq1(conv.data() + n, n);

  // r = 2^a geq1 + (1 - geq1) z'
  const auto t = batch_mul(s, geq1, zp);
  std::vector<RingElement> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = ring.reduce((geq1[i] << a) + zp[i] - t[i]);
  }
  auto out = batch_mul(s, pos, r);
  if (inter) {
    inter->pos.assign(pos.begin(), pos.end());
    inter->pos_bits = pos_bits;
    inter->geq1_bits = geq1_bits;
    inter->geq1.assign(geq1.begin(), geq1.end());
    inter->r = r;
  }
  return out;
}

inline ShareVector batch_activate(Session& s, const ShareVector& z) {
  return {s.role(), batch_activate(s, std::span<const RingElement>(z.values))};
}

inline RingShare activate(Session& s, const RingShare& z) {
  const RingElement v = z.value;
  return {batch_activate(s, std::span(&v, 1))[0], s.role()};
}

// Rounds taken by one (batched) activation.
inline std::size_t activation_rounds(const FixedPointParams& fp) {
  const unsigned p = fp.activation_bits();
  return plan_composenet(p).depth() + 1 + detail::ceil_log2(fp.int_bits) + 4;
}

}  // namespace sslr

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
#include <vector>

#include "sslr/bits.hpp"
#include "sslr/composenet.hpp"
#include "sslr/engine.hpp"
#include "sslr/error.hpp"
#include "sslr/randomness.hpp"
#include "sslr/sharing.hpp"

namespace sslr {

// A party's XOR shares in bit-sliced form: slices[j][w] packs bit j of
// elements 64w..64w+63. All bit vectors here are LSB first.
using BitSlices = std::vector<std::vector<std::uint64_t>>;

// Per-node (propagate, generate) shares, for inspecting a decomposition.
struct CarryTrace {
  std::vector<std::vector<std::uint64_t>> p;
  std::vector<std::vector<std::uint64_t>> g;
};

namespace detail {

inline void check_bits(const Session& s, unsigned p) {
  if (p < 1 || p > s.ring().bits()) {
    fail(ErrorCode::kArgument, "cannot decompose " + std::to_string(p) + " bits of a " +
                                   std::to_string(s.ring().bits()) + "-bit ring");
  }
}

inline std::uint64_t low_mask(unsigned p) {
  return p >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << p) - 1;
}

// Sets the unused lanes of the last word to zero.
inline void clear_tail(std::span<std::uint64_t> words, std::size_t lanes) {
  if (lanes % 64 != 0 && !words.empty()) words.back() &= (std::uint64_t{1} << (lanes % 64)) - 1;
}

inline std::vector<std::uint64_t> concat(const BitSlices& parts) {
  std::vector<std::uint64_t> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Reference decomposition: ripple carry, two rounds per bit after the first.
//   c_1 = a_1 b_1,  d_i = a_i b_i + 1,  e_i = y_i c_{i-1} + 1,
//   c_i = e_i d_i + 1,  x_1 = y_1,  x_i = y_i + c_{i-1}
// with y_i = a_i + b_i shared as (a_i, b_i), a_i as (a_i, 0), b_i as (0, b_i).

inline BitSlices decompose_ripple_sliced(Session& s, std::span<const RingElement> x, unsigned p) {
  detail::check_bits(s, p);
  const std::size_t n = x.size();
  const std::size_t nw = words_for_bits(n);
  const BitSlices y = to_bit_slices(x, p);
  const bool a = s.is_a();
  const std::uint64_t one = a ? ~std::uint64_t{0} : 0;

  // First round: a_i * b_i for every i, which yields c_1 and all d_i.
  std::vector<std::uint64_t> xa(p * nw, 0), xb(p * nw, 0);
  for (unsigned i = 0; i < p; ++i) {
    std::copy(y[i].begin(), y[i].end(), (a ? xa : xb).begin() + i * nw);
  }
  const auto ab = batch_and(s, xa, xb, p * n);

  BitSlices out(p, std::vector<std::uint64_t>(nw));
  std::vector<std::uint64_t> c(ab.begin(), ab.begin() + static_cast<std::ptrdiff_t>(nw));
  out[0] = y[0];
  for (unsigned i = 1; i < p; ++i) {
    std::vector<std::uint64_t> d(nw), e;
    for (std::size_t w = 0; w < nw; ++w) {
      d[w] = ab[i * nw + w] ^ one;
      out[i][w] = y[i][w] ^ c[w];
    }
    e = batch_and(s, y[i], c, n);
    for (auto& v : e) v ^= one;
    c = batch_and(s, e, d, n);
    for (auto& v : c) v ^= one;
  }
  for (auto& sl : out) detail::clear_tail(sl, n);
  return out;
}

inline BitVectorShare decompose_ripple(Session& s, const RingShare& x) {
  const RingElement v = x.value;
  const auto sl = decompose_ripple_sliced(s, std::span(&v, 1), s.ring().bits());
  BitVectorShare out{s.role(), BitVector(sl.size())};
  for (std::size_t j = 0; j < sl.size(); ++j) out.bits.set(j, sl[j][0] & 1);
  return out;
}

// ---------------------------------------------------------------------------
// Carry composition: (p, g) of the upper block composed onto the lower one,
//   p_out = p_up p_lo,  g_out = p_up g_lo + g_up.
// p and g are never both 1, so the OR of the carry rule is an XOR.

struct CarrySignalPair {
  BitShare p;
  BitShare g;
};

// Both products go in one batched Z_2 multiplication: lane 0 is p_up*p_lo,
// lane 1 is p_up*g_lo.
inline CarrySignalPair compose_carry(Session& s, const CarrySignalPair& upper,
                                     const CarrySignalPair& lower) {
  const std::uint64_t pu = upper.p.bit ? 3 : 0;
  const std::uint64_t lo = std::uint64_t{lower.p.bit} | (std::uint64_t{lower.g.bit} << 1);
  const auto z = batch_and(s, std::span(&pu, 1), std::span(&lo, 1), 2);
  return {{static_cast<bool>(z[0] & 1), s.role()},
          {static_cast<bool>(((z[0] >> 1) & 1) ^ upper.g.bit), s.role()}};
}

// ---------------------------------------------------------------------------
// Logarithmic decomposition of the low p bits through the composition network.
// Round 1 computes every g_j = a_j b_j; each network layer is one more round,
// in which the masked (p, g) of the nodes created in the previous layer are
// opened and the layer's compositions are evaluated locally against the
// dealer's mask products. Every round is batched over all elements.

inline BitSlices decompose_sliced(Session& s, std::span<const RingElement> x, unsigned p,
                                  CarryTrace* trace = nullptr) {
  detail::check_bits(s, p);
  const std::size_t n = x.size();
  const std::size_t nw = words_for_bits(n);
  const bool a = s.is_a();
  const std::uint64_t amask = a ? ~std::uint64_t{0} : 0;

  std::vector<RingElement> masked(x.begin(), x.end());
  for (auto& v : masked) v &= detail::low_mask(p);
  BitSlices y = to_bit_slices(masked, p);
  if (p == 1) {
    detail::clear_tail(y[0], n);
    return y;
  }

  // Setup: g_j = (a_j, 0) * (0, b_j).
  std::vector<std::uint64_t> lhs(p * nw, 0), rhs(p * nw, 0);
  for (unsigned j = 0; j < p; ++j) {
    std::copy(y[j].begin(), y[j].end(), (a ? lhs : rhs).begin() + j * nw);
  }
  const auto g0 = batch_and(s, lhs, rhs, p * n);

  const CompositionSchedule& sched = detail::cached_schedule(p);
  const std::size_t nodes = sched.nodes().size();
  BitSlices P(nodes), G(nodes), Po(nodes), Go(nodes);
  for (unsigned j = 0; j < sched.leaves(); ++j) {
    P[j] = y[j];
    G[j].assign(g0.begin() + j * nw, g0.begin() + (j + 1) * nw);
  }

  const std::size_t uw = sched.unit_words();
  const auto masks = s.take(TagKey::compose_net(p), nw);
  const auto mask = [&](std::uint32_t node, int which, std::size_t w) {
    return masks[w * uw + 2 * sched.mask_slot(node) + which];
  };

  std::size_t comp_index = 0;
  const std::size_t comp_base = 2 * sched.masked_node_count();
  for (std::size_t layer = 0; layer < sched.depth(); ++layer) {
    const auto& pub = sched.published()[layer];
    OutFrame out(MsgType::kOpenBits, 2 * pub.size() * nw);
    auto pay = out.payload();
    for (std::size_t k = 0; k < pub.size(); ++k) {
      for (std::size_t w = 0; w < nw; ++w) {
        pay[(2 * k) * nw + w] = P[pub[k]][w] ^ mask(pub[k], 0, w);
        pay[(2 * k + 1) * nw + w] = G[pub[k]][w] ^ mask(pub[k], 1, w);
      }
    }
    const auto in = s.exchange(out);
    for (std::size_t k = 0; k < pub.size(); ++k) {
      auto& po = Po[pub[k]];
      auto& go = Go[pub[k]];
      po.resize(nw);
      go.resize(nw);
      for (std::size_t w = 0; w < nw; ++w) {
        po[w] = pay[(2 * k) * nw + w] ^ in[(2 * k) * nw + w];
        go[w] = pay[(2 * k + 1) * nw + w] ^ in[(2 * k + 1) * nw + w];
      }
    }
    const auto& comps = sched.layers()[layer];
    s.pool().parallel_for(comps.size(), 4, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t ci = lo; ci < hi; ++ci) {
        const Composition& c = comps[ci];
        const std::size_t at = comp_base + 2 * (comp_index + ci);
        std::vector<std::uint64_t> po(nw), go(nw);
        for (std::size_t w = 0; w < nw; ++w) {
          const std::uint64_t pu = Po[c.upper][w], pl = Po[c.lower][w], gl = Go[c.lower][w];
          const std::uint64_t mpu = mask(c.upper, 0, w);
          po[w] = (pu & pl & amask) ^ (pu & mask(c.lower, 0, w)) ^ (pl & mpu) ^ masks[w * uw + at];
          go[w] = (pu & gl & amask) ^ (pu & mask(c.lower, 1, w)) ^ (gl & mpu) ^
                  masks[w * uw + at + 1] ^ G[c.upper][w];
        }
        P[c.out] = std::move(po);
        G[c.out] = std::move(go);
      }
    });
    comp_index += comps.size();
    s.transcript().bit_mults += 2 * comps.size() * n;
  }

  BitSlices out(p, std::vector<std::uint64_t>(nw));
  out[0] = y[0];
  for (unsigned j = 1; j < p; ++j) {
    const auto& carry = G[sched.solution()[j - 1]];
    for (std::size_t w = 0; w < nw; ++w) out[j][w] = y[j][w] ^ carry[w];
  }
  for (auto& sl : out) detail::clear_tail(sl, n);
  if (trace) {
    trace->p = std::move(P);
    trace->g = std::move(G);
  }
  return out;
}

inline std::vector<BitVectorShare> batch_decompose(Session& s, const ShareVector& x, unsigned p) {
  const auto sl = decompose_sliced(s, x.values, p);
  std::vector<BitVectorShare> out(x.values.size(), BitVectorShare{s.role(), BitVector(p)});
  const auto packed = from_bit_slices(sl, x.values.size());
  for (std::size_t i = 0; i < packed.size(); ++i) out[i].bits.words()[0] = packed[i];
  return out;
}

inline BitVectorShare decompose_opt(Session& s, const RingShare& x, unsigned p) {
  return batch_decompose(s, ShareVector{s.role(), {x.value}}, p)[0];
}

// ---------------------------------------------------------------------------
// OR of k shared bits per lane as NOT(AND of NOTs), one batched round per
// level of a balanced tree: ceil(log2 k) rounds.

inline std::vector<std::uint64_t> or_tree_sliced(Session& s, BitSlices bits, std::size_t lanes) {
  if (bits.empty()) fail(ErrorCode::kArgument, "or_tree needs at least one bit");
  const std::uint64_t one = s.is_a() ? ~std::uint64_t{0} : 0;
  const std::size_t nw = bits[0].size();
  for (auto& sl : bits) {
    for (auto& w : sl) w ^= one;
  }
  while (bits.size() > 1) {
    const std::size_t pairs = bits.size() / 2;
    std::vector<std::uint64_t> lhs, rhs;
    lhs.reserve(pairs * nw);
    rhs.reserve(pairs * nw);
    for (std::size_t i = 0; i < pairs; ++i) {
      lhs.insert(lhs.end(), bits[2 * i].begin(), bits[2 * i].end());
      rhs.insert(rhs.end(), bits[2 * i + 1].begin(), bits[2 * i + 1].end());
    }
    const auto z = batch_and(s, lhs, rhs, pairs * lanes);
    BitSlices next;
    for (std::size_t i = 0; i < pairs; ++i) {
      next.emplace_back(z.begin() + i * nw, z.begin() + (i + 1) * nw);
    }
    if (bits.size() % 2) next.push_back(std::move(bits.back()));
    bits = std::move(next);
  }
  auto out = std::move(bits[0]);
  for (auto& w : out) w ^= one;
  detail::clear_tail(out, lanes);
  return out;
}

inline BitShare or_tree(Session& s, const BitVectorShare& bits) {
  BitSlices sl;
  for (std::size_t j = 0; j < bits.bits.size(); ++j) sl.push_back({std::uint64_t{bits.bits.get(j)}});
  return {static_cast<bool>(or_tree_sliced(s, std::move(sl), 1)[0] & 1), s.role()};
}

// ---------------------------------------------------------------------------
// Z_2 -> Z_{2^lambda}: each party re-shares its own bit (one round), then
// z = x_A + x_B - 2 x_A x_B with one batched ring multiplication.

inline std::vector<RingElement> convert_2_to_ring(Session& s, std::span<const std::uint64_t> packed,
                                                  std::size_t count) {
  if (packed.size() < words_for_bits(count)) {
    fail(ErrorCode::kArgument, "convert_2_to_ring: too few words for the bit count");
  }
  const Ring& ring = s.ring();
  std::vector<RingElement> keep(count);
  OutFrame out(MsgType::kReshare, count);
  auto pay = out.payload();
  for (std::size_t i = 0; i < count; ++i) {
    const RingElement bit = (packed[i / 64] >> (i % 64)) & 1;
    keep[i] = ring.reduce(s.prg()());
    pay[i] = ring.sub(bit, keep[i]);
  }
  const auto in = s.exchange(out);
  // [x_A] and [x_B] as this party's shares.
  std::vector<RingElement> xa(count), xb(count);
  for (std::size_t i = 0; i < count; ++i) {
    xa[i] = s.is_a() ? keep[i] : ring.reduce(in[i]);
    xb[i] = s.is_a() ? ring.reduce(in[i]) : keep[i];
  }
  const auto y = batch_mul(s, xa, xb, TagKey::conversion());
  std::vector<RingElement> z(count);
  for (std::size_t i = 0; i < count; ++i) z[i] = ring.sub(ring.add(xa[i], xb[i]), 2 * y[i]);
  return z;
}

inline RingShare convert_2_to_ring(Session& s, const BitShare& x) {
  const std::uint64_t w = x.bit;
  return {convert_2_to_ring(s, std::span(&w, 1), 1)[0], s.role()};
}

}  // namespace sslr

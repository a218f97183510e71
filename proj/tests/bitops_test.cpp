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

#include <gtest/gtest.h>

#include <cstdint>
#include <map>

#include "sslr/bitops.hpp"
#include "sslr/local.hpp"
#include "test_util.hpp"

namespace sslr {
namespace {

using testing::cspan;

const RunSeeds kSeeds = derive_run_seeds(31);

// Bits of x (low p), LSB first, straight from the integer.
std::vector<bool> plain_bits(RingElement x, unsigned p) {
  std::vector<bool> out(p);
  for (unsigned j = 0; j < p; ++j) out[j] = (x >> j) & 1;
  return out;
}

// XOR-combines both parties' slices and reads element i.
RingElement open_slices(const BitSlices& a, const BitSlices& b, std::size_t i) {
  RingElement v = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    v |= RingElement{((a[j][i / 64] ^ b[j][i / 64]) >> (i % 64)) & 1} << j;
  }
  return v;
}

enum class Algo { kRipple, kOpt };

LocalRun<BitSlices> run_decompose(const FixedPointParams& fp, Algo algo,
                                  const std::vector<RingElement>& xa,
                                  const std::vector<RingElement>& xb, unsigned p) {
  return run_local(fp, kSeeds, [&](Session& s) {
    const auto& mine = s.is_a() ? xa : xb;
    return algo == Algo::kRipple ? decompose_ripple_sliced(s, mine, p)
                                 : decompose_sliced(s, mine, p);
  });
}

TEST(Decompose, HandExampleLambda4) {
  // 7 + 6 = 13 = 1101b, LSB first 1,0,1,1.
  const auto fp = testing::ring_only(4);
  const auto r = run_local(fp, kSeeds, [&](Session& s) {
    const RingShare x{s.is_a() ? 7u : 6u, s.role()};
    return std::pair{decompose_ripple(s, x), decompose_opt(s, x, 4)};
  });
  const BitVector ripple = open(r.a.first, r.b.first), opt = open(r.a.second, r.b.second);
  for (unsigned j = 0; j < 4; ++j) {
    EXPECT_EQ(ripple.get(j), plain_bits(13, 4)[j]) << j;
    EXPECT_EQ(opt.get(j), plain_bits(13, 4)[j]) << j;
  }
}

TEST(Decompose, ZeroShareOfBIsIdentity) {
  const auto fp = testing::ring_only(8);
  for (RingElement x : {0u, 1u, 0x80u, 0xffu, 0x5au}) {
    const std::vector<RingElement> xa = {x}, xb = {0};
    for (Algo algo : {Algo::kRipple, Algo::kOpt}) {
      const auto r = run_decompose(fp, algo, xa, xb, 8);
      EXPECT_EQ(open_slices(r.a, r.b, 0), x);
    }
  }
}

// Every (share_A, share_B) pair of a small ring, both algorithms.
TEST(Decompose, ExhaustiveSmallRings) {
  for (unsigned lambda : {5u, 6u}) {
    const auto fp = testing::ring_only(lambda);
    const RingElement m = RingElement{1} << lambda;
    std::vector<RingElement> xa, xb;
    for (RingElement u = 0; u < m; ++u) {
      for (RingElement v = 0; v < m; ++v) {
        xa.push_back(u);
        xb.push_back(v);
      }
    }
    for (Algo algo : {Algo::kRipple, Algo::kOpt}) {
      const auto r = run_decompose(fp, algo, xa, xb, lambda);
      for (std::size_t i = 0; i < xa.size(); ++i) {
        ASSERT_EQ(open_slices(r.a, r.b, i), (xa[i] + xb[i]) & (m - 1))
            << "lambda " << lambda << " algo " << int(algo) << " i " << i;
      }
    }
  }
}

TEST(Decompose, RandomFullWidth) {
  const FixedPointParams fp;
  auto prg = testing::make_prg(41);
  std::vector<RingElement> xa(10000), xb(10000);
  for (auto& v : xa) v = prg();
  for (auto& v : xb) v = prg();
  for (Algo algo : {Algo::kRipple, Algo::kOpt}) {
    const auto r = run_decompose(fp, algo, xa, xb, 64);
    for (std::size_t i = 0; i < xa.size(); ++i) ASSERT_EQ(open_slices(r.a, r.b, i), xa[i] + xb[i]);
  }
}

TEST(Decompose, PartialWidthReturnsLowBits) {
  const FixedPointParams fp;
  auto prg = testing::make_prg(42);
  std::vector<RingElement> xa(500), xb(500);
  for (auto& v : xa) v = prg();
  for (auto& v : xb) v = prg();
  for (unsigned p : {1u, 2u, 3u, 17u, 29u, 63u}) {
    for (Algo algo : {Algo::kRipple, Algo::kOpt}) {
      const auto r = run_decompose(fp, algo, xa, xb, p);
      ASSERT_EQ(r.a.size(), p);
      const RingElement mask = (RingElement{1} << p) - 1;
      for (std::size_t i = 0; i < xa.size(); ++i) {
        ASSERT_EQ(open_slices(r.a, r.b, i), (xa[i] + xb[i]) & mask) << p;
      }
    }
  }
}

TEST(Decompose, RoundCounts) {
  const FixedPointParams fp;
  const std::map<unsigned, std::size_t> opt_rounds = {{8, 4}, {16, 5}, {17, 5}, {29, 6}, {64, 7}};
  auto prg = testing::make_prg(43);
  for (auto [p, expected] : opt_rounds) {
    EXPECT_EQ(expected, plan_composenet(p).depth() + 1) << p;
    for (std::size_t n : {1u, 256u, 2048u}) {
      std::vector<RingElement> xa(n), xb(n);
      for (auto& v : xa) v = prg();
      for (auto& v : xb) v = prg();
      const auto opt = run_decompose(fp, Algo::kOpt, xa, xb, p);
      EXPECT_EQ(opt.transcript_a.rounds, expected) << "p " << p << " n " << n;
      const auto ripple = run_decompose(fp, Algo::kRipple, xa, xb, p);
      EXPECT_EQ(ripple.transcript_a.rounds, 2 * p - 1) << "p " << p << " n " << n;
    }
  }
}

TEST(Decompose, OpenedWordsMatchSchedule) {
  const FixedPointParams fp;
  auto prg = testing::make_prg(44);
  for (unsigned p : {8u, 29u, 64u}) {
    const auto& sched = plan_composenet(p);
    std::vector<RingElement> xa(64), xb(64);
    for (auto& v : xa) v = prg();
    for (auto& v : xb) v = prg();
    const auto r = run_decompose(fp, Algo::kOpt, xa, xb, p);
    // One word carries 64 lanes, so words received equal bits per element.
    EXPECT_EQ(r.transcript_a.opened_words, 2 * p + 2 * sched.masked_node_count());
    EXPECT_EQ(r.transcript_a.opened_words, sched.opened_bits_per_element());
  }
  EXPECT_EQ(plan_composenet(64).opened_bits_per_element(), 524u);
}

TEST(Decompose, MultiplicationCounts) {
  const FixedPointParams fp;
  std::vector<RingElement> xa(100, 3), xb(100, 9);
  const auto opt = run_decompose(fp, Algo::kOpt, xa, xb, 64);
  EXPECT_EQ(opt.transcript_a.bit_mults, 100 * (64 + 2 * plan_composenet(64).composition_count()));
  const auto ripple = run_decompose(fp, Algo::kRipple, xa, xb, 64);
  EXPECT_EQ(ripple.transcript_a.bit_mults, 100u * (64 + 2 * 63));
  EXPECT_EQ(opt.transcript_a.ring_mults, 0u);
}

TEST(Decompose, WidthAboveRingIsRejected) {
  const auto fp = testing::ring_only(16);
  for (Algo algo : {Algo::kRipple, Algo::kOpt}) {
    try {
      run_decompose(fp, algo, {1}, {2}, 17);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kArgument);
    }
  }
  try {
    run_decompose(fp, Algo::kOpt, {1}, {2}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kArgument);
  }
}

TEST(Decompose, PropagateAndGenerateNeverBothSet) {
  const FixedPointParams fp;
  auto prg = testing::make_prg(45);
  std::vector<RingElement> xa(640), xb(640);
  for (auto& v : xa) v = prg();
  for (std::size_t i = 0; i < xb.size(); ++i) xb[i] = i % 3 == 0 ? ~xa[i] : prg();
  const auto r = run_local(fp, kSeeds, [&](Session& s) {
    CarryTrace t;
    decompose_sliced(s, s.is_a() ? xa : xb, 64, &t);
    return t;
  });
  ASSERT_EQ(r.a.p.size(), plan_composenet(64).nodes().size());
  for (std::size_t node = 0; node < r.a.p.size(); ++node) {
    for (std::size_t w = 0; w < r.a.p[node].size(); ++w) {
      const std::uint64_t p = r.a.p[node][w] ^ r.b.p[node][w];
      const std::uint64_t g = r.a.g[node][w] ^ r.b.g[node][w];
      ASSERT_EQ(p & g, 0u) << "node " << node;
    }
  }
}

TEST(Decompose, BatchAndSingleAgree) {
  const FixedPointParams fp;
  const auto r = run_local(fp, kSeeds, [&](Session& s) {
    const ShareVector v{s.role(), {s.is_a() ? RingElement{100} : RingElement{23}, s.is_a() ? RingElement{5} : ~RingElement{4}}};
    return batch_decompose(s, v, 64);
  });
  ASSERT_EQ(r.a.size(), 2u);
  EXPECT_EQ(open(r.a[0], r.b[0]).words()[0], 123u);
  EXPECT_EQ(open(r.a[1], r.b[1]).words()[0], 0u);  // 5 + ~4 wraps to 0
}

TEST(ComposeCarry, TruthTable) {
  const FixedPointParams fp;
  // (p, g) pairs that can occur: never both 1.
  const std::pair<bool, bool> valid[] = {{false, false}, {true, false}, {false, true}};
  for (auto [pu, gu] : valid) {
    for (auto [pl, gl] : valid) {
      const auto r = run_local(fp, kSeeds, [&](Session& s) {
        // A holds the secret, B holds zeros.
        const bool a = s.is_a();
        return compose_carry(s, {{a && pu, s.role()}, {a && gu, s.role()}},
                             {{a && pl, s.role()}, {a && gl, s.role()}});
      });
      EXPECT_EQ(open(r.a.p, r.b.p), pu && pl);
      EXPECT_EQ(open(r.a.g, r.b.g), (pu && gl) || gu);
      EXPECT_EQ(r.transcript_a.rounds, 1u);
    }
  }
}

TEST(OrTree, Cases) {
  const FixedPointParams fp;
  const std::vector<std::vector<bool>> cases = {
      {false}, {true}, {false, false, false}, {false, true, false},
      {true, true, true, true, true}, std::vector<bool>(17, false)};
  for (const auto& bits : cases) {
    const auto r = run_local(fp, kSeeds, [&](Session& s) {
      BitVectorShare v{s.role(), BitVector(bits.size())};
      // Share each bit as (1, b ^ 1).
      for (std::size_t j = 0; j < bits.size(); ++j) v.bits.set(j, s.is_a() ? true : !bits[j]);
      return or_tree(s, v);
    });
    bool expect = false;
    for (bool b : bits) expect = expect || b;
    EXPECT_EQ(open(r.a, r.b), expect);
    std::size_t rounds = 0;
    while ((std::size_t{1} << rounds) < bits.size()) ++rounds;
    EXPECT_EQ(r.transcript_a.rounds, rounds) << bits.size();
  }
}

TEST(OrTree, EmptyIsRejected) {
  const FixedPointParams fp;
  EXPECT_THROW(run_local(fp, kSeeds,
                         [&](Session& s) { return or_tree(s, {s.role(), BitVector(0)}).bit; }),
               Error);
}

TEST(Convert, BitToRing) {
  for (unsigned lambda : {16u, 64u}) {
    const auto fp = testing::ring_only(lambda);
    for (bool ba : {false, true}) {
      for (bool bb : {false, true}) {
        const auto r = run_local(fp, kSeeds, [&](Session& s) {
          return convert_2_to_ring(s, BitShare{s.is_a() ? ba : bb, s.role()});
        });
        EXPECT_EQ(Ring(lambda).add(r.a.value, r.b.value), RingElement{ba != bb});
        EXPECT_EQ(r.transcript_a.rounds, 2u);
        EXPECT_EQ(r.transcript_a.ring_mults, 1u);
      }
    }
  }
}

TEST(Convert, PackedBatch) {
  const FixedPointParams fp;
  auto prg = testing::make_prg(46);
  const std::size_t n = 1000;
  std::vector<std::uint64_t> wa(words_for_bits(n)), wb(words_for_bits(n));
  for (auto& w : wa) w = prg();
  for (auto& w : wb) w = prg();
  const auto r = run_local(fp, kSeeds, [&](Session& s) {
    return convert_2_to_ring(s, s.is_a() ? wa : wb, n);
  });
  for (std::size_t i = 0; i < n; ++i) {
    const RingElement bit = ((wa[i / 64] ^ wb[i / 64]) >> (i % 64)) & 1;
    ASSERT_EQ(r.a[i] + r.b[i], bit);
  }
  EXPECT_EQ(r.transcript_a.rounds, 2u);
}

TEST(Convert, TooFewWordsIsRejected) {
  const FixedPointParams fp;
  EXPECT_THROW(run_local(fp, kSeeds,
                         [&](Session& s) {
                           const std::vector<std::uint64_t> w(1);
                           return convert_2_to_ring(s, w, 65);
                         }),
               Error);
}

}  // namespace
}  // namespace sslr

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

#include <cmath>
#include <cstdint>
#include <set>

#include "sslr/composenet.hpp"
#include "test_util.hpp"

namespace sslr {
namespace {

unsigned ceil_log2(unsigned n) {
  unsigned k = 0;
  while ((1u << k) < n) ++k;
  return k;
}

// Closed-form data transfer for power-of-two p: 4p setup bits plus two bits
// per fresh mask, with p/2 + 1 - 2^(i-1) fresh masks at layer i.
std::size_t formula_bits(unsigned p) {
  std::size_t sum = 0;
  for (unsigned i = 1; i + 1 <= ceil_log2(p - 1); ++i) sum += p / 2 + 1 - (1u << (i - 1));
  return 4 * std::size_t{p} + 2 * sum;
}

TEST(ComposeNet, Depth) {
  for (unsigned p = 3; p <= 64; ++p) {
    EXPECT_EQ(plan_composenet(p).depth(), ceil_log2(p - 1)) << p;
  }
  EXPECT_EQ(plan_composenet(64).depth(), 6u);
  EXPECT_EQ(plan_composenet(17).depth(), 4u);
  EXPECT_EQ(plan_composenet(29).depth(), 5u);
}

TEST(ComposeNet, TwoBitsNeedNoCompositions) {
  const auto s = plan_composenet(2);
  EXPECT_EQ(s.depth(), 0u);
  EXPECT_EQ(s.composition_count(), 0u);
  EXPECT_EQ(s.unit_words(), 0u);
  ASSERT_EQ(s.solution().size(), 1u);
  EXPECT_EQ(s.nodes()[s.solution()[0]].first, 0u);
  EXPECT_EQ(s.nodes()[s.solution()[0]].last, 0u);
  EXPECT_EQ(s.opened_bits_per_element(), 4u);
}

TEST(ComposeNet, RejectsBadWidth) {
  EXPECT_THROW(plan_composenet(1), Error);
  EXPECT_THROW(plan_composenet(0), Error);
  EXPECT_THROW(plan_composenet(65), Error);
}

TEST(ComposeNet, SeventeenBitsSolutionSet) {
  const auto s = plan_composenet(17);
  EXPECT_EQ(s.leaves(), 16u);
  ASSERT_EQ(s.solution().size(), 16u);
  for (std::uint32_t j = 0; j < 16; ++j) {
    const auto& n = s.nodes()[s.solution()[j]];
    EXPECT_EQ(n.first, 0u);
    EXPECT_EQ(n.last, j);
  }
  EXPECT_EQ(s.fresh_masks_per_layer(), (std::vector<std::size_t>{16, 8, 7, 5}));
}

TEST(ComposeNet, SolutionNodesAppearOnce) {
  for (unsigned p = 2; p <= 64; ++p) {
    const auto s = plan_composenet(p);
    ASSERT_EQ(s.solution().size(), p - 1);
    std::set<std::uint32_t> seen(s.solution().begin(), s.solution().end());
    EXPECT_EQ(seen.size(), p - 1) << p;
    // Every composite node is produced by exactly one composition.
    std::multiset<std::uint32_t> produced;
    for (const auto& l : s.layers()) {
      for (const auto& c : l) produced.insert(c.out);
    }
    for (auto n : produced) EXPECT_EQ(produced.count(n), 1u);
    EXPECT_EQ(produced.size() + s.leaves(), s.nodes().size());
  }
}

TEST(ComposeNet, CompositionsUseEarlierNodes) {
  for (unsigned p = 2; p <= 64; ++p) {
    const auto s = plan_composenet(p);
    std::set<std::uint32_t> ready;
    for (std::uint32_t j = 0; j < s.leaves(); ++j) ready.insert(j);
    for (const auto& layer : s.layers()) {
      std::set<std::uint32_t> made;
      for (const auto& c : layer) {
        ASSERT_TRUE(ready.count(c.upper)) << p;
        ASSERT_TRUE(ready.count(c.lower)) << p;
        const auto& o = s.nodes()[c.out];
        const auto& u = s.nodes()[c.upper];
        const auto& l = s.nodes()[c.lower];
        EXPECT_EQ(l.first, o.first);
        EXPECT_EQ(l.last + 1, u.first);
        EXPECT_EQ(u.last, o.last);
        made.insert(c.out);
      }
      ready.insert(made.begin(), made.end());
    }
  }
}

TEST(ComposeNet, MaskCountMatchesFormulaForPowersOfTwo) {
  for (unsigned p : {8u, 16u, 32u, 64u}) {
    const auto s = plan_composenet(p);
    EXPECT_EQ(s.opened_bits_per_element(), formula_bits(p)) << p;
    const auto fresh = s.fresh_masks_per_layer();
    ASSERT_EQ(fresh.size(), ceil_log2(p - 1));
    EXPECT_EQ(fresh[0], p);
    for (unsigned i = 1; i < fresh.size(); ++i) {
      EXPECT_EQ(fresh[i], p / 2 + 1 - (1u << (i - 1))) << "p=" << p << " layer " << i;
    }
  }
}

TEST(ComposeNet, SixtyFourBitCounts) {
  const auto s = plan_composenet(64);
  EXPECT_EQ(s.fresh_masks_per_layer(), (std::vector<std::size_t>{64, 32, 31, 29, 25, 17}));
  EXPECT_EQ(s.opened_bits_per_element(), 524u);
  EXPECT_EQ(s.composition_count(), 192u);
  EXPECT_EQ(s.unit_words(), 2u * 198 + 2 * 192);
}

TEST(ComposeNet, NonPowerOfTwoCountsFromSchedule) {
  const auto s29 = plan_composenet(29);
  EXPECT_EQ(s29.leaves(), 29u);
  EXPECT_EQ(s29.fresh_masks_per_layer(), (std::vector<std::size_t>{29, 14, 13, 10, 6}));
  EXPECT_EQ(s29.composition_count(), 67u);
  // Later layers publish fewer masks than p/2 + 1 - 2^(i-1) when p is not a
  // power of two.
  EXPECT_LT(s29.fresh_masks_per_layer()[3], 29u / 2 + 1 - 4);
  EXPECT_EQ(plan_composenet(17).fresh_masks_per_layer(),
            (std::vector<std::size_t>{16, 8, 7, 5}));
}

// Evaluates the network on plaintext (p, g) and compares every prefix carry
// with the carries of integer addition.
TEST(ComposeNet, PlaintextEvaluationGivesCarries) {
  auto prg = testing::make_prg(7);
  for (unsigned p : {2u, 3u, 5u, 8u, 16u, 17u, 29u, 33u, 64u}) {
    const auto s = plan_composenet(p);
    for (int rep = 0; rep < 200; ++rep) {
      const std::uint64_t mask = p == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << p) - 1;
      const std::uint64_t a = prg() & mask, b = prg() & mask;
      std::vector<int> P(s.nodes().size()), G(s.nodes().size());
      for (unsigned j = 0; j < s.leaves(); ++j) {
        P[j] = ((a ^ b) >> j) & 1;
        G[j] = ((a & b) >> j) & 1;
      }
      for (const auto& layer : s.layers()) {
        for (const auto& c : layer) {
          P[c.out] = P[c.upper] & P[c.lower];
          G[c.out] = (P[c.upper] & G[c.lower]) | G[c.upper];
          ASSERT_EQ(P[c.out] & G[c.out], 0);
        }
      }
      const std::uint64_t carries = (a + b) ^ a ^ b;  // bit j = carry into j
      for (unsigned j = 1; j < p; ++j) {
        ASSERT_EQ(G[s.solution()[j - 1]], static_cast<int>((carries >> j) & 1))
            << "p=" << p << " j=" << j;
      }
    }
  }
}

TEST(ComposeNet, MaskSlotsAreDenseAndUnique) {
  const auto s = plan_composenet(64);
  std::set<std::uint32_t> slots;
  for (const auto& layer : s.published()) {
    for (auto n : layer) slots.insert(s.mask_slot(n));
  }
  EXPECT_EQ(slots.size(), s.masked_node_count());
  EXPECT_EQ(*slots.rbegin(), s.masked_node_count() - 1);
  // Solution nodes of the last layer feed nothing and carry no mask.
  for (const auto& c : s.layers().back()) {
    EXPECT_EQ(s.mask_slot(c.out), CompositionSchedule::kNoSlot);
  }
}

}  // namespace
}  // namespace sslr

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
#include <thread>

#include "sslr/randomness.hpp"
#include "sslr/transport.hpp"
#include "test_util.hpp"

namespace sslr {
namespace {

std::vector<RingElement> add_parts(const CorrelatedParts& p, const Ring& ring) {
  return testing::add_all(p.a, p.b, ring);
}

TEST(GenTriple, ForcedScalar) {
  const Ring ring(4);
  auto prg = testing::make_prg(1);
  const std::vector<RingElement> u = {2}, v = {7};
  const auto [a, b] = share_triple(u, v, 1, 1, 1, ring, prg);
  const auto w = testing::add_all(a, b, ring);
  EXPECT_EQ(w, (std::vector<RingElement>{2, 7, 14}));
}

TEST(GenTriple, BitTripleExhaustive) {
  const Ring z2(1);
  auto prg = testing::make_prg(2);
  for (RingElement u = 0; u < 2; ++u) {
    for (RingElement v = 0; v < 2; ++v) {
      for (int rep = 0; rep < 8; ++rep) {
        const auto [a, b] = share_triple(std::vector{u}, std::vector{v}, 1, 1, 1, z2, prg);
        EXPECT_EQ(testing::add_all(a, b, z2), (std::vector<RingElement>{u, v, u & v}));
      }
    }
  }
}

TEST(GenTriple, IdentityMatrices) {
  const Ring ring(64);
  auto prg = testing::make_prg(3);
  const std::vector<RingElement> id = {1, 0, 0, 1};
  const auto [a, b] = share_triple(id, id, 2, 2, 2, ring, prg);
  const auto all = testing::add_all(a, b, ring);
  EXPECT_EQ(std::vector<RingElement>(all.begin() + 8, all.end()), id);
}

TEST(GenTriple, RandomTriplesReconstruct) {
  const Ring ring(64);
  auto prg = testing::make_prg(4);
  for (int i = 0; i < 10000; ++i) {
    const auto [a, b] = gen_triple(1, 1, 1, ring, prg);
    const auto t = testing::add_all(a, b, ring);
    ASSERT_EQ(t[2], t[0] * t[1]);
  }
  const auto [a, b] = gen_triple(3, 4, 2, ring, prg);
  const auto t = testing::add_all(a, b, ring);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      RingElement acc = 0;
      for (std::size_t l = 0; l < 4; ++l) acc += t[r * 4 + l] * t[12 + l * 2 + c];
      EXPECT_EQ(t[20 + r * 2 + c], acc);
    }
  }
  EXPECT_THROW(share_triple(std::vector<RingElement>{1}, std::vector<RingElement>{1, 2}, 1, 1, 1,
                            ring, prg),
               Error);
}

TEST(Dealer, EveryTagReconstructs) {
  const Ring ring(64);
  Dealer d(seed_from_u64(9), ring);
  const auto rt = add_parts(d.generate(TagKey::ring_triple(), 1000), ring);
  for (std::size_t i = 0; i < 1000; ++i) ASSERT_EQ(rt[3 * i + 2], rt[3 * i] * rt[3 * i + 1]);
  const auto ct = add_parts(d.generate(TagKey::conversion(), 10), ring);
  for (std::size_t i = 0; i < 10; ++i) ASSERT_EQ(ct[3 * i + 2], ct[3 * i] * ct[3 * i + 1]);

  const auto bt = d.generate(TagKey::bit_triple(), 100);
  for (std::size_t i = 0; i < 100; ++i) {
    const auto u = bt.a[3 * i] ^ bt.b[3 * i], v = bt.a[3 * i + 1] ^ bt.b[3 * i + 1];
    ASSERT_EQ(bt.a[3 * i + 2] ^ bt.b[3 * i + 2], u & v);
  }

  const auto mt = add_parts(d.generate(TagKey::matrix_triple(2, 3, 1), 1), ring);
  for (std::size_t r = 0; r < 2; ++r) {
    RingElement acc = 0;
    for (std::size_t l = 0; l < 3; ++l) acc += mt[r * 3 + l] * mt[6 + l];
    EXPECT_EQ(mt[9 + r], acc);
  }
}

TEST(Dealer, ComposeNetMaskProducts) {
  const Ring ring(64);
  Dealer d(seed_from_u64(10), ring);
  const auto s = plan_composenet(29);
  const auto parts = d.generate(TagKey::compose_net(29), 3);
  const std::size_t uw = s.unit_words();
  ASSERT_EQ(parts.a.size(), 3 * uw);
  for (std::size_t u = 0; u < 3; ++u) {
    const auto m = [&](std::size_t i) { return parts.a[u * uw + i] ^ parts.b[u * uw + i]; };
    std::size_t at = 2 * s.masked_node_count();
    for (const auto& layer : s.layers()) {
      for (const auto& c : layer) {
        const auto up = 2 * s.mask_slot(c.upper), lo = 2 * s.mask_slot(c.lower);
        EXPECT_EQ(m(at), m(up) & m(lo));
        EXPECT_EQ(m(at + 1), m(up) & m(lo + 1));
        at += 2;
      }
    }
    EXPECT_EQ(at, uw);
  }
}

TEST(Dealer, NarrowRingsStayReduced) {
  const Ring ring(4);
  Dealer d(seed_from_u64(11), ring);
  const auto p = d.generate(TagKey::ring_triple(), 200);
  for (auto v : p.a) ASSERT_LT(v, 16u);
  for (auto v : p.b) ASSERT_LT(v, 16u);
  const auto t = add_parts(p, ring);
  for (std::size_t i = 0; i < 200; ++i) ASSERT_EQ(t[3 * i + 2], ring.mul(t[3 * i], t[3 * i + 1]));
}

TEST(Dealer, ChunkingDoesNotChangeTheStream) {
  const Ring ring(64);
  Dealer one(seed_from_u64(12), ring), two(seed_from_u64(12), ring);
  const auto whole = one.generate(TagKey::ring_triple(), 10);
  auto first = two.generate(TagKey::ring_triple(), 4);
  two.generate(TagKey::bit_triple(), 7);  // other tags do not interfere
  const auto rest = two.generate(TagKey::ring_triple(), 6);
  first.a.insert(first.a.end(), rest.a.begin(), rest.a.end());
  EXPECT_EQ(first.a, whole.a);
}

TEST(Dealer, RejectsInvalidTags) {
  Dealer d(seed_from_u64(1), Ring(64));
  EXPECT_THROW(d.generate(TagKey{TagKind::kComposeNet, 1}, 1), Error);
  EXPECT_THROW(d.generate(TagKey{TagKind::kRingTriple, 3}, 1), Error);
  EXPECT_THROW(TagKey::matrix_triple(0, 1, 1), Error);
}

Requirements sample_requirements() {
  return {{TagKey::ring_triple(), 10},
          {TagKey::bit_triple(), 5},
          {TagKey::matrix_triple(3, 2, 1), 2},
          {TagKey::conversion(), 4},
          {TagKey::compose_net(17), 2}};
}

TEST(Stream, ProvisionIsDeterministic) {
  const Ring ring(64);
  Dealer d1(seed_from_u64(5), ring), d2(seed_from_u64(5), ring), d3(seed_from_u64(6), ring);
  const auto s1 = provision(d1, sample_requirements());
  const auto s2 = provision(d2, sample_requirements());
  const auto s3 = provision(d3, sample_requirements());
  EXPECT_EQ(serialize_stream(s1.first), serialize_stream(s2.first));
  EXPECT_EQ(serialize_stream(s1.second), serialize_stream(s2.second));
  EXPECT_NE(serialize_stream(s1.first), serialize_stream(s3.first));
  EXPECT_EQ(s1.first.units(TagKey::compose_net(17)), 2u);
  EXPECT_EQ(s1.first.session_id, s1.second.session_id);
  EXPECT_EQ(s1.first.commitment, commit_seed(seed_from_u64(5)));
}

TEST(Stream, SerializationRoundTrip) {
  const Ring ring(64);
  Dealer d(seed_from_u64(7), ring);
  const auto [a, b] = provision(d, {{TagKey::ring_triple(), 10}});
  const auto bytes = serialize_stream(a);
  const auto back = deserialize_stream(bytes);
  EXPECT_EQ(back, a);
  // Header: magic, role, lambda.
  EXPECT_EQ(bytes[0], 'C');
  EXPECT_EQ(bytes[3], '1');
  EXPECT_EQ(bytes[4], 0);
  EXPECT_EQ(bytes[5], 64);
  EXPECT_EQ(deserialize_stream(serialize_stream(b)).role, Role::B);
}

TEST(Stream, CrossPartyFilesReconstruct) {
  const Ring ring(64);
  Dealer d(seed_from_u64(8), ring);
  const auto [a, b] = provision(d, sample_requirements());
  const auto fa = deserialize_stream(serialize_stream(a));
  const auto fb = deserialize_stream(serialize_stream(b));
  const auto& wa = fa.blocks.at(TagKey::ring_triple());
  const auto& wb = fb.blocks.at(TagKey::ring_triple());
  for (std::size_t i = 0; i < 10; ++i) {
    const RingElement u = wa[3 * i] + wb[3 * i], v = wa[3 * i + 1] + wb[3 * i + 1];
    EXPECT_EQ(wa[3 * i + 2] + wb[3 * i + 2], u * v);
  }
}

TEST(Stream, CorruptFilesAreRejected) {
  const Ring ring(64);
  Dealer d(seed_from_u64(9), ring);
  const auto good = serialize_stream(provision(d, sample_requirements()).first);
  const auto code_of = [](const std::vector<std::uint8_t>& bytes) {
    try {
      deserialize_stream(bytes);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kArgument;
  };
  auto bad = good;
  bad[0] = 'X';
  EXPECT_EQ(code_of(bad), ErrorCode::kFormat);
  bad = good;
  bad.resize(bad.size() - 8);
  EXPECT_EQ(code_of(bad), ErrorCode::kFormat);
  bad = good;
  bad.push_back(1);
  EXPECT_EQ(code_of(bad), ErrorCode::kFormat);
  bad = good;
  bad[4] = 7;  // role
  EXPECT_EQ(code_of(bad), ErrorCode::kFormat);
  bad = good;
  bad[52] = 9;  // first tag kind
  EXPECT_EQ(code_of(bad), ErrorCode::kFormat);
  bad = good;
  bad[68] ^= 1;  // first tag unit count
  EXPECT_EQ(code_of(bad), ErrorCode::kFormat);
  EXPECT_EQ(code_of({}), ErrorCode::kFormat);
}

TEST(Sources, StreamSourceIsFifoAndUnderflows) {
  const Ring ring(64);
  Dealer d(seed_from_u64(13), ring);
  auto [a, b] = provision(d, {{TagKey::ring_triple(), 5}});
  const auto all = a.blocks.at(TagKey::ring_triple());
  StreamSource src(a);
  const auto first = src.take(TagKey::ring_triple(), 2);
  const auto second = src.take(TagKey::ring_triple(), 3);
  EXPECT_EQ(std::vector<RingElement>(all.begin(), all.begin() + 6), first);
  EXPECT_EQ(std::vector<RingElement>(all.begin() + 6, all.end()), second);
  EXPECT_EQ(src.remaining(TagKey::ring_triple()), 0u);
  try {
    src.take(TagKey::ring_triple(), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRandomnessUnderflow);
    EXPECT_NE(std::string(e.what()).find("scalar-mul"), std::string::npos);
  }
  EXPECT_THROW(src.take(TagKey::bit_triple(), 1), Error);
  EXPECT_TRUE(src.take(TagKey::compose_net(2), 3).empty());
}

TEST(Sources, BrokerServesConsistentParts) {
  const Ring ring(64);
  auto broker = std::make_shared<DealerBroker>(seed_from_u64(14), ring);
  BrokerSource a(Role::A, broker), b(Role::B, broker);
  // Different request sizes and orders on each side.
  auto a1 = a.take(TagKey::ring_triple(), 3);
  const auto b1 = b.take(TagKey::ring_triple(), 5);
  const auto a2 = a.take(TagKey::ring_triple(), 2);
  a1.insert(a1.end(), a2.begin(), a2.end());
  const auto t = testing::add_all(a1, b1, ring);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(t[3 * i + 2], t[3 * i] * t[3 * i + 1]);
  // Same as provisioning a file from the same seed.
  Dealer d(seed_from_u64(14), ring);
  EXPECT_EQ(provision(d, {{TagKey::ring_triple(), 5}}).first.blocks.at(TagKey::ring_triple()), a1);
  EXPECT_EQ(a.commitment(), commit_seed(seed_from_u64(14)));
}

TEST(Sources, RemoteTrustedInitializer) {
  const Ring ring(64);
  DealerBroker broker(seed_from_u64(15), ring);
  auto [ti_a, pa] = make_memory_channel_pair();
  auto [ti_b, pb] = make_memory_channel_pair();
  std::thread ti([&] { serve_trusted_initializer(broker, *ti_a, *ti_b); });
  std::vector<RingElement> wa, wb;
  {
    std::thread tb([&] {
      RemoteSource b(std::move(pb), ring);
      wb = b.take(TagKey::matrix_triple(2, 2, 2), 1);
    });
    RemoteSource a(std::move(pa), ring);
    wa = a.take(TagKey::matrix_triple(2, 2, 2), 1);
    EXPECT_EQ(a.commitment(), commit_seed(seed_from_u64(15)));
    tb.join();
  }
  ti.join();
  const auto t = testing::add_all(wa, wb, ring);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 2; ++c) {
      EXPECT_EQ(t[8 + r * 2 + c], t[r * 2] * t[4 + c] + t[r * 2 + 1] * t[4 + 2 + c]);
    }
  }
}

TEST(Sources, RemoteRejectsRingMismatch) {
  DealerBroker broker(seed_from_u64(16), Ring(32));
  auto [ti_a, pa] = make_memory_channel_pair();
  auto [ti_b, pb] = make_memory_channel_pair();
  std::thread ti([&] {
    try {
      serve_trusted_initializer(broker, *ti_a, *ti_b);
    } catch (...) {
    }
  });
  EXPECT_THROW(RemoteSource(std::move(pa), Ring(64)), Error);
  { RemoteSource b(std::move(pb), Ring(32)); }
  ti.join();
}

}  // namespace
}  // namespace sslr

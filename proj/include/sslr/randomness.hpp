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

#include <array>
#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sslr/composenet.hpp"
#include "sslr/error.hpp"
#include "sslr/io.hpp"
#include "sslr/prg.hpp"
#include "sslr/ring.hpp"
#include "sslr/role.hpp"
#include "sslr/transport.hpp"

namespace sslr {

// Consumer tags. Each tag is an independent FIFO of fixed-size units:
//   kRingTriple   one scalar Beaver triple over Z_{2^lambda}: u, v, w
//   kMatrixTriple one (i x j)(j x k) matrix triple: U, V, W row-major
//   kBitTriple    64 Z_2 triples packed in three words: u, v, w
//   kConversion   a scalar ring triple reserved for Z_2 -> Z_{2^lambda}
//   kComposeNet   the masks and mask products of 64 parallel p-bit
//                 decompositions, laid out as CompositionSchedule::unit_words
enum class TagKind : std::uint8_t {
  kRingTriple = 1,
  kMatrixTriple = 2,
  kBitTriple = 3,
  kConversion = 4,
  kComposeNet = 5,
};

struct TagKey {
  TagKind kind = TagKind::kRingTriple;
  std::uint32_t d0 = 0, d1 = 0, d2 = 0;

  static TagKey ring_triple() { return {TagKind::kRingTriple}; }
  static TagKey bit_triple() { return {TagKind::kBitTriple}; }
  static TagKey conversion() { return {TagKind::kConversion}; }
  static TagKey matrix_triple(std::size_t i, std::size_t j, std::size_t k) {
    return {TagKind::kMatrixTriple, checked(i), checked(j), checked(k)};
  }
  static TagKey compose_net(unsigned p) { return {TagKind::kComposeNet, p}; }

  std::string label() const {
    switch (kind) {
      case TagKind::kRingTriple: return "scalar-mul";
      case TagKind::kBitTriple: return "bit-mul";
      case TagKind::kConversion: return "conversion";
      case TagKind::kMatrixTriple:
        return "matmul(" + std::to_string(d0) + "x" + std::to_string(d1) + "," +
               std::to_string(d1) + "x" + std::to_string(d2) + ")";
      case TagKind::kComposeNet: return "composenet(" + std::to_string(d0) + ")";
    }
    return "unknown";
  }

  friend auto operator<=>(const TagKey&, const TagKey&) = default;

 private:
  static std::uint32_t checked(std::size_t v) {
    if (v == 0 || v > 0xffffffffu) fail(ErrorCode::kArgument, "matrix triple dimension out of range");
    return static_cast<std::uint32_t>(v);
  }
};

namespace detail {
inline const CompositionSchedule& cached_schedule(unsigned p) {
  static std::mutex mu;
  static std::map<unsigned, std::unique_ptr<CompositionSchedule>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[p];
  if (!slot) slot = std::make_unique<CompositionSchedule>(plan_composenet(p));
  return *slot;
}
}  // namespace detail

inline std::size_t unit_words(const TagKey& tag) {
  switch (tag.kind) {
    case TagKind::kRingTriple:
    case TagKind::kConversion:
    case TagKind::kBitTriple: return 3;
    case TagKind::kMatrixTriple:
      return std::size_t{tag.d0} * tag.d1 + std::size_t{tag.d1} * tag.d2 +
             std::size_t{tag.d0} * tag.d2;
    case TagKind::kComposeNet: return detail::cached_schedule(tag.d0).unit_words();
  }
  fail(ErrorCode::kFormat, "unknown randomness tag kind");
}

inline bool valid_tag(const TagKey& t) {
  switch (t.kind) {
    case TagKind::kRingTriple:
    case TagKind::kConversion:
    case TagKind::kBitTriple: return t.d0 == 0 && t.d1 == 0 && t.d2 == 0;
    case TagKind::kMatrixTriple:
      return t.d0 && t.d1 && t.d2 && std::uint64_t{t.d0} * t.d1 < (1ull << 32) &&
             std::uint64_t{t.d1} * t.d2 < (1ull << 32);
    case TagKind::kComposeNet: return t.d0 >= 2 && t.d0 <= 64 && t.d1 == 0 && t.d2 == 0;
  }
  return false;
}

// Both parties' parts of `units` consecutive units of one tag.
struct CorrelatedParts {
  std::vector<std::uint64_t> a;
  std::vector<std::uint64_t> b;
};

// Shares the matrix triple (U, V, U*V) for U (i x j), V (j x k) over `ring`.
// Each part is laid out [U | V | W] row-major. Over Ring(1) this is a Z_2
// triple.
inline std::pair<std::vector<RingElement>, std::vector<RingElement>> share_triple(
    std::span<const RingElement> u, std::span<const RingElement> v, std::size_t i, std::size_t j,
    std::size_t k, const Ring& ring, Prg& prg) {
  if (u.size() != i * j || v.size() != j * k) fail(ErrorCode::kArgument, "triple dims mismatch");
  std::vector<RingElement> secret(i * j + j * k + i * k, 0);
  std::copy(u.begin(), u.end(), secret.begin());
  std::copy(v.begin(), v.end(), secret.begin() + static_cast<std::ptrdiff_t>(i * j));
  RingElement* w = secret.data() + i * j + j * k;
  for (std::size_t r = 0; r < i; ++r) {
    for (std::size_t l = 0; l < j; ++l) {
      for (std::size_t c = 0; c < k; ++c) w[r * k + c] += u[r * j + l] * v[l * k + c];
    }
  }
  std::pair<std::vector<RingElement>, std::vector<RingElement>> out;
  out.first.resize(secret.size());
  out.second.resize(secret.size());
  for (std::size_t x = 0; x < secret.size(); ++x) {
    out.first[x] = ring.reduce(prg());
    out.second[x] = ring.sub(secret[x], out.first[x]);
  }
  return out;
}

// Random triple with uniform U and V.
inline std::pair<std::vector<RingElement>, std::vector<RingElement>> gen_triple(
    std::size_t i, std::size_t j, std::size_t k, const Ring& ring, Prg& prg) {
  std::vector<RingElement> u(i * j), v(j * k);
  for (auto& x : u) x = ring.reduce(prg());
  for (auto& x : v) x = ring.reduce(prg());
  return share_triple(u, v, i, j, k, ring, prg);
}

// ---------------------------------------------------------------------------
// Trusted initializer. All material derives from one 256-bit master seed; each
// tag draws from its own keyed PRG, so the unit sequence of a tag depends only
// on the seed and the tag, never on how requests are chunked or interleaved.

class Dealer {
 public:
  Dealer(const Seed& master, const Ring& ring) : master_(master), ring_(ring) {}

  const Ring& ring() const { return ring_; }
  Seed commitment() const { return commit_seed(master_); }
  std::uint64_t session_id() const {
    const Seed c = commitment();
    std::uint64_t id = 0;
    for (int i = 0; i < 8; ++i) id |= std::uint64_t{c[i]} << (8 * i);
    return id;
  }

  CorrelatedParts generate(const TagKey& tag, std::size_t units) {
    if (!valid_tag(tag)) fail(ErrorCode::kArgument, "invalid randomness tag " + tag.label());
    Prg& prg = prg_for(tag);
    const std::size_t uw = unit_words(tag);
    CorrelatedParts out;
    out.a.resize(units * uw);
    out.b.resize(units * uw);
    for (std::size_t u = 0; u < units; ++u) {
      std::span<std::uint64_t> a(out.a.data() + u * uw, uw);
      std::span<std::uint64_t> b(out.b.data() + u * uw, uw);
      switch (tag.kind) {
        case TagKind::kRingTriple:
        case TagKind::kConversion: ring_unit(prg, 1, 1, 1, a, b); break;
        case TagKind::kMatrixTriple: ring_unit(prg, tag.d0, tag.d1, tag.d2, a, b); break;
        case TagKind::kBitTriple: bit_unit(prg, a, b); break;
        case TagKind::kComposeNet:
          compose_unit(prg, detail::cached_schedule(tag.d0), a, b);
          break;
      }
    }
    return out;
  }

 private:
  Prg& prg_for(const TagKey& tag) {
    auto it = prgs_.find(tag);
    if (it == prgs_.end()) {
      std::string label = "sslr/ti/" + tag.label();
      it = prgs_.emplace(tag, Prg(derive_seed(master_, label))).first;
    }
    return it->second;
  }

  void ring_unit(Prg& prg, std::size_t i, std::size_t j, std::size_t k,
                 std::span<std::uint64_t> a, std::span<std::uint64_t> b) {
    std::vector<RingElement> u(i * j), v(j * k);
    for (auto& x : u) x = ring_.reduce(prg());
    for (auto& x : v) x = ring_.reduce(prg());
    const auto [ta, tb] = share_triple(u, v, i, j, k, ring_, prg);
    std::copy(ta.begin(), ta.end(), a.begin());
    std::copy(tb.begin(), tb.end(), b.begin());
  }

  static void bit_unit(Prg& prg, std::span<std::uint64_t> a, std::span<std::uint64_t> b) {
    const std::uint64_t u = prg(), v = prg();
    const std::uint64_t secret[3] = {u, v, u & v};
    for (int x = 0; x < 3; ++x) {
      a[x] = prg();
      b[x] = secret[x] ^ a[x];
    }
  }

  static void compose_unit(Prg& prg, const CompositionSchedule& s,
                           std::span<std::uint64_t> a, std::span<std::uint64_t> b) {
    const std::size_t masks = 2 * s.masked_node_count();
    std::vector<std::uint64_t> secret(s.unit_words());
    for (std::size_t x = 0; x < masks; ++x) secret[x] = prg();
    std::size_t at = masks;
    for (const auto& layer : s.layers()) {
      for (const auto& c : layer) {
        const std::uint64_t up_p = secret[2 * s.mask_slot(c.upper)];
        const std::uint64_t lo_p = secret[2 * s.mask_slot(c.lower)];
        const std::uint64_t lo_g = secret[2 * s.mask_slot(c.lower) + 1];
        secret[at++] = up_p & lo_p;
        secret[at++] = up_p & lo_g;
      }
    }
    for (std::size_t x = 0; x < secret.size(); ++x) {
      a[x] = prg();
      b[x] = secret[x] ^ a[x];
    }
  }

  Seed master_;
  Ring ring_;
  std::map<TagKey, Prg> prgs_;
};

// ---------------------------------------------------------------------------
// One party's pre-distributed material, organised per tag.

struct RandomnessStream {
  Role role = Role::A;
  unsigned ring_bits = 64;
  std::uint64_t session_id = 0;
  Seed commitment{};
  std::map<TagKey, std::vector<std::uint64_t>> blocks;

  std::size_t units(const TagKey& tag) const {
    auto it = blocks.find(tag);
    return it == blocks.end() ? 0 : it->second.size() / unit_words(tag);
  }

  friend bool operator==(const RandomnessStream&, const RandomnessStream&) = default;
};

using Requirements = std::map<TagKey, std::size_t>;

// Generates both parties' streams holding exactly `req` units per tag.
inline std::pair<RandomnessStream, RandomnessStream> provision(Dealer& dealer,
                                                               const Requirements& req) {
  std::pair<RandomnessStream, RandomnessStream> out;
  out.first.role = Role::A;
  out.second.role = Role::B;
  for (auto* s : {&out.first, &out.second}) {
    s->ring_bits = dealer.ring().bits();
    s->session_id = dealer.session_id();
    s->commitment = dealer.commitment();
  }
  for (const auto& [tag, units] : req) {
    if (units == 0) continue;
    auto parts = dealer.generate(tag, units);
    out.first.blocks[tag] = std::move(parts.a);
    out.second.blocks[tag] = std::move(parts.b);
  }
  return out;
}

// Randomness file: "CRN1" | u8 role | u8 lambda | u16 0 | u64 session id |
// 32-byte seed commitment | u32 tag count | per tag {u8 kind, 3 zero bytes,
// u32 d0, u32 d1, u32 d2, u64 units} | per tag block {u64 tag index,
// u64 word count, words}. Z_2 material is stored bit-packed in its words.
inline constexpr char kRandomnessMagic[4] = {'C', 'R', 'N', '1'};

inline std::vector<std::uint8_t> serialize_stream(const RandomnessStream& s) {
  io::ByteWriter w;
  for (char c : kRandomnessMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u8(static_cast<std::uint8_t>(s.role));
  w.u8(static_cast<std::uint8_t>(s.ring_bits));
  w.u16(0);
  w.u64(s.session_id);
  w.raw(s.commitment);
  w.u32(static_cast<std::uint32_t>(s.blocks.size()));
  for (const auto& [tag, words] : s.blocks) {
    w.u8(static_cast<std::uint8_t>(tag.kind));
    w.u8(0); w.u8(0); w.u8(0);
    w.u32(tag.d0); w.u32(tag.d1); w.u32(tag.d2);
    w.u64(words.size() / unit_words(tag));
  }
  std::uint64_t index = 0;
  for (const auto& [tag, words] : s.blocks) {
    w.u64(index++);
    w.u64(words.size());
    w.words(words);
  }
  return w.take();
}

inline RandomnessStream deserialize_stream(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  for (char c : kRandomnessMagic) {
    if (r.u8() != static_cast<std::uint8_t>(c)) fail(ErrorCode::kFormat, "bad randomness-file magic");
  }
  RandomnessStream s;
  const std::uint8_t role = r.u8();
  if (role > 1) fail(ErrorCode::kFormat, "bad role in randomness file");
  s.role = static_cast<Role>(role);
  s.ring_bits = r.u8();
  if (s.ring_bits < 1 || s.ring_bits > 64) fail(ErrorCode::kFormat, "bad ring width in randomness file");
  if (r.u16() != 0) fail(ErrorCode::kFormat, "bad reserved field in randomness file");
  s.session_id = r.u64();
  const auto commit = r.raw(32);
  std::copy(commit.begin(), commit.end(), s.commitment.begin());
  const std::uint32_t ntags = r.u32();
  std::vector<std::pair<TagKey, std::uint64_t>> tags;
  for (std::uint32_t t = 0; t < ntags; ++t) {
    TagKey tag;
    const std::uint8_t kind = r.u8();
    if (kind < 1 || kind > 5) fail(ErrorCode::kFormat, "unknown tag kind in randomness file");
    tag.kind = static_cast<TagKind>(kind);
    if (r.u8() || r.u8() || r.u8()) fail(ErrorCode::kFormat, "bad tag padding in randomness file");
    tag.d0 = r.u32(); tag.d1 = r.u32(); tag.d2 = r.u32();
    if (!valid_tag(tag)) fail(ErrorCode::kFormat, "invalid tag " + tag.label() + " in randomness file");
    tags.emplace_back(tag, r.u64());
  }
  for (std::uint32_t t = 0; t < ntags; ++t) {
    if (r.u64() != t) fail(ErrorCode::kFormat, "randomness blocks out of order");
    const std::uint64_t nwords = r.u64();
    const auto& [tag, units] = tags[t];
    const std::size_t uw = unit_words(tag);
    if (units > r.remaining() / 8 / uw || nwords != units * uw || nwords > r.remaining() / 8) {
      fail(ErrorCode::kFormat, "randomness block length mismatch for " + tag.label());
    }
    auto& block = s.blocks[tag];
    block.resize(nwords);
    r.words(block);
  }
  if (r.remaining() != 0) fail(ErrorCode::kFormat, "trailing bytes in randomness file");
  return s;
}

// ---------------------------------------------------------------------------
// Sources: how a party obtains its material during a session.

class CorrelatedSource {
 public:
  virtual ~CorrelatedSource() = default;
  // The next `units` units of `tag`, strictly FIFO per tag.
  virtual std::vector<std::uint64_t> take(const TagKey& tag, std::size_t units) = 0;
  virtual Seed commitment() const = 0;
};

// Ahead-of-time mode: consumes a pre-distributed stream.
class StreamSource final : public CorrelatedSource {
 public:
  explicit StreamSource(RandomnessStream stream) : stream_(std::move(stream)) {}

  std::vector<std::uint64_t> take(const TagKey& tag, std::size_t units) override {
    const std::size_t need = units * unit_words(tag);
    if (need == 0) return {};
    auto it = stream_.blocks.find(tag);
    std::size_t& pos = cursor_[tag];
    if (it == stream_.blocks.end() || it->second.size() - pos < need) {
      fail(ErrorCode::kRandomnessUnderflow,
           "correlated randomness exhausted for " + tag.label() + " (wanted " +
               std::to_string(units) + " units, " +
               std::to_string(it == stream_.blocks.end() ? 0 : (it->second.size() - pos) / unit_words(tag)) +
               " left)");
    }
    std::vector<std::uint64_t> out(it->second.begin() + static_cast<std::ptrdiff_t>(pos),
                                   it->second.begin() + static_cast<std::ptrdiff_t>(pos + need));
    pos += need;
    return out;
  }

  Seed commitment() const override { return stream_.commitment; }
  const RandomnessStream& stream() const { return stream_; }

  std::size_t remaining(const TagKey& tag) const {
    auto it = stream_.blocks.find(tag);
    if (it == stream_.blocks.end()) return 0;
    auto c = cursor_.find(tag);
    const std::size_t used = c == cursor_.end() ? 0 : c->second;
    return (it->second.size() - used) / unit_words(tag);
  }

 private:
  RandomnessStream stream_;
  std::map<TagKey, std::size_t> cursor_;
};

// Online mode: one dealer serving both parties on demand. Whichever party
// asks first triggers generation; the peer's part is queued for it.
class DealerBroker {
 public:
  DealerBroker(const Seed& master, const Ring& ring) : dealer_(master, ring) {}

  std::vector<std::uint64_t> take(Role role, const TagKey& tag, std::size_t units) {
    if (!valid_tag(tag)) fail(ErrorCode::kArgument, "invalid randomness tag " + tag.label());
    const std::size_t uw = unit_words(tag);
    const std::size_t need = units * uw;
    std::lock_guard lock(mu_);
    auto& queues = pending_[tag];
    auto& mine = queues[static_cast<int>(role)];
    if (mine.size() < need) {
      const std::size_t missing = (need - mine.size()) / uw;
      auto parts = dealer_.generate(tag, missing);
      queues[0].insert(queues[0].end(), parts.a.begin(), parts.a.end());
      queues[1].insert(queues[1].end(), parts.b.begin(), parts.b.end());
    }
    std::vector<std::uint64_t> out(mine.begin(), mine.begin() + static_cast<std::ptrdiff_t>(need));
    mine.erase(mine.begin(), mine.begin() + static_cast<std::ptrdiff_t>(need));
    return out;
  }

  Seed commitment() const { return dealer_.commitment(); }
  const Ring& ring() const { return dealer_.ring(); }

 private:
  std::mutex mu_;
  Dealer dealer_;
  std::map<TagKey, std::array<std::deque<std::uint64_t>, 2>> pending_;
};

class BrokerSource final : public CorrelatedSource {
 public:
  BrokerSource(Role role, std::shared_ptr<DealerBroker> broker)
      : role_(role), broker_(std::move(broker)) {}

  std::vector<std::uint64_t> take(const TagKey& tag, std::size_t units) override {
    return broker_->take(role_, tag, units);
  }
  Seed commitment() const override { return broker_->commitment(); }

 private:
  Role role_;
  std::shared_ptr<DealerBroker> broker_;
};

// Online mode over the network: requests go to a trusted-initializer process
// as RANDOMNESS frames {kind, d0, d1, d2, units}; replies carry the words.
// The TI greets each party with CONTROL {version, lambda, commitment}.
class RemoteSource final : public CorrelatedSource {
 public:
  RemoteSource(std::unique_ptr<Channel> ti, const Ring& ring) : ti_(std::move(ti)) {
    const Frame hello = ti_->recv();
    if (hello.type != MsgType::kControl || hello.words.size() != 6 ||
        hello.words[0] != kProtocolVersion) {
      fail(ErrorCode::kProtocol, "malformed greeting from trusted initializer");
    }
    if (hello.words[1] != ring.bits()) {
      fail(ErrorCode::kProtocol, "trusted initializer serves lambda=" +
                                     std::to_string(hello.words[1]) + ", session uses " +
                                     std::to_string(ring.bits()));
    }
    for (std::size_t i = 0; i < 32; ++i) {
      commitment_[i] = static_cast<std::uint8_t>(hello.words[2 + i / 8] >> (8 * (i % 8)));
    }
  }
  ~RemoteSource() override {
    try {
      ti_->send(Frame{MsgType::kControl, {}});
    } catch (...) {
    }
  }

  std::vector<std::uint64_t> take(const TagKey& tag, std::size_t units) override {
    ti_->send(Frame{MsgType::kRandomness,
                    {static_cast<std::uint64_t>(tag.kind), tag.d0, tag.d1, tag.d2, units}});
    Frame reply = ti_->recv();
    if (reply.type != MsgType::kRandomness || reply.words.size() != units * unit_words(tag)) {
      fail(ErrorCode::kRandomnessUnderflow,
           "trusted initializer did not deliver " + tag.label() + " material");
    }
    return std::move(reply.words);
  }
  Seed commitment() const override { return commitment_; }

 private:
  std::unique_ptr<Channel> ti_;
  Seed commitment_{};
};

// Serves both parties until each sends an empty CONTROL frame (or hangs up).
inline void serve_trusted_initializer(DealerBroker& broker, Channel& alice, Channel& bob) {
  const auto serve = [&](Role role, Channel& ch) {
    std::vector<std::uint64_t> hello = {kProtocolVersion, broker.ring().bits()};
    const Seed c = broker.commitment();
    for (std::size_t i = 0; i < 4; ++i) {
      std::uint64_t v = 0;
      for (std::size_t k = 0; k < 8; ++k) v |= std::uint64_t{c[8 * i + k]} << (8 * k);
      hello.push_back(v);
    }
    ch.send(Frame{MsgType::kControl, hello});
    for (;;) {
      Frame req;
      try {
        req = ch.recv();
      } catch (const Error&) {
        return;
      }
      if (req.type == MsgType::kControl) return;
      if (req.type != MsgType::kRandomness || req.words.size() != 5 || req.words[0] < 1 ||
          req.words[0] > 5 || req.words[1] > 0xffffffffu || req.words[2] > 0xffffffffu ||
          req.words[3] > 0xffffffffu) {
        fail(ErrorCode::kProtocol, "malformed randomness request");
      }
      const TagKey tag{static_cast<TagKind>(req.words[0]), static_cast<std::uint32_t>(req.words[1]),
                       static_cast<std::uint32_t>(req.words[2]),
                       static_cast<std::uint32_t>(req.words[3])};
      ch.send(Frame{MsgType::kRandomness, broker.take(role, tag, req.words[4])});
    }
  };
  std::exception_ptr err;
  std::thread tb([&] {
    try {
      serve(Role::B, bob);
    } catch (...) {
      err = std::current_exception();
      alice.close();
    }
  });
  try {
    serve(Role::A, alice);
  } catch (...) {
    bob.close();
    tb.join();
    throw;
  }
  tb.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace sslr

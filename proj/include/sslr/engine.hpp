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
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sslr/error.hpp"
#include "sslr/fixedpoint.hpp"
#include "sslr/prg.hpp"
#include "sslr/randomness.hpp"
#include "sslr/ring.hpp"
#include "sslr/role.hpp"
#include "sslr/sharing.hpp"
#include "sslr/thread_pool.hpp"
#include "sslr/transport.hpp"

namespace sslr {

// Per-session counters. `rounds` counts symmetric exchanges; multiplication
// tallies count scalar products (ring) and single-bit ANDs (Z_2).
struct Transcript {
  std::uint64_t rounds = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  std::uint64_t ring_mults = 0;
  std::uint64_t bit_mults = 0;
  std::uint64_t opened_words = 0;

  std::uint64_t secure_mults() const { return ring_mults + bit_mults; }
};

// Sees every opening as (party A's message, party B's message).
using OpeningObserver =
    std::function<void(MsgType, std::span<const std::uint64_t>, std::span<const std::uint64_t>)>;

struct SessionOptions {
  std::size_t threads = 1;
  // Seed of the party's private PRG (re-sharing masks). Random if unset.
  std::optional<Seed> local_seed;
};

class Session {
 public:
  Session(Role role, Channel& channel, CorrelatedSource& source, const FixedPointParams& params,
          const SessionOptions& opts = {})
      : role_(role),
        channel_(channel),
        source_(source),
        params_(params),
        ring_(params.ring_bits),
        pool_(std::make_unique<ThreadPool>(opts.threads)),
        prg_(opts.local_seed ? *opts.local_seed : random_seed()) {
    crypto_generichash_init(&hash_, nullptr, 0, 32);
  }

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  Role role() const { return role_; }
  bool is_a() const { return role_ == Role::A; }
  const Ring& ring() const { return ring_; }
  const FixedPointParams& params() const { return params_; }
  ThreadPool& pool() { return *pool_; }
  const Transcript& transcript() const { return transcript_; }
  Transcript& transcript() { return transcript_; }
  Channel& channel() { return channel_; }
  Prg& prg() { return prg_; }

  void set_observer(OpeningObserver obs) { observer_ = std::move(obs); }

  std::vector<std::uint64_t> take(const TagKey& tag, std::size_t units) {
    return source_.take(tag, units);
  }

  // One round: send `out`, receive the peer's message of the same type and
  // length. Anything else means the parties disagree on the protocol state.
  std::vector<std::uint64_t> exchange(const OutFrame& out) {
    Frame in = channel_.exchange(out);
    if (in.type != out.type() || in.words.size() != out.payload().size()) {
      fail(ErrorCode::kProtocol, "peer sent a " + std::to_string(in.words.size()) +
                                     "-word message of type " +
                                     std::to_string(static_cast<int>(in.type)) + ", expected " +
                                     std::to_string(out.payload().size()) + " words of type " +
                                     std::to_string(static_cast<int>(out.type())));
    }
    ++transcript_.rounds;
    transcript_.bytes_sent += kFrameHeaderBytes + out.payload().size() * 8;
    transcript_.bytes_received += kFrameHeaderBytes + in.words.size() * 8;
    transcript_.opened_words += in.words.size();
    const auto mine = out.payload();
    const std::span<const std::uint64_t> theirs(in.words);
    const auto a = is_a() ? mine : theirs;
    const auto b = is_a() ? theirs : mine;
    absorb(static_cast<std::uint64_t>(out.type()));
    absorb_words(a);
    absorb_words(b);
    if (observer_) observer_(out.type(), a, b);
    return std::move(in.words);
  }

  // BLAKE2b over every round's (type, A message, B message); equal on both
  // parties after an honest run.
  std::array<std::uint8_t, 32> transcript_hash() const {
    crypto_generichash_state copy = hash_;
    std::array<std::uint8_t, 32> out{};
    crypto_generichash_final(&copy, out.data(), out.size());
    return out;
  }

 private:
  static Seed random_seed() {
    detail::ensure_sodium();
    Seed s{};
    randombytes_buf(s.data(), s.size());
    return s;
  }

  void absorb(std::uint64_t w) {
    const std::uint64_t le = io::to_le(w);
    crypto_generichash_update(&hash_, reinterpret_cast<const unsigned char*>(&le), 8);
  }
  void absorb_words(std::span<const std::uint64_t> ws) {
    absorb(ws.size());
    if constexpr (std::endian::native == std::endian::little) {
      crypto_generichash_update(&hash_, reinterpret_cast<const unsigned char*>(ws.data()),
                                ws.size() * 8);
    } else {
      for (auto w : ws) absorb(w);
    }
  }

  Role role_;
  Channel& channel_;
  CorrelatedSource& source_;
  FixedPointParams params_;
  Ring ring_;
  std::unique_ptr<ThreadPool> pool_;
  Prg prg_;
  Transcript transcript_;
  crypto_generichash_state hash_{};
  OpeningObserver observer_;
};

inline constexpr std::size_t kGrain = 4096;

// ---------------------------------------------------------------------------
// Z_{2^lambda} multiplication

// Elementwise products of shared vectors in one round, consuming one ring
// triple per element from `tag`.
inline std::vector<RingElement> batch_mul(Session& s, std::span<const RingElement> x,
                                          std::span<const RingElement> y,
                                          const TagKey& tag = TagKey::ring_triple()) {
  if (x.size() != y.size()) {
    fail(ErrorCode::kProtocol, "batch_mul length mismatch: " + std::to_string(x.size()) + " vs " +
                                   std::to_string(y.size()));
  }
  const std::size_t n = x.size();
  const Ring& ring = s.ring();
  const auto t = s.take(tag, n);
  OutFrame out(MsgType::kOpenRing, 2 * n);
  auto pay = out.payload();
  s.pool().parallel_for(n, kGrain, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      pay[i] = ring.sub(x[i], t[3 * i]);
      pay[n + i] = ring.sub(y[i], t[3 * i + 1]);
    }
  });
  const auto in = s.exchange(out);
  std::vector<RingElement> z(n);
  const bool a = s.is_a();
  s.pool().parallel_for(n, kGrain, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const RingElement d = pay[i] + in[i];
      const RingElement e = pay[n + i] + in[n + i];
      RingElement v = t[3 * i + 2] + e * t[3 * i] + d * t[3 * i + 1];
      if (a) v += d * e;
      z[i] = ring.reduce(v);
    }
  });
  s.transcript().ring_mults += n;
  return z;
}

inline ShareVector batch_mul(Session& s, const ShareVector& x, const ShareVector& y) {
  return {s.role(), batch_mul(s, std::span<const RingElement>(x.values),
                              std::span<const RingElement>(y.values))};
}

inline RingShare mul(Session& s, const RingShare& x, const RingShare& y) {
  const RingElement xv = x.value, yv = y.value;
  return {batch_mul(s, std::span(&xv, 1), std::span(&yv, 1))[0], s.role()};
}

namespace detail {
// C += A (i x j) * B (j x k), all row-major, wrapping on the machine word.
inline void matmul_acc(ThreadPool& pool, const RingElement* A, const RingElement* B,
                       RingElement* C, std::size_t i, std::size_t j, std::size_t k) {
  const std::size_t grain = std::max<std::size_t>(1, kGrain / std::max<std::size_t>(1, j * k));
  pool.parallel_for(i, grain, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      RingElement* crow = C + r * k;
      for (std::size_t l = 0; l < j; ++l) {
        const RingElement a = A[r * j + l];
        const RingElement* brow = B + l * k;
        for (std::size_t c = 0; c < k; ++c) crow[c] += a * brow[c];
      }
    }
  });
}
}  // namespace detail

// X (i x j) times Y (j x k) in one round with one matrix triple. The opened
// message leads with the dimensions so the peer can abort on disagreement.
inline ShareMatrix matmul(Session& s, const ShareMatrix& X, const ShareMatrix& Y) {
  if (X.cols != Y.rows) {
    fail(ErrorCode::kProtocol, "matmul dimension mismatch: (" + std::to_string(X.rows) + "x" +
                                   std::to_string(X.cols) + ")·(" + std::to_string(Y.rows) + "x" +
                                   std::to_string(Y.cols) + ")");
  }
  const std::size_t i = X.rows, j = X.cols, k = Y.cols;
  const Ring& ring = s.ring();
  const TagKey tag = TagKey::matrix_triple(i, j, k);
  const auto t = s.take(tag, 1);
  const RingElement* U = t.data();
  const RingElement* V = U + i * j;
  const RingElement* W = V + j * k;
  OutFrame out(MsgType::kOpenRing, 3 + i * j + j * k);
  auto pay = out.payload();
  pay[0] = i;
  pay[1] = j;
  pay[2] = k;
  for (std::size_t x = 0; x < i * j; ++x) pay[3 + x] = ring.sub(X.values[x], U[x]);
  for (std::size_t x = 0; x < j * k; ++x) pay[3 + i * j + x] = ring.sub(Y.values[x], V[x]);
  const auto in = s.exchange(out);
  if (in[0] != i || in[1] != j || in[2] != k) {
    fail(ErrorCode::kProtocol, "peer disagrees on matmul dimensions");
  }
  std::vector<RingElement> D(i * j), E(j * k);
  for (std::size_t x = 0; x < i * j; ++x) D[x] = pay[3 + x] + in[3 + x];
  for (std::size_t x = 0; x < j * k; ++x) E[x] = pay[3 + i * j + x] + in[3 + i * j + x];
  // X·Y = U·V + U·E + D·V + D·E
  ShareMatrix Z(s.role(), i, k);
  std::copy(W, W + i * k, Z.values.begin());
  detail::matmul_acc(s.pool(), U, E.data(), Z.values.data(), i, j, k);
  detail::matmul_acc(s.pool(), D.data(), V, Z.values.data(), i, j, k);
  if (s.is_a()) detail::matmul_acc(s.pool(), D.data(), E.data(), Z.values.data(), i, j, k);
  for (auto& v : Z.values) v = ring.reduce(v);
  s.transcript().ring_mults += i * j * k;
  return Z;
}

// Sum of w_i * x_i as a 1 x n by n x 1 matrix product. The result carries
// the fractional bits of both factors; truncation is up to the caller.
inline RingShare inner_product(Session& s, const ShareVector& w, const ShareVector& x) {
  if (w.values.size() != x.values.size() || w.values.empty()) {
    fail(ErrorCode::kProtocol, "inner_product length mismatch: " +
                                   std::to_string(w.values.size()) + " vs " +
                                   std::to_string(x.values.size()));
  }
  const std::size_t n = w.values.size();
  ShareMatrix row(s.role(), 1, n, w.values);
  ShareMatrix col(s.role(), n, 1, x.values);
  return {matmul(s, row, col).values[0], s.role()};
}

// ---------------------------------------------------------------------------
// Z_2 multiplication on packed lanes: word w holds lanes 64w..64w+63.

inline std::vector<std::uint64_t> batch_and(Session& s, std::span<const std::uint64_t> x,
                                            std::span<const std::uint64_t> y,
                                            std::size_t lanes) {
  const std::size_t n = x.size();
  if (y.size() != n || lanes > n * 64) {
    fail(ErrorCode::kProtocol, "batch_and length mismatch");
  }
  const auto t = s.take(TagKey::bit_triple(), n);
  OutFrame out(MsgType::kOpenBits, 2 * n);
  auto pay = out.payload();
  for (std::size_t i = 0; i < n; ++i) {
    pay[i] = x[i] ^ t[3 * i];
    pay[n + i] = y[i] ^ t[3 * i + 1];
  }
  const auto in = s.exchange(out);
  std::vector<std::uint64_t> z(n);
  const std::uint64_t amask = s.is_a() ? ~std::uint64_t{0} : 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t d = pay[i] ^ in[i];
    const std::uint64_t e = pay[n + i] ^ in[n + i];
    z[i] = t[3 * i + 2] ^ (e & t[3 * i]) ^ (d & t[3 * i + 1]) ^ (d & e & amask);
  }
  s.transcript().bit_mults += lanes;
  return z;
}

inline BitVectorShare batch_and(Session& s, const BitVectorShare& x, const BitVectorShare& y) {
  if (x.bits.size() != y.bits.size()) fail(ErrorCode::kProtocol, "batch_and length mismatch");
  BitVectorShare out{s.role(), BitVector(x.bits.size())};
  auto z = batch_and(s, x.bits.words(), y.bits.words(), x.bits.size());
  std::copy(z.begin(), z.end(), out.bits.words().begin());
  out.bits.clear_padding();
  return out;
}

// Opens shared ring values to both parties in one round.
inline std::vector<RingElement> reveal(Session& s, std::span<const RingElement> x) {
  OutFrame out(MsgType::kOpenRing, x.size());
  std::copy(x.begin(), x.end(), out.payload().begin());
  const auto in = s.exchange(out);
  std::vector<RingElement> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = s.ring().add(x[i], in[i]);
  return v;
}

}  // namespace sslr

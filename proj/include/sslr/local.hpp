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
#include <cstdint>
#include <exception>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include "sslr/engine.hpp"
#include "sslr/fixedpoint.hpp"
#include "sslr/prg.hpp"
#include "sslr/randomness.hpp"
#include "sslr/transport.hpp"

namespace sslr {

// All seeds of a run derive from one operator seed, so a local run and a
// three-process run with the same --seed consume identical randomness.
struct RunSeeds {
  Seed ti{};
  Seed party_a{};
  Seed party_b{};
  Seed split{};

  const Seed& party(Role r) const { return r == Role::A ? party_a : party_b; }
};

inline RunSeeds derive_run_seeds(std::uint64_t seed) {
  const Seed base = seed_from_u64(seed);
  return {derive_seed(base, "sslr/ti"), derive_seed(base, "sslr/party/A"),
          derive_seed(base, "sslr/party/B"), derive_seed(base, "sslr/split")};
}

template <class R>
struct LocalRun {
  R a;
  R b;
  Transcript transcript_a;
  Transcript transcript_b;
  std::array<std::uint8_t, 32> hash_a{};
  std::array<std::uint8_t, 32> hash_b{};
};

// Runs fn(Session&) for both parties on threads joined by an in-memory
// channel. A failure on one side closes the channel so the other side
// unblocks; the first error is rethrown.
template <class F>
auto run_local(const FixedPointParams& fp, CorrelatedSource& source_a, CorrelatedSource& source_b,
               const RunSeeds& seeds, F&& fn, std::size_t threads = 1)
    -> LocalRun<decltype(fn(std::declval<Session&>()))> {
  using R = decltype(fn(std::declval<Session&>()));
  auto [ch_a, ch_b] = make_memory_channel_pair();
  std::optional<R> ra, rb;
  LocalRun<R> out{};
  std::exception_ptr err_a, err_b;
  auto party = [&](Role role, Channel& ch, CorrelatedSource& src, std::optional<R>& res,
                   Transcript& tr, std::array<std::uint8_t, 32>& hash, std::exception_ptr& err) {
    try {
      Session s(role, ch, src, fp, SessionOptions{threads, seeds.party(role)});
      res.emplace(fn(s));
      tr = s.transcript();
      hash = s.transcript_hash();
    } catch (...) {
      err = std::current_exception();
      ch.close();
    }
  };
  std::thread ta([&] {
    party(Role::A, *ch_a, source_a, ra, out.transcript_a, out.hash_a, err_a);
  });
  party(Role::B, *ch_b, source_b, rb, out.transcript_b, out.hash_b, err_b);
  ta.join();
  // Prefer the error that is not a mere consequence of the peer hanging up.
  for (auto* e : {&err_a, &err_b}) {
    if (!*e) continue;
    try {
      std::rethrow_exception(*e);
    } catch (const Error& x) {
      if (x.code() != ErrorCode::kTransport) throw;
    } catch (...) {
      throw;
    }
  }
  if (err_a) std::rethrow_exception(err_a);
  if (err_b) std::rethrow_exception(err_b);
  out.a = std::move(*ra);
  out.b = std::move(*rb);
  return out;
}

// Same, with an online dealer seeded from seeds.ti.
template <class F>
auto run_local(const FixedPointParams& fp, const RunSeeds& seeds, F&& fn, std::size_t threads = 1) {
  auto broker = std::make_shared<DealerBroker>(seeds.ti, fp.ring());
  BrokerSource a(Role::A, broker), b(Role::B, broker);
  return run_local(fp, a, b, seeds, std::forward<F>(fn), threads);
}

}  // namespace sslr

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
#include "sslr/ring.hpp"

namespace sslr {

// Party roles. Alice (A) is the party that absorbs public constants.
enum class Role : std::uint8_t { A = 0, B = 1 };

constexpr Role peer_of(Role r) { return r == Role::A ? Role::B : Role::A; }

inline const char* to_string(Role r) { return r == Role::A ? "A" : "B"; }

// One party's additive share of a secret in Z_{2^lambda}.
struct RingShare {
  RingElement value = 0;
  Role role = Role::A;

  friend bool operator==(const RingShare&, const RingShare&) = default;
};

}  // namespace sslr

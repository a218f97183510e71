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

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sslr/error.hpp"

namespace sslr {

// A node M_{first..last}: the composition of the carry matrices of bit
// positions first..last (0-based, inclusive). Leaves have first == last.
struct CarryNode {
  std::uint32_t first = 0;
  std::uint32_t last = 0;

  std::uint32_t length() const { return last - first + 1; }
};

// out = upper * lower, where upper covers the higher bit positions.
struct Composition {
  std::uint32_t out = 0;
  std::uint32_t upper = 0;
  std::uint32_t lower = 0;
};

// The composition network for a p-bit carry-lookahead decomposition.
//
// Prefix node M_{1.j} is built at layer ceil(log2 j) as M_{1.h} * M_{h+1.j}
// with h the largest power of two below j; missing right-hand nodes are added
// recursively by the same rule. The network covers all p leaf matrices,
// except that M_p is left out when p-1 is a power of two, since including it
// would add a layer and its prefix is never used.
//
// Every node that feeds a composition owns one 2-bit mask (propagate,
// generate) for its lifetime; the masked values are published once, in the
// round right after the node is created.
class CompositionSchedule {
 public:
  static constexpr std::uint32_t kNoSlot = std::numeric_limits<std::uint32_t>::max();

  unsigned bits() const { return bits_; }
  unsigned leaves() const { return leaves_; }
  std::size_t depth() const { return layers_.size(); }

  const std::vector<CarryNode>& nodes() const { return nodes_; }
  // layers()[i] holds the compositions evaluated in network layer i+1.
  const std::vector<std::vector<Composition>>& layers() const { return layers_; }
  // solution()[j-1] is the node index of M_{1.j}, j = 1..p-1.
  const std::vector<std::uint32_t>& solution() const { return solution_; }
  // published()[i] lists the nodes created at layer i that feed later
  // compositions; their masked values are opened in network round i+1.
  const std::vector<std::vector<std::uint32_t>>& published() const { return published_; }
  std::uint32_t mask_slot(std::uint32_t node) const { return mask_slot_[node]; }

  std::size_t composition_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.size();
    return n;
  }
  std::size_t masked_node_count() const {
    std::size_t n = 0;
    for (const auto& l : published_) n += l.size();
    return n;
  }
  std::vector<std::size_t> fresh_masks_per_layer() const {
    std::vector<std::size_t> out;
    for (const auto& l : published_) out.push_back(l.size());
    return out;
  }

  // Z_2 values opened per decomposed element: two per setup multiplication
  // plus two per published node mask.
  std::size_t opened_bits_per_element() const {
    return 2 * std::size_t{bits_} + 2 * masked_node_count();
  }

  // Correlated-randomness words per 64-lane unit: a (p, g) mask pair per
  // published node followed by the two mask products of each composition.
  std::size_t unit_words() const {
    return 2 * masked_node_count() + 2 * composition_count();
  }

 private:
  friend CompositionSchedule plan_composenet(unsigned p);

  unsigned bits_ = 0;
  unsigned leaves_ = 0;
  std::vector<CarryNode> nodes_;
  std::vector<std::vector<Composition>> layers_;
  std::vector<std::uint32_t> solution_;
  std::vector<std::vector<std::uint32_t>> published_;
  std::vector<std::uint32_t> mask_slot_;
};

namespace detail {
inline unsigned ceil_log2(std::uint32_t n) {
  return n <= 1 ? 0 : static_cast<unsigned>(std::bit_width(n - 1));
}
}  // namespace detail

inline CompositionSchedule plan_composenet(unsigned p) {
  if (p < 2) fail(ErrorCode::kArgument, "ComposeNet needs p >= 2, got " + std::to_string(p));
  if (p > 64) fail(ErrorCode::kArgument, "ComposeNet supports at most 64 bits");

  CompositionSchedule s;
  s.bits_ = p;
  s.leaves_ = std::has_single_bit(p - 1) ? p - 1 : p;

  // Collect nodes (first, last) -> (upper, lower) split.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<std::uint32_t, std::uint32_t>> splits;
  auto add = [&](auto&& self, std::uint32_t first, std::uint32_t last) -> void {
    if (first == last || splits.contains({first, last})) return;
    const std::uint32_t len = last - first + 1;
    const std::uint32_t half = std::uint32_t{1} << (detail::ceil_log2(len) - 1);
    self(self, first, first + half - 1);
    self(self, first + half, last);
    splits[{first, last}] = {first + half, first + half - 1};
  };
  for (std::uint32_t j = 1; j < s.leaves_; ++j) add(add, 0, j);

  for (std::uint32_t j = 0; j < s.leaves_; ++j) s.nodes_.push_back({j, j});
  std::vector<std::pair<std::uint32_t, std::uint32_t>> composite;
  for (const auto& [range, _] : splits) composite.push_back(range);
  std::stable_sort(composite.begin(), composite.end(), [](auto x, auto y) {
    return detail::ceil_log2(x.second - x.first + 1) < detail::ceil_log2(y.second - y.first + 1);
  });

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> index;
  for (std::uint32_t j = 0; j < s.leaves_; ++j) index[{j, j}] = j;
  for (const auto& r : composite) {
    index[r] = static_cast<std::uint32_t>(s.nodes_.size());
    s.nodes_.push_back({r.first, r.second});
  }

  const auto layer_of = [](const CarryNode& n) { return detail::ceil_log2(n.length()); };
  const std::size_t depth = detail::ceil_log2(s.leaves_);
  s.layers_.resize(depth);
  std::vector<bool> feeds(s.nodes_.size(), false);
  for (const auto& r : composite) {
    const auto [hi_first, lo_last] = splits.at(r);
    Composition c{index.at(r), index.at({hi_first, r.second}), index.at({r.first, lo_last})};
    feeds[c.upper] = feeds[c.lower] = true;
    s.layers_[layer_of(s.nodes_[c.out]) - 1].push_back(c);
  }

  s.published_.resize(depth);
  s.mask_slot_.assign(s.nodes_.size(), CompositionSchedule::kNoSlot);
  std::vector<std::vector<std::uint32_t>> by_layer(depth + 1);
  for (std::uint32_t n = 0; n < s.nodes_.size(); ++n) {
    if (feeds[n]) by_layer[layer_of(s.nodes_[n])].push_back(n);
  }
  std::uint32_t slot = 0;
  for (std::size_t l = 0; l < depth; ++l) {
    s.published_[l] = by_layer[l];
    for (auto n : by_layer[l]) s.mask_slot_[n] = slot++;
  }

  for (std::uint32_t j = 0; j + 1 < p; ++j) s.solution_.push_back(index.at({0, j}));
  return s;
}

}  // namespace sslr

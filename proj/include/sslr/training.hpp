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

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sslr/activation.hpp"
#include "sslr/bits.hpp"
#include "sslr/composenet.hpp"
#include "sslr/engine.hpp"
#include "sslr/error.hpp"
#include "sslr/fixedpoint.hpp"
#include "sslr/randomness.hpp"
#include "sslr/sharing.hpp"

namespace sslr {

enum class TruncationMode {
  kLocal,
  // Test hook, insecure: opens each value and truncates it exactly, so the
  // secure run can be compared bit for bit with the fixed-point simulator.
  kExactOracle,
};

struct TrainingConfig {
  double eta = 0.001;
  std::size_t iterations = 100;
  FixedPointParams params;
  TruncationMode truncation = TruncationMode::kLocal;
};

// Samples as rows of [1, features...]; labels in {0, 1}.
struct Dataset {
  std::size_t rows = 0;
  std::size_t cols = 0;  // m + 1, including the leading ones column
  std::vector<double> x;
  std::vector<double> t;

  double at(std::size_t r, std::size_t c) const { return x[r * cols + c]; }
};

inline Dataset make_dataset(const std::vector<std::vector<double>>& features,
                            const std::vector<double>& labels) {
  if (features.size() != labels.size()) fail(ErrorCode::kArgument, "feature/label count mismatch");
  Dataset d;
  d.rows = features.size();
  d.cols = features.empty() ? 1 : features[0].size() + 1;
  for (const auto& row : features) {
    if (row.size() + 1 != d.cols) fail(ErrorCode::kArgument, "ragged feature rows");
    d.x.push_back(1.0);
    d.x.insert(d.x.end(), row.begin(), row.end());
  }
  d.t = labels;
  return d;
}

inline double rho(double v) {
  if (v < -0.5) return 0.0;
  if (v < 0.5) return v + 0.5;
  return 1.0;
}

// ---------------------------------------------------------------------------
// Plaintext references

// Full gradient descent in doubles; eta is applied at the weight update.
inline std::vector<double> train_plain_float(const Dataset& d, const TrainingConfig& cfg) {
  std::vector<double> w(d.cols, 0.0), grad(d.cols);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t r = 0; r < d.rows; ++r) {
      double z = 0;
      for (std::size_t c = 0; c < d.cols; ++c) z += w[c] * d.at(r, c);
      const double diff = d.t[r] - rho(z);
      for (std::size_t c = 0; c < d.cols; ++c) grad[c] += diff * d.at(r, c);
    }
    for (std::size_t c = 0; c < d.cols; ++c) w[c] += cfg.eta * grad[c];
  }
  return w;
}

struct PlainFixedResult {
  std::vector<RingElement> weights;
  // Values whose integer part left the b-bit field (z_d or a weight).
  std::size_t overflow_events = 0;
};

inline std::vector<RingElement> encode_all(std::span<const double> v, const FixedPointParams& p) {
  std::vector<RingElement> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = encode(v[i], p);
  return out;
}

// The secure schedule on plaintext ring values with exact truncation.
inline PlainFixedResult train_plain_fixed(const Dataset& d, const TrainingConfig& cfg) {
  const FixedPointParams& fp = cfg.params;
  const Ring ring = fp.ring();
  const unsigned a = fp.frac_bits;
  const auto X = encode_all(d.x, fp);
  const auto T = encode_all(d.t, fp);
  const RingElement eta = encode(cfg.eta, fp);
  const std::int64_t limit = std::int64_t{1} << (a + fp.int_bits);
  const auto overflows = [&](RingElement v) {
    const std::int64_t s = ring.to_signed(v);
    return s >= limit || s <= -limit;
  };

  PlainFixedResult res;
  res.weights.assign(d.cols, 0);
  auto& w = res.weights;
  std::vector<RingElement> diff(d.rows), grad(d.cols);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (std::size_t r = 0; r < d.rows; ++r) {
      RingElement z = 0;
      for (std::size_t c = 0; c < d.cols; ++c) z += w[c] * X[r * d.cols + c];
      z = truncate_exact(ring.reduce(z), ring, a);
      if (overflows(z)) ++res.overflow_events;
      diff[r] = ring.sub(T[r], rho_bits(z, fp));
    }
    std::fill(grad.begin(), grad.end(), 0);
    for (std::size_t r = 0; r < d.rows; ++r) {
      for (std::size_t c = 0; c < d.cols; ++c) grad[c] += diff[r] * X[r * d.cols + c];
    }
    for (std::size_t c = 0; c < d.cols; ++c) {
      const RingElement dw = truncate_exact(ring.reduce(grad[c]), ring, a);
      w[c] = ring.add(w[c], truncate_exact(ring.mul(eta, dw), ring, a));
      if (overflows(w[c])) ++res.overflow_events;
    }
  }
  return res;
}

inline std::vector<double> decode_all(std::span<const RingElement> v, const FixedPointParams& p) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = decode(v[i], p);
  return out;
}

// Class 1 iff rho(w . x) >= 1/2.
inline std::vector<int> predict_labels(std::span<const double> w, const Dataset& d) {
  std::vector<int> out(d.rows);
  for (std::size_t r = 0; r < d.rows; ++r) {
    double z = 0;
    for (std::size_t c = 0; c < d.cols; ++c) z += w[c] * d.at(r, c);
    out[r] = rho(z) >= 0.5 ? 1 : 0;
  }
  return out;
}

inline double predict_and_score(std::span<const double> w, const Dataset& d) {
  if (d.rows == 0) return 0.0;
  const auto labels = predict_labels(w, d);
  std::size_t ok = 0;
  for (std::size_t r = 0; r < d.rows; ++r) ok += labels[r] == static_cast<int>(d.t[r]);
  return static_cast<double>(ok) / static_cast<double>(d.rows);
}

// ---------------------------------------------------------------------------
// Cost accounting

struct MultiplicationCount {
  std::uint64_t ring = 0;
  std::uint64_t bit = 0;

  std::uint64_t total() const { return ring + bit; }
};

// Per iteration: the |D| inner products of length m+1 and the |D|(m+1)
// gradient products over the ring, and per activation 4 ring products (two
// conversions, t and pos*r) plus a+b+2 setup ANDs, two ANDs per network
// composition and b-1 OR-tree ANDs.
inline MultiplicationCount count_multiplications(std::uint64_t rows, std::uint64_t features,
                                                 std::uint64_t iterations,
                                                 const FixedPointParams& fp) {
  const std::uint64_t cols = features + 1;
  const unsigned p = fp.activation_bits();
  const std::uint64_t per_activation_bits =
      p + 2 * plan_composenet(p).composition_count() + (fp.int_bits - 1);
  MultiplicationCount c;
  c.ring = iterations * (2 * rows * cols + 4 * rows);
  c.bit = iterations * rows * per_activation_bits;
  return c;
}

// Truncations per weight trajectory: |D| inner products and two per weight
// update, each worth at most one ulp.
inline std::uint64_t truncation_envelope_ulps(std::uint64_t rows, std::uint64_t cols,
                                              std::uint64_t iterations) {
  return iterations * (rows + 2 * cols);
}

// Correlated randomness consumed by train_secure.
inline Requirements training_requirements(std::size_t rows, std::size_t cols,
                                          std::size_t iterations, const FixedPointParams& fp) {
  Requirements req;
  if (iterations == 0 || rows == 0) return req;
  const unsigned p = fp.activation_bits();
  const std::size_t nw = words_for_bits(rows);
  req[TagKey::matrix_triple(rows, cols, 1)] = iterations;
  req[TagKey::ring_triple()] = iterations * (rows * cols + 2 * rows);
  req[TagKey::conversion()] = iterations * 2 * rows;
  req[TagKey::bit_triple()] = iterations * (p + fp.int_bits - 1) * nw;
  if (plan_composenet(p).unit_words() > 0) req[TagKey::compose_net(p)] = iterations * nw;
  return req;
}

// Scales every count up by `percent` (rounded up).
inline Requirements with_slack(Requirements req, unsigned percent) {
  for (auto& [tag, units] : req) units += (units * percent + 99) / 100;
  return req;
}

// ---------------------------------------------------------------------------
// Secure training

inline void truncate_all(Session& s, std::vector<RingElement>& v, TruncationMode mode) {
  const unsigned a = s.params().frac_bits;
  if (mode == TruncationMode::kLocal) {
    for (auto& x : v) x = truncate_share(x, s.role(), s.ring(), a);
    return;
  }
  const auto open = reveal(s, v);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = s.is_a() ? truncate_exact(open[i], s.ring(), a) : 0;
  }
}

// X: |D| x (m+1) shares with the ones column; t: |D| label shares, encoded as
// fixed point. Returns this party's weight shares.
inline ShareVector train_secure(Session& s, const ShareMatrix& X, const ShareVector& t,
                                const TrainingConfig& cfg) {
  const std::size_t rows = X.rows, cols = X.cols;
  if (t.values.size() != rows) {
    fail(ErrorCode::kProtocol, "label share count " + std::to_string(t.values.size()) +
                                   " does not match " + std::to_string(rows) + " samples");
  }
  const Ring& ring = s.ring();
  const RingElement eta = encode(cfg.eta, s.params());

  ShareMatrix w(s.role(), cols, 1);
  std::size_t it = 0;
  const char* phase = "";
  try {
    for (; it < cfg.iterations; ++it) {
      phase = "inner products";
      std::vector<RingElement> z = matmul(s, X, w).values;
      truncate_all(s, z, cfg.truncation);

      phase = "activation";
      const auto o = batch_activate(s, std::span<const RingElement>(z));

      phase = "gradient";
      std::vector<RingElement> diff(rows * cols);
      for (std::size_t r = 0; r < rows; ++r) {
        const RingElement d = ring.sub(t.values[r], o[r]);
        for (std::size_t c = 0; c < cols; ++c) diff[r * cols + c] = d;
      }
      const auto prod = batch_mul(s, std::span<const RingElement>(diff),
                                  std::span<const RingElement>(X.values));
      std::vector<RingElement> grad(cols, 0);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) grad[c] += prod[r * cols + c];
      }
      for (auto& g : grad) g = ring.reduce(g);
      truncate_all(s, grad, cfg.truncation);
      for (auto& g : grad) g = ring.mul(eta, g);
      truncate_all(s, grad, cfg.truncation);
      for (std::size_t c = 0; c < cols; ++c) w.values[c] = ring.add(w.values[c], grad[c]);
    }
  } catch (const Error& e) {
    throw Error(e.code(), "iteration " + std::to_string(it + 1) + ", " + phase + ": " + e.what());
  }
  return {s.role(), std::move(w.values)};
}

}  // namespace sslr
